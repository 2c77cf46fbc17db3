#include "semikernel/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <limits>
#include <string>

#include "semikernel/error.hpp"
#include "semikernel/numerics.hpp"

namespace semikernel {

PotentialModel::PotentialModel(std::string id, Evaluator eval, double hess_bound,
                               bool time_dependent)
    : id_(std::move(id)),
      eval_(std::move(eval)),
      hess_bound_(hess_bound),
      time_dependent_(time_dependent) {
  if (!(hess_bound_ >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "hess_bound must be >= 0 for " + id_);
  }
}

PotentialModel free_potential() {
  return {"free", [](double, double) { return PotentialSample{}; }, 0.0, false};
}

PotentialModel stark_potential(double field) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, field);
  std::string id = "stark:E=" + std::string(buf, res.ptr);
  return {std::move(id),
          [field](double, double x) { return PotentialSample{field * x, field, 0.0}; },
          0.0, false};
}

PotentialModel harmonic_potential() {
  return {"harmonic",
          [](double, double x) { return PotentialSample{0.5 * x * x, x, 1.0}; }, 1.0,
          false};
}

PotentialModel abscubed_potential() {
  return {"abscubed",
          [](double, double x) {
            const double a = std::abs(x);
            if (a <= 1.0) return PotentialSample{a * a * a / 6.0, 0.5 * x * a, a};
            const double u = a - 1.0;
            const double sign = x < 0.0 ? -1.0 : 1.0;
            return PotentialSample{1.0 / 6.0 + 0.5 * u + 0.5 * u * u, sign * (0.5 + u),
                                   1.0};
          },
          1.0, false};
}

PotentialModel breathing_potential() {
  return {"breathing",
          [](double t, double x) {
            const double k = 1.0 + 0.5 * std::sin(t);
            return PotentialSample{0.5 * k * x * x, k * x, k};
          },
          1.5, true};
}

PotentialModel parse_potential(std::string_view name) {
  if (name == "free") return free_potential();
  if (name == "harmonic") return harmonic_potential();
  if (name == "abscubed") return abscubed_potential();
  if (name == "breathing") return breathing_potential();
  constexpr std::string_view stark_prefix = "stark:E=";
  if (name.starts_with(stark_prefix)) {
    const std::string_view value = name.substr(stark_prefix.size());
    double field = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), field);
    if (res.ec == std::errc() && res.ptr == value.data() + value.size() &&
        std::isfinite(field)) {
      return stark_potential(field);
    }
  }
  throw Error(ErrorCode::unknown_potential,
              "unknown potential '" + std::string(name) +
                  "' (expected free, stark:E=<float>, harmonic, abscubed, breathing)");
}

double stark_field(const PotentialModel& potential) {
  if (!potential.id().starts_with("stark")) return 0.0;
  return potential(0.0, 0.0).grad;
}

PotentialSample eval(const PotentialModel& potential, double t, double x) {
  return potential(t, x);
}

double safe_horizon(const PotentialModel& potential) {
  const double m = potential.hess_bound();
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return kPi / std::sqrt(m);
}

AssumptionReport check_assumption(const PotentialModel& potential,
                                  std::span<const double> t_samples,
                                  std::span<const double> x_samples) {
  if (t_samples.empty() || x_samples.empty()) {
    throw Error(ErrorCode::invalid_argument, "check_assumption needs nonempty samples");
  }
  constexpr double h = 1e-5;
  AssumptionReport report;
  report.id = potential.id();
  report.hess_bound = potential.hess_bound();
  for (double t : t_samples) {
    for (double x : x_samples) {
      const PotentialSample p = potential(t, x);
      report.max_abs_hess = std::max(report.max_abs_hess, std::abs(p.hess));
      const double fd = (potential(t, x + h).v - potential(t, x - h).v) / (2.0 * h);
      report.max_grad_error =
          std::max(report.max_grad_error, std::abs(fd - p.grad) / (1.0 + std::abs(p.grad)));
      ++report.samples;
    }
  }
  report.growth_ok = report.max_abs_hess <= report.hess_bound * (1.0 + 1e-9);
  report.consistency_ok = report.max_grad_error <= 1e-5;
  return report;
}

std::vector<double> default_time_samples() {
  std::vector<double> ts(64);
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = 2.0 * kPi * i / (ts.size() - 1);
  return ts;
}

std::vector<double> default_position_samples() {
  std::vector<double> xs(512);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = -8.0 + 16.0 * i / (xs.size() - 1);
  return xs;
}

}  // namespace semikernel
