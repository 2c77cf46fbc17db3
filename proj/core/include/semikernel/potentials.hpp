#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semikernel {

/// Value, first and second spatial derivative of V(t, x) at one point.
struct PotentialSample {
  double v = 0.0;
  double grad = 0.0;
  double hess = 0.0;
};

/// A potential V(t, x) on the real line with analytic derivatives and a
/// global bound M >= sup |d^2 V / dx^2|.
class PotentialModel {
 public:
  using Evaluator = std::function<PotentialSample(double t, double x)>;

  PotentialModel(std::string id, Evaluator eval, double hess_bound,
                 bool time_dependent);

  const std::string& id() const { return id_; }
  double hess_bound() const { return hess_bound_; }
  bool time_dependent() const { return time_dependent_; }

  PotentialSample operator()(double t, double x) const { return eval_(t, x); }

 private:
  std::string id_;
  Evaluator eval_;
  double hess_bound_;
  bool time_dependent_;
};

PotentialModel free_potential();
PotentialModel stark_potential(double field);
PotentialModel harmonic_potential();
/// |x|^3/6 on |x| <= 1 with a quadratic continuation outside; V'' = min(|x|, 1).
PotentialModel abscubed_potential();
/// (1 + sin(t)/2) x^2/2.
PotentialModel breathing_potential();

/// Builds a builtin from `free`, `stark:E=<float>`, `harmonic`, `abscubed`
/// or `breathing`. Throws Error(unknown_potential) otherwise.
PotentialModel parse_potential(std::string_view name);

/// Field strength of a `stark...` potential id; 0 for anything else.
double stark_field(const PotentialModel& potential);

PotentialSample eval(const PotentialModel& potential, double t, double x);

/// pi / sqrt(M); +infinity when M == 0.
double safe_horizon(const PotentialModel& potential);

struct AssumptionReport {
  std::string id;
  double hess_bound = 0.0;
  double max_abs_hess = 0.0;
  double max_grad_error = 0.0;  // |central difference - grad| / (1 + |grad|)
  std::size_t samples = 0;
  bool growth_ok = false;
  bool consistency_ok = false;

  bool pass() const { return growth_ok && consistency_ok; }
};

/// Samples the Hessian bound and gradient consistency on the tensor grid
/// t_samples x x_samples. Violations are recorded in the report.
AssumptionReport check_assumption(const PotentialModel& potential,
                                  std::span<const double> t_samples,
                                  std::span<const double> x_samples);

/// 64 uniform times on [0, 2 pi].
std::vector<double> default_time_samples();
/// 512 uniform positions on [-8, 8].
std::vector<double> default_position_samples();

}  // namespace semikernel
