// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semikernel/classical.hpp"
#include "semikernel/error.hpp"
#include "semikernel/harness.hpp"
#include "semikernel/parallel.hpp"
#include "semikernel/parametrix.hpp"
#include "semikernel/propagator.hpp"
#include "semikernel/wavepacket.hpp"

using namespace semikernel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [fail]");
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ExperimentConfig shipped(const std::string& name) {
  return load_config(fs::path(SEMIKERNEL_SOURCE_DIR) / "configs" / (name + ".json"));
}

double max_err(const RateReport& r) {
  double m = 0.0;
  for (const RateRow& row : r.rows) m = row.ok ? std::max(m, row.err) : INFINITY;
  return m;
}

bool rows_ok(const RateReport& r) {
  for (const RateRow& row : r.rows) {
    if (!row.ok) return false;
  }
  return true;
}

double slope_of(const RateReport& r) { return r.fit ? r.fit->slope : NAN; }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<RateRow> rows;
  for (std::size_t i = 0; i < x.size(); ++i) rows.push_back({x[i], y[i], true, {}});
  return fit_rate(rows).slope;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1. Free and Stark amplitudes are identically one.
Outcome exact_cases() {
  Outcome o;
  for (const char* name : {"free", "stark"}) {
    const RateReport r = amplitude_rate_experiment(shipped(name));
    const double m = max_err(r);
    o.require(m <= 1e-5, std::string(name) + " max|a0-1|=" + fmt(m));
  }
  return o;
}

// 2. Harmonic amplitude against the Mehler amplitude, and its rate.
Outcome harmonic_envelope() {
  Outcome o;
  const ExperimentConfig c = shipped("harmonic");
  const PotentialModel v = harmonic_potential();
  double worst = 0.0;
  for (double t : c.t_values) {
    const double eps = c.eps_rule.eps(t);
    const double exact = std::sqrt(t / std::sin(t));
    const double bound = 0.5 * t * std::pow(eps + t / eps, 2);
    for (const AmplitudeSample& s : amplitude_window(v, t, eps, c.quad, c.window.xs(), c.window.ys())) {
      worst = std::max(worst, std::abs(s.a0 - exact) / bound);
    }
  }
  o.require(worst <= 1.0, "max |a0-(t/sin t)^1/2| / envelope=" + fmt(worst));
  const RateReport r = amplitude_rate_experiment(c);
  o.require(rows_ok(r) && slope_of(r) >= kAmplitudeSlopeThreshold,
            "slope=" + fmt(slope_of(r)));
  return o;
}

// 3. AbsCubed amplitude and remainder rates.
Outcome abscubed_rates() {
  Outcome o;
  const ExperimentConfig c = shipped("abscubed");
  const RateReport a = amplitude_rate_experiment(c);
  o.require(rows_ok(a) && slope_of(a) >= kAmplitudeSlopeThreshold,
            "amplitude slope=" + fmt(slope_of(a)));
  const double spread = a.rows.front().err / a.rows.back().err;
  o.require(spread >= 8.0, "err(0.32)/err(0.02)=" + fmt(spread));
  const RateReport r = remainder_rate_experiment(c);
  o.require(rows_ok(r) && slope_of(r) >= kRemainderSlopeThreshold,
            "remainder slope=" + fmt(slope_of(r)));
  return o;
}

// 4. Numeric kernels against the closed forms on the central window.
Outcome kernel_fidelity() {
  Outcome o;
  const GridSpec g{16.0, 256};
  const auto [lo, hi] = central_range(g, 4.0);
  KernelOptions opt;
  opt.mode = KernelMode::resolved;
  opt.row_begin = opt.col_begin = lo;
  opt.row_end = opt.col_end = hi;
  for (const char* name : {"free", "stark:E=1", "harmonic"}) {
    const PotentialModel v = parse_potential(name);
    double worst = 0.0;
    for (double t : {0.1, 0.3, 0.5}) {
      const KernelMatrix k = numeric_kernel_matrix(v, t, g, 2048, opt);
      for (std::size_t i = 0; i < k.rows; ++i) {
        for (std::size_t j = 0; j < k.cols; ++j) {
          const cplx e = exact_kernel(*exact_kernel_kind(v), t, g.x(lo + i), g.x(lo + j),
                                      stark_field(v));
          worst = std::max(worst, std::abs(k(i, j) - e));
        }
      }
    }
    o.require(worst <= 5e-4, std::string(name) + " " + fmt(worst));
  }
  return o;
}

// 5. Wave-packet inversion on five functions.
Outcome inversion() {
  Outcome o;
  const std::size_t n = 480;
  const double dy = 24.0 / n;
  const UniformAxis y{-12.0, dy, n};
  const UniformAxis xi{-kPi / dy, 2.0 * kPi / (n * dy), n};
  const ComplexGaussian phi = standard_window();
  const std::vector<std::function<cplx(double)>> fs{
      [](double x) { return cplx(std::exp(-x * x / 2.0)); },
      [](double x) { return cplx(std::exp(-(x - 1.5) * (x - 1.5) / 0.98)); },
      [](double x) { return std::polar(std::exp(-x * x / 2.0), 3.0 * x); },
      [](double x) { return std::polar(std::exp(-x * x / 3.0), 0.8 * x * x); },
      [](double x) {
        const double u = 1.0 - x * x / 4.0;
        return cplx(u > 0.0 ? u * u * u : 0.0);
      },
  };
  double worst = 0.0;
  for (const auto& f : fs) {
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(y.at(i));
    std::vector<cplx> back = wp_adjoint(phi, wp_transform(phi, y, v, y, xi), y);
    const double n2 = phi.l2_norm() * phi.l2_norm();
    for (std::size_t i = 0; i < n; ++i) back[i] = back[i] / n2 - v[i];
    worst = std::max(worst, l2_norm(back, dy) / l2_norm(v, dy));
  }
  o.require(worst <= 1e-6, "max relative error=" + fmt(worst));
  return o;
}

// 6. Derivatives of the action against the boundary momenta.
Outcome hamilton_jacobi() {
  Outcome o;
  const double h = 1e-4;
  double worst = 0.0;
  for (const char* name : {"free", "stark:E=1", "harmonic", "abscubed", "breathing"}) {
    const PotentialModel p = parse_potential(name);
    for (double t : {0.1, 0.3}) {
      for (double x : {-1.0, 0.0, 1.0}) {
        for (double y : {-1.0, 0.5}) {
          const BvpSolution c = solve_bvp(p, t, x, y);
          const double dx =
              (solve_bvp(p, t, x + h, y).action - solve_bvp(p, t, x - h, y).action) / (2 * h);
          const double dy =
              (solve_bvp(p, t, x, y + h).action - solve_bvp(p, t, x, y - h).action) / (2 * h);
          worst = std::max({worst, std::abs(dx - c.xit), std::abs(dy + c.xi0)});
        }
      }
    }
  }
  o.require(worst <= 1e-5, "max deviation=" + fmt(worst));
  return o;
}

// 7. Jacobian remainder r0 stays bounded as t shrinks.
Outcome r0_bounded() {
  Outcome o;
  for (const char* name : {"harmonic", "abscubed"}) {
    const PotentialModel p = parse_potential(name);
    double worst = 0.0, first = 0.0, last = 0.0, harm = 0.0;
    for (int k = 2; k <= 8; ++k) {
      const double t = std::ldexp(1.0, -k);
      for (double x : {-1.0, 0.5}) {
        for (double xi : {-2.0, 0.2}) {
          const double r0 = jacobian_r0(p, t, x, xi).r0;
          worst = std::max(worst, std::abs(r0));
          if (p.id() == "harmonic") {
            harm = std::max(harm, std::abs(r0 - (1.0 / std::sin(t) - 1.0 / t)));
          }
        }
      }
      const double here = std::abs(jacobian_r0(p, t, 0.5, 0.2).r0);
      if (k == 2) first = here;
      last = here;
    }
    o.require(std::isfinite(worst) && last <= first && worst <= 1.0,
              std::string(name) + " max|r0|=" + fmt(worst));
    if (p.id() == "harmonic") o.require(harm <= 1e-6, "harmonic vs 1/sin t-1/t " + fmt(harm));
  }
  return o;
}

double simpson_oracle(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// 8. Gaussian moment estimate sweep.
Outcome key_estimate() {
  Outcome o;
  const auto sweep = key_estimate_sweep();
  double lo1 = INFINITY, hi1 = 0, lo2 = INFINITY, hi2 = 0, quad = 0;
  bool finite = true;
  for (const KeyEstimate& k : sweep) {
    finite = finite && std::isfinite(k.ratio_l1()) && std::isfinite(k.ratio_l2());
    lo1 = std::min(lo1, k.ratio_l1());
    hi1 = std::max(hi1, k.ratio_l1());
    lo2 = std::min(lo2, k.ratio_l2());
    hi2 = std::max(hi2, k.ratio_l2());
  }
  for (int alpha = 0; alpha <= 2; ++alpha) {
    for (double t : {0.5, 0.125, 0.015625}) {
      for (double eps : {1.0, 0.25, 0.125}) {
        const KeyEstimate k = key_estimate_check(alpha, t, eps);
        const ComplexGaussian w = evolved_window(eps, t);
        const double top = 14.0 * w.abs_width();
        const double q1 = 2.0 * simpson_oracle(
            [&](double x) { return std::pow(x, alpha) * std::abs(w(x)); }, 0.0, top, 20000);
        const double q2 = std::sqrt(2.0 * simpson_oracle(
            [&](double x) { return std::pow(x, 2 * alpha) * std::norm(w(x)); }, 0.0, top, 20000));
        quad = std::max({quad, std::abs(k.lhs_l1 - q1) / std::max(1.0, q1),
                         std::abs(k.lhs_l2 - q2) / std::max(1.0, q2)});
      }
    }
  }
  o.require(finite, std::to_string(sweep.size()) + " ratios finite");
  o.require(hi1 / lo1 < 10.0, "L1 variation=" + fmt(hi1 / lo1));
  o.require(hi2 / lo2 < 10.0, "L2 variation=" + fmt(hi2 / lo2));
  o.require(quad <= 1e-8, "closed form vs quadrature=" + fmt(quad));
  return o;
}

// 9. Integrator orders, operator norm and report determinism.
Outcome structural() {
  Outcome o;
  {
    const GridSpec g{16.0, 256};
    const WaveFunction u0 = sample(g, [](double x) { return cplx(std::exp(-(x - 0.5) * (x - 0.5))); });
    double lo = INFINITY, hi = -INFINITY;
    for (const char* name : {"free", "stark:E=1", "harmonic", "abscubed", "breathing"}) {
      const PotentialModel v = parse_potential(name);
      if (v.id() == "free") continue;  // kinetic step is exact
      const WaveFunction ref = split_step(v, u0, 0.3, 2048);
      std::vector<double> s, e;
      for (int steps : {8, 16, 32, 64}) {
        const WaveFunction u = split_step(v, u0, 0.3, steps);
        double d = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) d = std::max(d, std::abs(u.values[i] - ref.values[i]));
        s.push_back(1.0 / steps);
        e.push_back(d);
      }
      const double slope = loglog_slope(s, e);
      lo = std::min(lo, slope);
      hi = std::max(hi, slope);
    }
    o.require(lo >= 1.9 && hi <= 2.1, "split-step order " + fmt(lo) + ".." + fmt(hi));
  }
  {
    const double t = 1.0;
    std::vector<double> hs, es;
    for (int steps : {16, 32, 64, 128}) {
      const Orbit orb = flow_from_terminal(harmonic_potential(), t, 1.0, 0.5, steps);
      const double x0 = std::cos(t) - 0.5 * std::sin(t);
      const double p0 = std::sin(t) + 0.5 * std::cos(t);
      hs.push_back(t / steps);
      es.push_back(std::hypot(orb.initial().x - x0, orb.initial().xi - p0));
    }
    const double slope = loglog_slope(hs, es);
    o.require(slope >= 3.9, "RK4 order " + fmt(slope));
  }
  {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    const std::size_t n = 64;
    std::vector<cplx> a(n * n);
    Eigen::MatrixXcd m(n, n);
    for (std::size_t i = 0; i < n * n; ++i) {
      a[i] = cplx(normal(rng), normal(rng));
      m(static_cast<Eigen::Index>(i / n), static_cast<Eigen::Index>(i % n)) = a[i];
    }
    const double sigma = Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
    PowerIterationOptions opt;
    opt.max_iterations = 20000;
    opt.rel_tol = 1e-15;
    const double rel = std::abs(op_norm(MatrixView{a.data(), n, n, 1.0}, opt) - sigma) / sigma;
    o.require(rel <= 1e-8, "op_norm vs SVD " + fmt(rel));
  }
  {
    ExperimentConfig c = shipped("abscubed");
    c.t_values = {0.32, 0.16, 0.08, 0.04};
    c.window.nx = c.window.ny = 3;
    c.grid = {16.0, 128};
    c.steps = 128;
    c.remainder_block = 1.0;
    const fs::path root = fs::temp_directory_path() / "semikernel_acceptance";
    fs::remove_all(root);
    bool same = true;
    std::string first_amp, first_rem;
    for (unsigned threads : {1u, 2u, 4u}) {
      set_thread_count(threads);
      const fs::path dir = root / std::to_string(threads);
      emit_report(amplitude_rate_experiment(c), dir);
      emit_report(remainder_rate_experiment(c), dir);
      const std::string amp = slurp(dir / "amplitude.csv");
      const std::string rem = slurp(dir / "remainder.csv");
      if (threads == 1) {
        first_amp = amp;
        first_rem = rem;
      }
      same = same && amp == first_amp && rem == first_rem && !amp.empty();
    }
    set_thread_count(0);
    fs::remove_all(root);
    o.require(same, "reports byte-identical for 1/2/4 threads");
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria{
      {1, "exact-case identity", 60, exact_cases},
      {2, "harmonic amplitude envelope", 120, harmonic_envelope},
      {3, "abscubed rates", 600, abscubed_rates},
      {4, "kernel fidelity", 120, kernel_fidelity},
      {5, "wave-packet inversion", 30, inversion},
      {6, "hamilton-jacobi", 30, hamilton_jacobi},
      {7, "r0 boundedness", 30, r0_bounded},
      {8, "gaussian moment sweep", 30, key_estimate},
      {9, "structural checks", 120, structural},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("error: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) out.require(false, "runtime over " + fmt(c.budget_s) + " s");
    if (!out.pass) ++failed;
    std::printf("criterion %d %-28s %s  %s (%.1f s)\n", c.id, c.name, out.pass ? "PASS" : "FAIL",
                out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
