#pragma once

#include <span>
#include <vector>

#include "semikernel/numerics.hpp"
#include "semikernel/potentials.hpp"

namespace semikernel {

struct QuadratureSpec {
  /// Truncation radius of the (x', xi) box in window widths.
  double trunc_sigma = 10.0;
  /// Nodes across the truncation box along x' and xi.
  int nodes_x = 64;
  int nodes_xi = 64;
  /// Upper bound on the integrand phase change per step, measured one
  /// window width away from the box centre.
  double phase_step_cap = kPi / 4.0;
  /// Unimodular gauge exp(i window_phase) applied to the base window.
  double window_phase = 0.0;

  /// Throws invalid_argument unless nodes >= 32 and trunc_sigma >= 6.
  void validate() const;
};

struct HIntegral {
  double x2_0 = 0.0;   // x^(2)(0; t, x', xi)
  double xi2_0 = 0.0;  // xi^(2)(0; t, x', xi)
  double h_int = 0.0;  // int_0^t h(s) ds
};

/// h(s) = xi(s)^2/2 + V(s, x(s)) - V'(s, x(s)) x(s) integrated by Simpson
/// along the terminal-data orbit through (x', xi) at time t.
HIntegral h_integral(const PotentialModel& potential, double t, double x_prime,
                     double xi, int steps = 0);

/// Rectangle of (x, y) targets an orbit table has to serve.
struct TableRegion {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;
};

/// Terminal-data orbit data on a uniform (x', xi) lattice. Depends on
/// (potential, t, eps, spec) only and is shared by every (x, y) in the
/// region it was built for.
struct OrbitTable {
  double t = 0.0;
  double eps = 0.0;
  QuadratureSpec spec;
  TableRegion region;
  UniformAxis x_axis;   // x'
  UniformAxis xi_axis;  // xi
  std::vector<double> x2_0;   // row-major [x' index][xi index]
  std::vector<double> xi2_0;
  std::vector<double> h_int;

  std::size_t index(std::size_t a, std::size_t b) const { return a * xi_axis.count + b; }
  std::size_t size() const { return x2_0.size(); }
};

OrbitTable build_orbit_table(const PotentialModel& potential, double t, double eps,
                             const QuadratureSpec& spec, const TableRegion& region);

/// E0(t, x, y; eps) by tensor trapezoid quadrature over the truncated
/// (x', xi) box. Throws truncation_too_tight if the box is clipped by the
/// table where the integrand is not negligible (> 1e-10 of its max).
cplx e0(const OrbitTable& table, double x, double y);

/// E0 on the tensor grid xs x ys, row-major [x index][y index].
std::vector<cplx> e0_block(const OrbitTable& table, std::span<const double> xs,
                           std::span<const double> ys);

/// (2 pi i t)^{-1/2} exp(i S(t, x, y)) with S from the boundary value problem.
cplx leading_term(const PotentialModel& potential, double t, double x, double y);

struct AmplitudeSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double eps = 0.0;
  cplx e0;
  double s_action = 0.0;
  cplx a0;  // (2 pi i t)^{1/2} exp(-i S) e0
};

AmplitudeSample amplitude_a0(const PotentialModel& potential, const OrbitTable& table,
                             double x, double y);
AmplitudeSample amplitude_a0(const PotentialModel& potential, double t, double x,
                             double y, double eps, const QuadratureSpec& spec = {});

/// Amplitudes on a tensor window, row-major [x index][y index].
std::vector<AmplitudeSample> amplitude_window(const PotentialModel& potential, double t,
                                              double eps, const QuadratureSpec& spec,
                                              std::span<const double> xs,
                                              std::span<const double> ys);

struct PhaseDecomposition {
  double phase = 0.0;   // -int h - y xi^(2)(0) + x xi
  double action = 0.0;  // S(t, x, y)
  double r1 = 0.0;      // (phase - S + X^2/(2t)) / t
  double bound = 0.0;   // (x - x')^2 + (y - x^(2)(0))^2
  double ratio = 0.0;   // |r1| / bound
};

PhaseDecomposition phase_decomposition_check(const PotentialModel& potential, double t,
                                             double x, double y, double x_prime,
                                             double xi);

}  // namespace semikernel
