#pragma once

#include <vector>

#include "semikernel/potentials.hpp"

namespace semikernel {

struct PhasePoint {
  double x = 0.0;
  double xi = 0.0;
};

enum class OrbitKind { terminal_data, boundary_data };

/// Classical trajectory of x' = xi, xi' = -dV/dx sampled on a uniform grid
/// of s in [0, t]. `jac` is the position sensitivity with respect to the
/// data that parametrizes the orbit: d x(s) / d xi(t) for terminal data,
/// d x(s) / d xi(0) for boundary data. `jac_rate` is its s-derivative.
struct Orbit {
  OrbitKind kind = OrbitKind::terminal_data;
  std::vector<double> s;
  std::vector<PhasePoint> states;
  std::vector<double> jac;
  std::vector<double> jac_rate;

  double t() const { return s.back(); }
  const PhasePoint& initial() const { return states.front(); }
  const PhasePoint& terminal() const { return states.back(); }
};

struct BvpSolution {
  Orbit orbit;
  double xi0 = 0.0;  // momentum at s = 0
  double xit = 0.0;  // momentum at s = t
  double action = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// max(64, ceil(t / 0.005)), rounded up to an even count for Simpson.
int default_steps(double t);

/// One classical RK4 step of the Hamiltonian flow from time s with step h
/// (h may be negative).
PhasePoint rk4_step(const PotentialModel& potential, double s, double h,
                    PhasePoint z);

/// Integrates backward from (x(t), xi(t)) = (x, xi) to s = 0 with fixed-step
/// RK4, co-integrating J'' = -V''(s, x(s)) J with J(t) = 0, J'(t) = 1.
Orbit flow_from_terminal(const PotentialModel& potential, double t, double x,
                         double xi, int steps);

/// Integrates forward from (x(0), xi(0)) = (y, v), co-integrating
/// J'' = -V'' J with J(0) = 0, J'(0) = 1.
Orbit flow_from_initial(const PotentialModel& potential, double t, double y,
                        double v, int steps);

/// S = int_0^t (xi^2/2 - V(s, x(s))) ds by composite Simpson on the nodes.
double action(const PotentialModel& potential, const Orbit& orbit);

/// Orbit with x(0) = y and x(t) = x by single shooting on xi(0), Newton
/// steps through the forward variational Jacobian (halved when the
/// residual does not decrease). steps <= 0 selects default_steps(t).
BvpSolution solve_bvp(const PotentialModel& potential, double t, double x,
                      double y, double tol = 1e-12, int steps = 0);

struct JacobianR0 {
  double det_ratio = 0.0;  // |d x^(2)(0) / d xi|^{-1}
  double r0 = 0.0;         // det_ratio - 1/t   (n = 1)
};

JacobianR0 jacobian_r0(const PotentialModel& potential, double t, double x,
                       double xi, int steps = 0);

/// Compares the boundary-data orbit joining y to x with the terminal-data
/// orbit through (x', xi) at time t.
struct OrbitGapReport {
  double position_gap = 0.0;  // sup_s |x1(s) - x2(s)|
  double momentum_gap = 0.0;  // sup_s |xi1 - xi2 - ((x - x') - (y - X)) / t|
  double mismatch = 0.0;      // |x - x'| + |y - X|,  X = x2(0)
  double c1 = 0.0;            // position_gap / mismatch
  double c2 = 0.0;            // momentum_gap / (t * mismatch)
};

OrbitGapReport orbit_gap_check(const PotentialModel& potential, double t,
                               double x, double y, double x_prime, double xi,
                               int steps = 0);

}  // namespace semikernel
