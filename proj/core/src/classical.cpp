#include "semikernel/classical.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semikernel/error.hpp"
#include "semikernel/numerics.hpp"

namespace semikernel {
namespace {

// Hamiltonian state with the variational pair (J, P = J').
struct VarState {
  double x, xi, j, p;
};

VarState rhs(const PotentialModel& potential, double s, const VarState& z) {
  const PotentialSample v = potential(s, z.x);
  return {z.xi, -v.grad, z.p, -v.hess * z.j};
}

VarState axpy(const VarState& z, double h, const VarState& k) {
  return {z.x + h * k.x, z.xi + h * k.xi, z.j + h * k.j, z.p + h * k.p};
}

VarState rk4_var_step(const PotentialModel& potential, double s, double h, const VarState& z) {
  const VarState k1 = rhs(potential, s, z);
  const VarState k2 = rhs(potential, s + 0.5 * h, axpy(z, 0.5 * h, k1));
  const VarState k3 = rhs(potential, s + 0.5 * h, axpy(z, 0.5 * h, k2));
  const VarState k4 = rhs(potential, s + h, axpy(z, h, k3));
  const double w = h / 6.0;
  return {z.x + w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          z.xi + w * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi),
          z.j + w * (k1.j + 2.0 * k2.j + 2.0 * k3.j + k4.j),
          z.p + w * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p)};
}

bool finite(const VarState& z) {
  return std::isfinite(z.x) && std::isfinite(z.xi) && std::isfinite(z.j) &&
         std::isfinite(z.p);
}

void check_steps(double t, int steps) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::invalid_argument, "orbit time must be positive and finite");
  }
  if (steps < 16) throw Error(ErrorCode::invalid_argument, "orbit needs at least 16 steps");
}

// Integrates from s0 over `steps` steps of size h and records every node.
Orbit integrate(const PotentialModel& potential, OrbitKind kind, double s0, double h,
                int steps, VarState z) {
  Orbit orbit;
  orbit.kind = kind;
  const std::size_t n = static_cast<std::size_t>(steps) + 1;
  orbit.s.resize(n);
  orbit.states.resize(n);
  orbit.jac.resize(n);
  orbit.jac_rate.resize(n);
  const bool backward = h < 0.0;
  auto store = [&](std::size_t k, double s, const VarState& state) {
    const std::size_t idx = backward ? n - 1 - k : k;
    orbit.s[idx] = s;
    orbit.states[idx] = {state.x, state.xi};
    orbit.jac[idx] = state.j;
    orbit.jac_rate[idx] = state.p;
  };
  store(0, s0, z);
  for (int k = 0; k < steps; ++k) {
    const double s = s0 + h * k;
    z = rk4_var_step(potential, s, h, z);
    if (!finite(z)) {
      throw Error(ErrorCode::non_finite,
                  "orbit state overflowed for potential " + potential.id());
    }
    store(static_cast<std::size_t>(k) + 1, s0 + h * (k + 1), z);
  }
  // Pin the far endpoint exactly to avoid drift in s.
  if (backward) {
    orbit.s.front() = 0.0;
  } else {
    orbit.s.back() = s0 + h * steps;
  }
  return orbit;
}

struct Endpoint {
  double x, xi, j;
};

Endpoint forward_endpoint(const PotentialModel& potential, double t, double y, double v,
                          int steps) {
  const double h = t / steps;
  VarState z{y, v, 0.0, 1.0};
  for (int k = 0; k < steps; ++k) z = rk4_var_step(potential, h * k, h, z);
  if (!finite(z)) {
    throw Error(ErrorCode::non_finite, "shooting orbit overflowed for " + potential.id());
  }
  return {z.x, z.xi, z.j};
}

}  // namespace

int default_steps(double t) {
  const int n = std::max(64, static_cast<int>(std::ceil(t / 0.005)));
  return n + (n % 2);
}

PhasePoint rk4_step(const PotentialModel& potential, double s, double h, PhasePoint z) {
  auto f = [&](double si, double x, double xi) {
    return PhasePoint{xi, -potential(si, x).grad};
  };
  const PhasePoint k1 = f(s, z.x, z.xi);
  const PhasePoint k2 = f(s + 0.5 * h, z.x + 0.5 * h * k1.x, z.xi + 0.5 * h * k1.xi);
  const PhasePoint k3 = f(s + 0.5 * h, z.x + 0.5 * h * k2.x, z.xi + 0.5 * h * k2.xi);
  const PhasePoint k4 = f(s + h, z.x + h * k3.x, z.xi + h * k3.xi);
  return {z.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          z.xi + h / 6.0 * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi)};
}

Orbit flow_from_terminal(const PotentialModel& potential, double t, double x, double xi,
                         int steps) {
  check_steps(t, steps);
  return integrate(potential, OrbitKind::terminal_data, t, -t / steps, steps,
                   VarState{x, xi, 0.0, 1.0});
}

Orbit flow_from_initial(const PotentialModel& potential, double t, double y, double v,
                        int steps) {
  check_steps(t, steps);
  return integrate(potential, OrbitKind::boundary_data, 0.0, t / steps, steps,
                   VarState{y, v, 0.0, 1.0});
}

double action(const PotentialModel& potential, const Orbit& orbit) {
  std::vector<double> lagrangian(orbit.s.size());
  for (std::size_t k = 0; k < orbit.s.size(); ++k) {
    const PhasePoint& z = orbit.states[k];
    lagrangian[k] = 0.5 * z.xi * z.xi - potential(orbit.s[k], z.x).v;
  }
  const double h = orbit.t() / static_cast<double>(orbit.s.size() - 1);
  return simpson(lagrangian, h);
}

BvpSolution solve_bvp(const PotentialModel& potential, double t, double x, double y,
                      double tol, int steps) {
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "solve_bvp needs t > 0");
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "solve_bvp needs tol > 0");
  if (t >= safe_horizon(potential)) {
    throw Error(ErrorCode::horizon_exceeded,
                "t = " + std::to_string(t) + " is not below the safe horizon of " +
                    potential.id());
  }
  if (steps <= 0) steps = default_steps(t);
  check_steps(t, steps);

  constexpr int kMaxNewton = 50;
  double v = (x - y) / t;
  Endpoint end = forward_endpoint(potential, t, y, v, steps);
  double res = end.x - x;
  int iter = 0;
  while (std::abs(res) > tol) {
    if (++iter > kMaxNewton) {
      throw Error(ErrorCode::no_convergence,
                  "shooting did not converge within 50 Newton steps (t near a conjugate "
                  "time?)");
    }
    if (std::abs(end.j) < 1e-300) {
      throw Error(ErrorCode::no_convergence, "vanishing shooting Jacobian");
    }
    const double dv = -res / end.j;
    double lambda = 1.0;
    for (int halvings = 0;; ++halvings) {
      const double v_try = v + lambda * dv;
      const Endpoint trial = forward_endpoint(potential, t, y, v_try, steps);
      const double res_try = trial.x - x;
      if (std::abs(res_try) < std::abs(res) || halvings >= 30) {
        v = v_try;
        end = trial;
        res = res_try;
        break;
      }
      lambda *= 0.5;
    }
  }

  BvpSolution sol;
  sol.orbit = flow_from_initial(potential, t, y, v, steps);
  sol.xi0 = v;
  sol.xit = sol.orbit.terminal().xi;
  sol.residual = std::abs(sol.orbit.terminal().x - x);
  sol.action = action(potential, sol.orbit);
  sol.iterations = iter;
  return sol;
}

JacobianR0 jacobian_r0(const PotentialModel& potential, double t, double x, double xi,
                       int steps) {
  if (t >= safe_horizon(potential)) {
    throw Error(ErrorCode::horizon_exceeded, "jacobian_r0 needs t below the safe horizon");
  }
  if (steps <= 0) steps = default_steps(t);
  const Orbit orbit = flow_from_terminal(potential, t, x, xi, steps);
  const double j0 = orbit.jac.front();
  if (std::abs(j0) < 1e-14) {
    throw Error(ErrorCode::singular_jacobian, "d x(0) / d xi vanishes (conjugate point)");
  }
  JacobianR0 out;
  out.det_ratio = 1.0 / std::abs(j0);
  out.r0 = out.det_ratio - 1.0 / t;
  return out;
}

OrbitGapReport orbit_gap_check(const PotentialModel& potential, double t, double x,
                               double y, double x_prime, double xi, int steps) {
  if (steps <= 0) steps = default_steps(t);
  const BvpSolution bvp = solve_bvp(potential, t, x, y, 1e-12, steps);
  const Orbit terminal = flow_from_terminal(potential, t, x_prime, xi, steps);
  const double big_x = terminal.initial().x;
  const double shift = ((x - x_prime) - (y - big_x)) / t;

  OrbitGapReport report;
  report.mismatch = std::abs(x - x_prime) + std::abs(y - big_x);
  for (std::size_t k = 0; k < terminal.s.size(); ++k) {
    const PhasePoint& a = bvp.orbit.states[k];
    const PhasePoint& b = terminal.states[k];
    report.position_gap = std::max(report.position_gap, std::abs(a.x - b.x));
    report.momentum_gap = std::max(report.momentum_gap, std::abs(a.xi - b.xi - shift));
  }
  if (report.mismatch > 0.0) {
    report.c1 = report.position_gap / report.mismatch;
    report.c2 = report.momentum_gap / (t * report.mismatch);
  }
  return report;
}

}  // namespace semikernel
