#include "semikernel/parametrix.hpp"

#include <algorithm>
#include <cmath>

#include "semikernel/classical.hpp"
#include "semikernel/error.hpp"
#include "semikernel/parallel.hpp"
#include "semikernel/wavepacket.hpp"

namespace semikernel {
namespace {

constexpr double kNegligible = 1e-10;

cplx unit_phase(double theta) { return {std::cos(theta), std::sin(theta)}; }

// Backward RK4 from (x, xi) at time t to s = 0 with h accumulated by
// Simpson's rule on the nodes; steps is even.
HIntegral stream_h(const PotentialModel& potential, double t, double x, double xi,
                   int steps) {
  const double dt = t / steps;
  const double h = -dt;
  double s = t;
  double acc = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const PotentialSample p = potential(s, x);
    const double weight = (k == 0 || k == steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    acc += weight * (0.5 * xi * xi + p.v - p.grad * x);
    if (k == steps) break;
    const double k1x = xi;
    const double k1p = -p.grad;
    const double k2x = xi + 0.5 * h * k1p;
    const double k2p = -potential(s + 0.5 * h, x + 0.5 * h * k1x).grad;
    const double k3x = xi + 0.5 * h * k2p;
    const double k3p = -potential(s + 0.5 * h, x + 0.5 * h * k2x).grad;
    const double k4x = xi + h * k3p;
    const double k4p = -potential(s + h, x + h * k3x).grad;
    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    xi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    s = (k + 1 == steps) ? 0.0 : t - dt * (k + 1);
  }
  if (!std::isfinite(x) || !std::isfinite(xi) || !std::isfinite(acc)) {
    throw Error(ErrorCode::non_finite, "orbit left the finite range");
  }
  return {x, xi, acc * dt / 3.0};
}

struct Spacing {
  double hx;
  double hxi;
};

double window_width_t(double t, double eps) {
  return std::sqrt((eps * eps * eps * eps + t * t) / (eps * eps));
}

// Node spacing: the configured count across the box, refined where the phase
// cap asks for it (rates measured one window width from the box centre).
Spacing spacing_for(const QuadratureSpec& spec, double t, double eps) {
  const double r = spec.trunc_sigma;
  const double wt = window_width_t(t, eps);
  const double chirp = wt * t / (eps * eps * eps * eps + t * t);
  double hx = 2.0 * r * wt / spec.nodes_x;
  double hxi = 2.0 * r * (eps / t) / spec.nodes_xi;
  if (chirp > 0.0) hx = std::min(hx, spec.phase_step_cap / chirp);
  hxi = std::min(hxi, spec.phase_step_cap / wt);
  return {hx, hxi};
}

UniformAxis axis_between(double lo, double hi, double step) {
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  return {lo, step, count};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (nodes_x < 32 || nodes_xi < 32) {
    throw Error(ErrorCode::invalid_argument, "quadrature needs at least 32 nodes per axis");
  }
  if (!(trunc_sigma >= 6.0)) {
    throw Error(ErrorCode::invalid_argument, "quadrature truncation must be >= 6 widths");
  }
  if (!(phase_step_cap > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "phase step cap must be positive");
  }
}

HIntegral h_integral(const PotentialModel& potential, double t, double x_prime, double xi,
                     int steps) {
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "h integral needs t > 0");
  if (t >= safe_horizon(potential)) {
    throw Error(ErrorCode::horizon_exceeded, "h integral needs t below the safe horizon");
  }
  const Orbit orbit =
      flow_from_terminal(potential, t, x_prime, xi, steps > 0 ? steps : default_steps(t));
  std::vector<double> h(orbit.s.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    const PhasePoint& z = orbit.states[k];
    const PotentialSample p = potential(orbit.s[k], z.x);
    h[k] = 0.5 * z.xi * z.xi + p.v - p.grad * z.x;
  }
  const double ds = t / static_cast<double>(h.size() - 1);
  return {orbit.initial().x, orbit.initial().xi, simpson(h, ds)};
}

OrbitTable build_orbit_table(const PotentialModel& potential, double t, double eps,
                             const QuadratureSpec& spec, const TableRegion& region) {
  spec.validate();
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_argument, "orbit table needs eps > 0");
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "orbit table needs t > 0");
  if (t >= safe_horizon(potential)) {
    throw Error(ErrorCode::horizon_exceeded, "t is beyond the safe horizon");
  }
  if (region.x_lo > region.x_hi || region.y_lo > region.y_hi) {
    throw Error(ErrorCode::invalid_argument, "empty table region");
  }
  const double r = spec.trunc_sigma;
  const double wt = window_width_t(t, eps);
  const Spacing sp = spacing_for(spec, t, eps);
  const int steps = default_steps(t);

  OrbitTable table;
  table.t = t;
  table.eps = eps;
  table.spec = spec;
  table.region = region;
  table.x_axis = axis_between(region.x_lo - r * wt - 2.0 * sp.hx,
                              region.x_hi + r * wt + 2.0 * sp.hx, sp.hx);
  const double xp_lo = table.x_axis.start;
  const double xp_hi = table.x_axis.back();
  // Targets for x^(2)(0): every y in the region within r widths of phi_eps.
  const double x2_lo = region.y_lo - r * eps;
  const double x2_hi = region.y_hi + r * eps;
  double xi_lo = (xp_lo - x2_hi) / t - 4.0 * sp.hxi;
  double xi_hi = (xp_hi - x2_lo) / t + 4.0 * sp.hxi;

  for (int attempt = 0; attempt < 8; ++attempt) {
    table.xi_axis = axis_between(xi_lo, xi_hi, sp.hxi);
    const std::size_t nx = table.x_axis.count;
    const std::size_t nxi = table.xi_axis.count;
    table.x2_0.assign(nx * nxi, 0.0);
    table.xi2_0.assign(nx * nxi, 0.0);
    table.h_int.assign(nx * nxi, 0.0);
    parallel_for(nx, [&](std::size_t a) {
      const double xp = table.x_axis.at(a);
      for (std::size_t b = 0; b < nxi; ++b) {
        const HIntegral hi = stream_h(potential, t, xp, table.xi_axis.at(b), steps);
        const std::size_t idx = table.index(a, b);
        table.x2_0[idx] = hi.x2_0;
        table.xi2_0[idx] = hi.xi2_0;
        table.h_int[idx] = hi.h_int;
      }
    });
    // x^(2)(0) must decrease along xi (no conjugate point) and the xi range
    // must bracket the targets on every row.
    double need_lo = 0.0;
    double need_hi = 0.0;
    for (std::size_t a = 0; a < nx; ++a) {
      for (std::size_t b = 1; b < nxi; ++b) {
        if (!(table.x2_0[table.index(a, b)] < table.x2_0[table.index(a, b - 1)])) {
          throw Error(ErrorCode::singular_jacobian,
                      "x(0) is not monotone in the momentum; conjugate point");
        }
      }
      need_lo = std::max(need_lo, x2_hi - table.x2_0[table.index(a, 0)]);
      need_hi = std::max(need_hi, table.x2_0[table.index(a, nxi - 1)] - x2_lo);
    }
    if (need_lo <= 0.0 && need_hi <= 0.0) return table;
    const double span = xi_hi - xi_lo;
    if (need_lo > 0.0) xi_lo -= std::max(0.25 * span, 2.0 * need_lo / t);
    if (need_hi > 0.0) xi_hi += std::max(0.25 * span, 2.0 * need_hi / t);
  }
  throw Error(ErrorCode::truncation_too_tight, "orbit table could not bracket the targets");
}

std::vector<cplx> e0_block(const OrbitTable& table, std::span<const double> xs,
                           std::span<const double> ys) {
  const double t = table.t;
  const double eps = table.eps;
  const double r = table.spec.trunc_sigma;
  const cplx gauge = unit_phase(table.spec.window_phase);
  ComplexGaussian phi_t = evolved_window(eps, t);
  ComplexGaussian phi_0 = evolved_window(eps, 0.0);
  phi_t.amp *= gauge;
  phi_0.amp *= gauge;
  const double wt = phi_t.abs_width();
  const double norm2 = standard_window().l2_norm() * standard_window().l2_norm();
  const double peak = std::abs(phi_t.amp) * std::abs(phi_0.amp);
  const UniformAxis& xa = table.x_axis;
  const UniformAxis& xia = table.xi_axis;
  const std::size_t nx = xa.count;
  const std::size_t nxi = xia.count;
  const double weight = xa.step * xia.step / (2.0 * kPi) / norm2;

  for (double x : xs) {
    if (x - r * wt < xa.start - 0.5 * xa.step || x + r * wt > xa.back() + 0.5 * xa.step) {
      const double edge = std::min(std::abs(x - xa.start), std::abs(xa.back() - x));
      if (std::abs(phi_t(edge)) * std::abs(phi_0.amp) > kNegligible * peak) {
        throw Error(ErrorCode::truncation_too_tight, "x' box exceeds the orbit table");
      }
    }
  }

  std::vector<cplx> out(xs.size() * ys.size());
  parallel_for(ys.size(), [&](std::size_t jy) {
    const double y = ys[jy];
    // Per row: xi index range with |y - x2(0)| <= r eps and the values
    // conj(phi_0(y - X)) exp(-i (h_int + y Xi)).
    std::vector<std::size_t> begin(nx);
    std::vector<std::size_t> end(nx);
    std::vector<double> clip(nx, 0.0);  // |phi_0| at a clipped row end
    std::vector<std::size_t> offset(nx + 1, 0);
    for (std::size_t a = 0; a < nx; ++a) {
      const double* row = &table.x2_0[table.index(a, 0)];
      // Decreasing row: first b with X <= y + r eps, first b with X < y - r eps.
      const auto* lo = std::partition_point(row, row + nxi,
                                            [&](double v) { return v > y + r * eps; });
      const auto* hi = std::partition_point(row, row + nxi,
                                            [&](double v) { return v >= y - r * eps; });
      begin[a] = static_cast<std::size_t>(lo - row);
      end[a] = static_cast<std::size_t>(hi - row);
      if (begin[a] < end[a]) {
        if (begin[a] == 0) clip[a] = std::max(clip[a], std::abs(phi_0(y - row[0])));
        if (end[a] == nxi) clip[a] = std::max(clip[a], std::abs(phi_0(y - row[nxi - 1])));
      }
      offset[a + 1] = offset[a] + (end[a] - begin[a]);
    }
    std::vector<cplx> b_val(offset[nx]);
    for (std::size_t a = 0; a < nx; ++a) {
      for (std::size_t b = begin[a]; b < end[a]; ++b) {
        const std::size_t idx = table.index(a, b);
        b_val[offset[a] + b - begin[a]] =
            std::conj(phi_0(y - table.x2_0[idx])) *
            unit_phase(-(table.h_int[idx] + y * table.xi2_0[idx]));
      }
    }
    std::vector<cplx> rows;
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      const double x = xs[ix];
      const double lo = std::ceil((x - r * wt - xa.start) / xa.step);
      const double hi = std::floor((x + r * wt - xa.start) / xa.step);
      const auto a0 = static_cast<std::size_t>(std::clamp(lo, 0.0, double(nx)));
      const auto a1 = static_cast<std::size_t>(std::clamp(hi + 1.0, 0.0, double(nx)));
      rows.assign(a1 > a0 ? a1 - a0 : 0, cplx{});
      const cplx step = unit_phase(x * xia.step);
      for (std::size_t a = a0; a < a1; ++a) {
        if (begin[a] >= end[a]) continue;
        const cplx wa = phi_t(x - xa.at(a));
        if (clip[a] > 0.0 && std::abs(wa) * clip[a] > kNegligible * peak) {
          throw Error(ErrorCode::truncation_too_tight, "xi box exceeds the orbit table");
        }
        cplx phase = unit_phase(x * xia.at(begin[a]));
        cplx acc = 0.0;
        const cplx* bv = &b_val[offset[a]];
        for (std::size_t b = 0, nb = end[a] - begin[a]; b < nb; ++b) {
          acc += bv[b] * phase;
          phase *= step;
        }
        rows[a - a0] = wa * acc;
      }
      out[ix * ys.size() + jy] = pairwise_sum<cplx>(rows) * weight;
    }
  });
  return out;
}

cplx e0(const OrbitTable& table, double x, double y) {
  const double xs[1] = {x};
  const double ys[1] = {y};
  return e0_block(table, xs, ys)[0];
}

cplx leading_term(const PotentialModel& potential, double t, double x, double y) {
  const BvpSolution bvp = solve_bvp(potential, t, x, y);
  return unit_phase(-kPi / 4.0) / std::sqrt(2.0 * kPi * t) * unit_phase(bvp.action);
}

namespace {

AmplitudeSample make_sample(double t, double x, double y, double eps, cplx e0v,
                            double action) {
  AmplitudeSample s;
  s.t = t;
  s.x = x;
  s.y = y;
  s.eps = eps;
  s.e0 = e0v;
  s.s_action = action;
  s.a0 = e0v * std::sqrt(2.0 * kPi * t) * unit_phase(kPi / 4.0 - action);
  return s;
}

}  // namespace

AmplitudeSample amplitude_a0(const PotentialModel& potential, const OrbitTable& table,
                             double x, double y) {
  const BvpSolution bvp = solve_bvp(potential, table.t, x, y);
  return make_sample(table.t, x, y, table.eps, e0(table, x, y), bvp.action);
}

AmplitudeSample amplitude_a0(const PotentialModel& potential, double t, double x, double y,
                             double eps, const QuadratureSpec& spec) {
  const OrbitTable table = build_orbit_table(potential, t, eps, spec, {x, x, y, y});
  return amplitude_a0(potential, table, x, y);
}

std::vector<AmplitudeSample> amplitude_window(const PotentialModel& potential, double t,
                                              double eps, const QuadratureSpec& spec,
                                              std::span<const double> xs,
                                              std::span<const double> ys) {
  if (xs.empty() || ys.empty()) return {};
  const auto [xl, xh] = std::minmax_element(xs.begin(), xs.end());
  const auto [yl, yh] = std::minmax_element(ys.begin(), ys.end());
  const OrbitTable table = build_orbit_table(potential, t, eps, spec, {*xl, *xh, *yl, *yh});
  const std::vector<cplx> values = e0_block(table, xs, ys);
  std::vector<AmplitudeSample> out(values.size());
  parallel_for(values.size(), [&](std::size_t k) {
    const double x = xs[k / ys.size()];
    const double y = ys[k % ys.size()];
    out[k] = make_sample(t, x, y, eps, values[k], solve_bvp(potential, t, x, y).action);
  });
  return out;
}

PhaseDecomposition phase_decomposition_check(const PotentialModel& potential, double t,
                                             double x, double y, double x_prime,
                                             double xi) {
  const BvpSolution bvp = solve_bvp(potential, t, x, y);
  const HIntegral hi = h_integral(potential, t, x_prime, xi);
  PhaseDecomposition d;
  d.phase = -hi.h_int - y * hi.xi2_0 + x * xi;
  d.action = bvp.action;
  const double gap = (x - x_prime) - (y - hi.x2_0);
  d.r1 = (d.phase - d.action + gap * gap / (2.0 * t)) / t;
  d.bound = (x - x_prime) * (x - x_prime) + (y - hi.x2_0) * (y - hi.x2_0);
  d.ratio = d.bound > 0.0 ? std::abs(d.r1) / d.bound : 0.0;
  return d;
}

}  // namespace semikernel
