#include "semikernel/wavepacket.hpp"

#include <algorithm>
#include <cmath>

#include "semikernel/error.hpp"

namespace semikernel {
namespace {

constexpr double kSupportWidths = 10.0;

cplx unit_phase(double theta) { return {std::cos(theta), std::sin(theta)}; }

// Index range [lo, hi) of axis points within [a, b].
std::pair<std::size_t, std::size_t> axis_range(const UniformAxis& axis, double a, double b) {
  const double lo = std::ceil((a - axis.start) / axis.step);
  const double hi = std::floor((b - axis.start) / axis.step);
  const double n = static_cast<double>(axis.count);
  const std::size_t i0 = static_cast<std::size_t>(std::clamp(lo, 0.0, n));
  const std::size_t i1 = static_cast<std::size_t>(std::clamp(hi + 1.0, 0.0, n));
  return {i0, std::max(i0, i1)};
}

}  // namespace

cplx ComplexGaussian::operator()(double x) const {
  const double u = x - center;
  return amp * unit_phase(momentum * u) * std::exp(-u * u / (2.0 * cwidth2));
}

double ComplexGaussian::abs_width() const {
  return std::sqrt(std::norm(cwidth2) / cwidth2.real());
}

double ComplexGaussian::l2_norm() const {
  return std::abs(amp) * std::sqrt(std::sqrt(kPi) * abs_width());
}

ComplexGaussian standard_window() {
  return {cplx(std::pow(kPi, -0.25), 0.0), 0.0, 0.0, cplx(1.0, 0.0)};
}

ComplexGaussian dilate(const ComplexGaussian& g, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_argument, "dilation needs eps > 0");
  return {g.amp / std::sqrt(eps), g.center * eps, g.momentum / eps, g.cwidth2 * eps * eps};
}

ComplexGaussian free_evolve(const ComplexGaussian& g, double t) {
  const cplx evolved = g.cwidth2 + cplx(0.0, t);
  const double p = g.momentum;
  return {g.amp * std::sqrt(g.cwidth2 / evolved) * unit_phase(0.5 * p * p * t),
          g.center + p * t, p, evolved};
}

ComplexGaussian evolved_window(double eps, double t) {
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_argument, "window needs eps > 0");
  if (!(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "window needs t >= 0");
  const cplx cw2(eps * eps, t);
  return {std::pow(kPi, -0.25) * std::sqrt(eps) / std::sqrt(cw2), 0.0, 0.0, cw2};
}

GaborField wp_transform(const ComplexGaussian& window, const UniformAxis& y_axis,
                        std::span<const cplx> f, const UniformAxis& x_axis,
                        const UniformAxis& xi_axis) {
  if (f.size() != y_axis.count) {
    throw Error(ErrorCode::invalid_argument, "sample count does not match the y axis");
  }
  const double width = window.abs_width();
  if (width < 4.0 * y_axis.step) {
    throw Error(ErrorCode::grid_too_coarse, "window narrower than 4 grid steps");
  }
  GaborField field{x_axis, xi_axis, std::vector<cplx>(x_axis.count * xi_axis.count)};
  std::vector<cplx> g;
  for (std::size_t i = 0; i < x_axis.count; ++i) {
    const double x = x_axis.at(i);
    const double c = x + window.center;
    const auto [k0, k1] =
        axis_range(y_axis, c - kSupportWidths * width, c + kSupportWidths * width);
    g.resize(k1 - k0);
    for (std::size_t k = k0; k < k1; ++k) {
      g[k - k0] = std::conj(window(y_axis.at(k) - x)) * f[k];
    }
    for (std::size_t j = 0; j < xi_axis.count; ++j) {
      const double xi = xi_axis.at(j);
      const cplx step = unit_phase(-y_axis.step * xi);
      cplx phase = unit_phase(-y_axis.at(k0) * xi);
      cplx acc = 0.0;
      for (const cplx& gk : g) {
        acc += gk * phase;
        phase *= step;
      }
      field.at(i, j) = acc * y_axis.step;
    }
  }
  return field;
}

std::vector<cplx> wp_adjoint(const ComplexGaussian& window, const GaborField& field,
                             const UniformAxis& out_axis) {
  const double width = window.abs_width();
  if (width < 4.0 * field.x.step || width < 4.0 * out_axis.step) {
    throw Error(ErrorCode::grid_too_coarse, "window narrower than 4 grid steps");
  }
  const UniformAxis& xi_axis = field.xi;
  std::vector<cplx> out(out_axis.count);
  const double weight = field.x.step * xi_axis.step / (2.0 * kPi);
  for (std::size_t m = 0; m < out_axis.count; ++m) {
    const double x = out_axis.at(m);
    // window(x - y) is centred at y = x - center.
    const double c = x - window.center;
    const auto [i0, i1] =
        axis_range(field.x, c - kSupportWidths * width, c + kSupportWidths * width);
    const cplx step = unit_phase(x * xi_axis.step);
    const cplx phase0 = unit_phase(x * xi_axis.start);
    cplx total = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
      cplx phase = phase0;
      cplx inner = 0.0;
      for (std::size_t j = 0; j < xi_axis.count; ++j) {
        inner += field.at(i, j) * phase;
        phase *= step;
      }
      total += window(x - field.x.at(i)) * inner;
    }
    out[m] = total * weight;
  }
  return out;
}

double l2_norm(std::span<const cplx> f, double dx) {
  std::vector<double> sq(f.size());
  std::transform(f.begin(), f.end(), sq.begin(), [](const cplx& v) { return std::norm(v); });
  return std::sqrt(pairwise_sum<double>(sq) * dx);
}

KeyEstimate key_estimate_check(int alpha, double t, double eps) {
  if (alpha < 0 || alpha > 2) {
    throw Error(ErrorCode::invalid_argument, "alpha must be 0, 1 or 2");
  }
  if (!(t > 0.0) || !(eps > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "key estimate needs t, eps > 0");
  }
  const double a = alpha;
  const double w = std::sqrt((eps * eps * eps * eps + t * t) / (eps * eps));
  const double amp = std::pow(kPi, -0.25) / std::sqrt(w);
  // int |x|^a exp(-x^2/(2w^2)) dx and int |x|^(2a) exp(-x^2/w^2) dx
  const double l1_moment = std::pow(2.0, (a + 1.0) / 2.0) * std::pow(w, a + 1.0) *
                           std::tgamma((a + 1.0) / 2.0);
  const double l2_moment = std::pow(w, 2.0 * a + 1.0) * std::tgamma(a + 0.5);

  KeyEstimate k;
  k.alpha = alpha;
  k.t = t;
  k.eps = eps;
  k.lhs_l1 = amp * l1_moment;
  k.lhs_l2 = amp * std::sqrt(l2_moment);
  const double spread = std::pow(eps + t / eps, a);
  const double u = eps / std::sqrt(t);
  k.rhs_l1 = spread * std::sqrt(t / eps) * (1.0 + u + u * u);
  k.rhs_l2 = spread;
  return k;
}

std::vector<KeyEstimate> key_estimate_sweep() {
  std::vector<KeyEstimate> out;
  for (int alpha = 0; alpha <= 2; ++alpha) {
    for (int k = 1; k <= 6; ++k) {
      for (int j = 0; j <= 3; ++j) {
        out.push_back(key_estimate_check(alpha, std::ldexp(1.0, -k), std::ldexp(1.0, -j)));
      }
    }
  }
  return out;
}

}  // namespace semikernel
