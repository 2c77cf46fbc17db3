#pragma once

#include <span>
#include <vector>

#include "semikernel/numerics.hpp"

namespace semikernel {

/// amp * exp(i p (x - c)) * exp(-(x - c)^2 / (2 sigma2)) with complex
/// sigma2, Re sigma2 > 0.
struct ComplexGaussian {
  cplx amp{1.0, 0.0};
  double center = 0.0;
  double momentum = 0.0;
  cplx cwidth2{1.0, 0.0};

  cplx operator()(double x) const;
  /// Standard deviation parameter of |g|: |g(x)| ~ exp(-(x-c)^2 / (2 w^2)).
  double abs_width() const;
  double l2_norm() const;
};

/// pi^{-1/4} exp(-x^2/2), unit L2 norm.
ComplexGaussian standard_window();

/// (D_eps g)(x) = eps^{-1/2} g(x / eps).
ComplexGaussian dilate(const ComplexGaussian& g, double eps);

/// exp(i t Delta / 2) g in closed form.
ComplexGaussian free_evolve(const ComplexGaussian& g, double t);

/// exp(i t Delta / 2) D_eps of the standard window:
/// cwidth2 = eps^2 + i t, amp = pi^{-1/4} eps^{1/2} (eps^2 + i t)^{-1/2}.
ComplexGaussian evolved_window(double eps, double t);

/// Samples on a uniform phase-space grid, x-major: values[i * xi.count + j].
struct GaborField {
  UniformAxis x;
  UniformAxis xi;
  std::vector<cplx> values;

  cplx& at(std::size_t i, std::size_t j) { return values[i * xi.count + j]; }
  cplx at(std::size_t i, std::size_t j) const { return values[i * xi.count + j]; }
};

/// W f(x, xi) = int conj(w(y - x)) f(y) exp(-i y xi) dy by the trapezoid
/// rule on the samples of f (plain dy measure). Throws grid_too_coarse when
/// the window is narrower than 4 grid steps.
GaborField wp_transform(const ComplexGaussian& window, const UniformAxis& y_axis,
                        std::span<const cplx> f, const UniformAxis& x_axis,
                        const UniformAxis& xi_axis);

/// W* F(x) = int int w(x - y) F(y, xi) exp(i x xi) dy dxi / (2 pi), sampled
/// on out_axis.
std::vector<cplx> wp_adjoint(const ComplexGaussian& window, const GaborField& field,
                             const UniformAxis& out_axis);

/// ||f||_2 of samples with trapezoid weights (periodic / decayed ends).
double l2_norm(std::span<const cplx> f, double dx);

struct KeyEstimate {
  int alpha = 0;
  double t = 0.0;
  double eps = 0.0;
  double lhs_l1 = 0.0;
  double rhs_l1 = 0.0;
  double lhs_l2 = 0.0;
  double rhs_l2 = 0.0;

  double ratio_l1() const { return lhs_l1 / rhs_l1; }
  double ratio_l2() const { return lhs_l2 / rhs_l2; }
};

/// Closed-form ||x^alpha phi_eps^(t)||_{L1}, ||.||_{L2} for alpha in {0,1,2}
/// and the bounds (eps + t/eps)^alpha (t/eps)^{1/2} sum_{k<=2} (eps/sqrt t)^k
/// and (eps + t/eps)^alpha.
KeyEstimate key_estimate_check(int alpha, double t, double eps);

/// The (alpha, t, eps) sweep: alpha in {0,1,2}, t = 2^-k (k = 1..6),
/// eps = 2^-j (j = 0..3).
std::vector<KeyEstimate> key_estimate_sweep();

}  // namespace semikernel
