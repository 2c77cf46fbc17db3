#include "semikernel/numerics.hpp"

#include "semikernel/error.hpp"

namespace semikernel {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::unknown_potential: return "UnknownPotential";
    case ErrorCode::non_finite: return "NonFinite";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::horizon_exceeded: return "HorizonExceeded";
    case ErrorCode::singular_jacobian: return "SingularJacobian";
    case ErrorCode::grid_too_coarse: return "GridTooCoarse";
    case ErrorCode::conjugate_point: return "ConjugatePoint";
    case ErrorCode::truncation_too_tight: return "TruncationTooTight";
    case ErrorCode::degenerate_fit: return "DegenerateFit";
    case ErrorCode::io: return "IoError";
  }
  return "Unknown";
}

double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (f[0] + f[1]);
  const std::size_t intervals = n - 1;
  std::size_t simpson_end = intervals;  // node index where Simpson stops
  double tail = 0.0;
  if (intervals % 2 == 1) {
    if (intervals == 1) return 0.5 * h * (f[0] + f[1]);
    simpson_end = intervals - 3;
    tail = 3.0 * h / 8.0 *
           (f[simpson_end] + 3.0 * f[simpson_end + 1] + 3.0 * f[simpson_end + 2] +
            f[simpson_end + 3]);
  }
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i < simpson_end; ++i) {
    if (i % 2 == 1) {
      odd += f[i];
    } else {
      even += f[i];
    }
  }
  double body = 0.0;
  if (simpson_end > 0) body = h / 3.0 * (f[0] + 4.0 * odd + 2.0 * even + f[simpson_end]);
  return body + tail;
}

UniformAxis linspace(double lo, double hi, std::size_t n) {
  if (n < 2) {
    if (n == 1) return {lo, 0.0, 1};
    throw Error(ErrorCode::invalid_argument, "linspace needs at least one point");
  }
  return {lo, (hi - lo) / static_cast<double>(n - 1), n};
}

}  // namespace semikernel
