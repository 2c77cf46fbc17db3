#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace semikernel {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Pairwise (cascade) summation. Order of additions depends only on the
/// length of the input, so results are reproducible bit for bit.
template <typename T>
T pairwise_sum(std::span<const T> values) {
  constexpr std::size_t kBlock = 16;
  if (values.size() <= kBlock) {
    T acc{};
    for (const T& v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& values) {
  return pairwise_sum(std::span<const T>(values));
}

/// Composite Simpson rule on uniformly spaced samples. An odd number of
/// intervals is closed with Simpson's 3/8 rule on the last three.
double simpson(std::span<const double> f, double h);

/// Uniform 1-D axis: start + i * step for i < count.
struct UniformAxis {
  double start = 0.0;
  double step = 1.0;
  std::size_t count = 0;

  double at(std::size_t i) const { return start + step * static_cast<double>(i); }
  double back() const { return at(count - 1); }
};

/// n uniformly spaced points covering [lo, hi] inclusive (n >= 2).
UniformAxis linspace(double lo, double hi, std::size_t n);

}  // namespace semikernel
