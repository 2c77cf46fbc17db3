#pragma once

#include <cstddef>

#include "semikernel/numerics.hpp"

namespace semikernel::detail {

/// In-place complex FFT of length n. Plans are created once per length and
/// shared; execution is thread safe. Unnormalized in both directions.
class Fft {
 public:
  explicit Fft(std::size_t n);

  void forward(cplx* data) const;
  void inverse(cplx* data) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace semikernel::detail
