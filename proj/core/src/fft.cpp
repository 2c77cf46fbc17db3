#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace semikernel::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// Plans live for the lifetime of the process.
PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<fftw_complex> scratch(n);
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft_1d(len, scratch.data(), scratch.data(), FFTW_FORWARD, flags);
  p.inverse = fftw_plan_dft_1d(len, scratch.data(), scratch.data(), FFTW_BACKWARD, flags);
  cache.emplace(n, p);
  return p;
}

fftw_complex* as_fftw(cplx* data) { return reinterpret_cast<fftw_complex*>(data); }

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  const PlanPair p = plans_for(n);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void Fft::forward(cplx* data) const {
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(data), as_fftw(data));
}

void Fft::inverse(cplx* data) const {
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), as_fftw(data), as_fftw(data));
}

}  // namespace semikernel::detail
