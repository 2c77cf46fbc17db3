#pragma once

#include <cstddef>
#include <functional>

namespace semikernel {

/// Worker count: override if set, else SEMIKERNEL_THREADS, else hardware
/// concurrency (at least 1).
unsigned thread_count();

/// Override the worker count for the current process; 0 restores the
/// environment/hardware default.
void set_thread_count(unsigned n);

/// Runs body(i) for i in [0, n). Each index is handled by exactly one
/// worker; callers write results into per-index slots, so output does not
/// depend on the worker count. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace semikernel
