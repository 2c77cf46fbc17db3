#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "semikernel/parallel.hpp"
#include "semikernel/parametrix.hpp"
#include "semikernel/propagator.hpp"

using namespace semikernel;

namespace {

void BM_OrbitTable(benchmark::State& state) {
  set_thread_count(1);
  const double t = 0.01 * static_cast<double>(state.range(0));
  const PotentialModel v = abscubed_potential();
  for (auto _ : state) {
    OrbitTable table = build_orbit_table(v, t, std::sqrt(t), {}, {-1.0, 1.0, -1.0, 1.0});
    benchmark::DoNotOptimize(table.h_int.data());
    state.counters["nodes"] = static_cast<double>(table.size());
  }
}
BENCHMARK(BM_OrbitTable)->Arg(4)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_E0Block(benchmark::State& state) {
  set_thread_count(1);
  const double t = 0.16;
  const OrbitTable table =
      build_orbit_table(abscubed_potential(), t, std::sqrt(t), {}, {-1.0, 1.0, -1.0, 1.0});
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = ys[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  for (auto _ : state) {
    auto block = e0_block(table, xs, ys);
    benchmark::DoNotOptimize(block.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}
BENCHMARK(BM_E0Block)->Arg(5)->Arg(17)->Unit(benchmark::kMillisecond);

void BM_SplitStep(benchmark::State& state) {
  const GridSpec grid{16.0, static_cast<std::size_t>(state.range(0))};
  const WaveFunction u0 = sample(grid, [](double x) { return cplx(std::exp(-x * x)); });
  const PotentialModel v = breathing_potential();
  for (auto _ : state) {
    WaveFunction u = split_step(v, u0, 0.3, 256);
    benchmark::DoNotOptimize(u.values.data());
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_SplitStep)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

void BM_ResolvedColumn(benchmark::State& state) {
  set_thread_count(1);
  const GridSpec grid{16.0, 256};
  const double t = 0.01 * static_cast<double>(state.range(0));
  const std::size_t mid = grid.nearest(0.0);
  KernelOptions opt;
  opt.mode = KernelMode::resolved;
  opt.col_begin = mid;
  opt.col_end = mid + 1;
  const auto [lo, hi] = central_range(grid, 4.0);
  opt.row_begin = lo;
  opt.row_end = hi;
  for (auto _ : state) {
    KernelMatrix k = numeric_kernel_matrix(harmonic_potential(), t, grid, 512, opt);
    benchmark::DoNotOptimize(k.entries.data());
  }
}
BENCHMARK(BM_ResolvedColumn)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
