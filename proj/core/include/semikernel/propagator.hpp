#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "semikernel/numerics.hpp"
#include "semikernel/potentials.hpp"

namespace semikernel {

/// Periodic grid x_i = -L + i dx, dx = 2L/N, N a power of two.
struct GridSpec {
  double half_len = 16.0;
  std::size_t n_points = 256;

  double dx() const { return 2.0 * half_len / static_cast<double>(n_points); }
  double x(std::size_t i) const { return -half_len + dx() * static_cast<double>(i); }
  UniformAxis axis() const { return {-half_len, dx(), n_points}; }
  /// Index of the grid point nearest to position x (clamped).
  std::size_t nearest(double x) const;
  /// Throws invalid_argument unless L > 0 and N is a power of two >= 4.
  void validate() const;
};

struct WaveFunction {
  GridSpec grid;
  std::vector<cplx> values;

  double norm() const;
};

WaveFunction sample(const GridSpec& grid, const std::function<cplx(double)>& f);

struct SplitStepDiagnostics {
  double boundary_mass = 0.0;  // squared L2 mass in the outer band, at t
  bool boundary_leak = false;  // boundary_mass > 1e-10
};

/// Strang splitting exp(-iV tau/2) exp(i tau Delta/2) exp(-iV tau/2) with
/// tau = t/steps; kinetic factor applied by FFT, V sampled at the midpoint
/// time of each step.
WaveFunction split_step(const PotentialModel& potential, const WaveFunction& u0,
                        double t, int steps, SplitStepDiagnostics* diagnostics = nullptr);

/// Squared L2 mass of u within `band` of either end of the periodic cell.
double boundary_mass(const WaveFunction& u, double band);

enum class ExactKernelKind { free, stark, harmonic };

/// Closed-form fundamental solutions with the principal branch of
/// (2 pi i t)^{-1/2} (resp. (2 pi i sin t)^{-1/2}). Harmonic requires t < pi.
cplx exact_kernel(ExactKernelKind kind, double t, double x, double y, double field = 0.0);

/// Kind of closed-form kernel available for a builtin (free/stark/harmonic).
std::optional<ExactKernelKind> exact_kernel_kind(const PotentialModel& potential);

/// Entries (i, j) ~ E(t, x_{row_begin + i}, y_{col_begin + j}), row-major.
struct KernelMatrix {
  GridSpec grid;
  double t = 0.0;
  std::size_t row_begin = 0;
  std::size_t col_begin = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cplx> entries;

  cplx operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
  cplx& operator()(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
};

enum class KernelMode {
  /// Column j propagates the grid delta e_j / dx: the discrete propagator,
  /// unitary on grid functions and consistent with split_step.
  discrete_delta,
  /// Column j propagates a spectrally tapered delta on an oversampled grid
  /// whose band covers every classical momentum joining the block, so the
  /// entries approximate pointwise values E(t, x_i, y_j).
  resolved,
};

struct KernelOptions {
  KernelMode mode = KernelMode::discrete_delta;
  /// Half-open index ranges [begin, end); empty end means the full grid.
  std::size_t row_begin = 0;
  std::size_t row_end = 0;
  std::size_t col_begin = 0;
  std::size_t col_end = 0;
};

/// Index range of grid points with |x| <= half_width.
std::pair<std::size_t, std::size_t> central_range(const GridSpec& grid, double half_width);

KernelMatrix numeric_kernel_matrix(const PotentialModel& potential, double t,
                                   const GridSpec& grid, int steps,
                                   const KernelOptions& options = {});

/// Dense row-major complex matrix view with a quadrature weight applied to
/// both the matrix and the inner products (dx for kernels, 1 for plain
/// matrices).
struct MatrixView {
  const cplx* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double weight = 1.0;
};

struct PowerIterationOptions {
  int max_iterations = 200;
  double rel_tol = 1e-10;
  unsigned seed = 12345;
};

/// Largest singular value of weight * A by power iteration on (wA)^* (wA).
double op_norm(const MatrixView& matrix, const PowerIterationOptions& options = {});

/// dx-weighted L2 -> L2 norm of the kernel block.
double op_norm(const KernelMatrix& kernel, const PowerIterationOptions& options = {});

/// Binary layout: "SKKM", u32 version = 1, u64 rows, u64 cols, u64 N,
/// f64 L, f64 t, u64 row_begin, u64 col_begin, then rows*cols pairs of
/// little-endian f32 (re, im), row-major.
void write_kernel_binary(const KernelMatrix& kernel, const std::filesystem::path& path);
KernelMatrix read_kernel_binary(const std::filesystem::path& path);

/// CSV columns x, re, im, abs of the column nearest to position y.
void write_kernel_csv_slice(const KernelMatrix& kernel, double y,
                            const std::filesystem::path& path);

}  // namespace semikernel
