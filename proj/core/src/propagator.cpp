#include "semikernel/propagator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <random>

#include "fft.hpp"
#include "semikernel/error.hpp"
#include "semikernel/parallel.hpp"
#include "semikernel/wavepacket.hpp"

namespace semikernel {
namespace {

cplx unit_phase(double theta) { return {std::cos(theta), std::sin(theta)}; }

// Angular wavenumber of FFT bin m on a cell of length 2L.
double wavenumber(std::size_t m, std::size_t n, double half_len) {
  const double k0 = kPi / half_len;
  const auto sm = static_cast<std::ptrdiff_t>(m);
  const auto sn = static_cast<std::ptrdiff_t>(n);
  return k0 * static_cast<double>(m < n / 2 ? sm : sm - sn);
}

// Strang stepper on a fixed grid. Kinetic factor carries the 1/N of the
// inverse transform.
class Stepper {
 public:
  Stepper(const PotentialModel& potential, const GridSpec& grid, double t, int steps)
      : potential_(potential), grid_(grid), fft_(grid.n_points), steps_(steps),
        tau_(t / steps), kinetic_(grid.n_points) {
    const std::size_t n = grid.n_points;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double k = wavenumber(m, n, grid.half_len);
      kinetic_[m] = unit_phase(-0.5 * tau_ * k * k) * inv_n;
    }
    if (!potential.time_dependent()) half_potential_ = potential_factor(0.0);
  }

  void run(std::vector<cplx>& u) const {
    std::vector<cplx> factor;
    for (int step = 0; step < steps_; ++step) {
      const std::vector<cplx>* half = &half_potential_;
      if (potential_.time_dependent()) {
        factor = potential_factor((step + 0.5) * tau_);
        half = &factor;
      }
      multiply(u, *half);
      fft_.forward(u.data());
      multiply(u, kinetic_);
      fft_.inverse(u.data());
      multiply(u, *half);
    }
  }

 private:
  std::vector<cplx> potential_factor(double s) const {
    std::vector<cplx> f(grid_.n_points);
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = unit_phase(-0.5 * tau_ * potential_(s, grid_.x(i)).v);
    }
    return f;
  }

  static void multiply(std::vector<cplx>& u, const std::vector<cplx>& f) {
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= f[i];
  }

  const PotentialModel& potential_;
  GridSpec grid_;
  detail::Fft fft_;
  int steps_;
  double tau_;
  std::vector<cplx> kinetic_;
  std::vector<cplx> half_potential_;
};

std::size_t resolve_end(std::size_t end, std::size_t n) { return end == 0 ? n : end; }

}  // namespace

std::size_t GridSpec::nearest(double x) const {
  const double r = std::round((x + half_len) / dx());
  const double hi = static_cast<double>(n_points - 1);
  return static_cast<std::size_t>(std::clamp(r, 0.0, hi));
}

void GridSpec::validate() const {
  if (!(half_len > 0.0) || !std::isfinite(half_len)) {
    throw Error(ErrorCode::invalid_argument, "grid half length must be positive");
  }
  if (n_points < 4 || !std::has_single_bit(n_points)) {
    throw Error(ErrorCode::invalid_argument, "grid size must be a power of two >= 4");
  }
}

double WaveFunction::norm() const { return l2_norm(values, grid.dx()); }

WaveFunction sample(const GridSpec& grid, const std::function<cplx(double)>& f) {
  grid.validate();
  WaveFunction u{grid, std::vector<cplx>(grid.n_points)};
  for (std::size_t i = 0; i < grid.n_points; ++i) u.values[i] = f(grid.x(i));
  return u;
}

double boundary_mass(const WaveFunction& u, double band) {
  double mass = 0.0;
  const double dx = u.grid.dx();
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double x = u.grid.x(i);
    if (x < -u.grid.half_len + band || x >= u.grid.half_len - band) {
      mass += std::norm(u.values[i]);
    }
  }
  return mass * dx;
}

WaveFunction split_step(const PotentialModel& potential, const WaveFunction& u0,
                        double t, int steps, SplitStepDiagnostics* diagnostics) {
  u0.grid.validate();
  if (u0.values.size() != u0.grid.n_points) {
    throw Error(ErrorCode::invalid_argument, "wave function size does not match its grid");
  }
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::invalid_argument, "split_step needs t >= 0");
  }
  if (steps < 1) throw Error(ErrorCode::invalid_argument, "split_step needs steps >= 1");
  WaveFunction u = u0;
  if (t > 0.0) Stepper(potential, u.grid, t, steps).run(u.values);
  for (const cplx& v : u.values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error(ErrorCode::non_finite, "split_step produced a non-finite value");
    }
  }
  if (diagnostics != nullptr) {
    diagnostics->boundary_mass = boundary_mass(u, u.grid.half_len / 8.0);
    diagnostics->boundary_leak = diagnostics->boundary_mass > 1e-10;
  }
  return u;
}

cplx exact_kernel(ExactKernelKind kind, double t, double x, double y, double field) {
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "exact kernel needs t > 0");
  const cplx branch = unit_phase(-kPi / 4.0);
  switch (kind) {
    case ExactKernelKind::free: {
      const double d = x - y;
      return branch / std::sqrt(2.0 * kPi * t) * unit_phase(d * d / (2.0 * t));
    }
    case ExactKernelKind::stark: {
      const double d = x - y;
      const double s = d * d / (2.0 * t) - t * field * (x + y) / 2.0 -
                       field * field * t * t * t / 24.0;
      return branch / std::sqrt(2.0 * kPi * t) * unit_phase(s);
    }
    case ExactKernelKind::harmonic: {
      if (t >= kPi) {
        throw Error(ErrorCode::conjugate_point, "Mehler kernel needs t < pi");
      }
      const double sn = std::sin(t);
      const double s = ((x * x + y * y) * std::cos(t) - 2.0 * x * y) / (2.0 * sn);
      return branch / std::sqrt(2.0 * kPi * sn) * unit_phase(s);
    }
  }
  return {};
}

std::optional<ExactKernelKind> exact_kernel_kind(const PotentialModel& potential) {
  const std::string& id = potential.id();
  if (id == "free") return ExactKernelKind::free;
  if (id == "harmonic") return ExactKernelKind::harmonic;
  if (id.starts_with("stark")) return ExactKernelKind::stark;
  return std::nullopt;
}

std::pair<std::size_t, std::size_t> central_range(const GridSpec& grid, double half_width) {
  const double dx = grid.dx();
  const double slack = 1e-9 * dx;
  const double lo = std::ceil((grid.half_len - half_width - slack) / dx);
  const double hi = std::floor((grid.half_len + half_width + slack) / dx);
  const double n = static_cast<double>(grid.n_points);
  const auto b = static_cast<std::size_t>(std::clamp(lo, 0.0, n));
  const auto e = static_cast<std::size_t>(std::clamp(hi + 1.0, 0.0, n));
  return {b, std::max(b, e)};
}

KernelMatrix numeric_kernel_matrix(const PotentialModel& potential, double t,
                                   const GridSpec& grid, int steps,
                                   const KernelOptions& options) {
  grid.validate();
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::invalid_argument, "kernel needs t > 0");
  }
  if (steps < 1) throw Error(ErrorCode::invalid_argument, "kernel needs steps >= 1");
  const std::size_t n = grid.n_points;
  const std::size_t rb = options.row_begin;
  const std::size_t re = resolve_end(options.row_end, n);
  const std::size_t cb = options.col_begin;
  const std::size_t ce = resolve_end(options.col_end, n);
  if (rb >= re || re > n || cb >= ce || ce > n) {
    throw Error(ErrorCode::invalid_argument, "kernel block out of range");
  }

  KernelMatrix k;
  k.grid = grid;
  k.t = t;
  k.row_begin = rb;
  k.col_begin = cb;
  k.rows = re - rb;
  k.cols = ce - cb;
  k.entries.assign(k.rows * k.cols, cplx{});
  const double dx = grid.dx();

  if (options.mode == KernelMode::discrete_delta) {
    const Stepper stepper(potential, grid, t, steps);
    parallel_for(k.cols, [&](std::size_t j) {
      std::vector<cplx> u(n);
      u[cb + j] = 1.0 / dx;
      stepper.run(u);
      for (std::size_t i = 0; i < k.rows; ++i) k(i, j) = u[rb + i];
    });
    return k;
  }

  // Resolved mode: the taper passes every momentum that joins a column to a
  // row, with a margin of several packet spreads, and the oversampled grid
  // carries the taper band plus the dispersive front without wrap-around.
  const double x_lo = grid.x(rb);
  const double x_hi = grid.x(re - 1);
  const double y_lo = grid.x(cb);
  const double y_hi = grid.x(ce - 1);
  const double reach = std::max(x_hi - y_lo, y_hi - x_lo);
  double force = 0.0;
  for (double s : {0.0, 0.5 * t, t}) {
    for (int q = 0; q <= 64; ++q) {
      const double x = std::min(x_lo, y_lo) +
                       (std::max(x_hi, y_hi) - std::min(x_lo, y_lo)) * q / 64.0;
      force = std::max(force, std::abs(potential(s, x).grad));
    }
  }
  const double spread = std::sqrt(2.0 * t);
  const double width = 1.0 / std::sqrt(t);
  const double k1 = (reach + force * t + 7.0 * spread) / t;
  const double k2 = k1 + 7.0 * width;

  GridSpec fine = grid;
  while (2.0 * fine.half_len < reach + t * k2 + 7.0 * spread) fine.half_len *= 2.0;
  const std::size_t scale = static_cast<std::size_t>(std::lround(fine.half_len / grid.half_len));
  fine.n_points = n * scale;
  while (kPi / fine.dx() < k2 + 10.0) fine.n_points *= 2;
  const std::size_t ratio = fine.n_points / (n * scale);  // fine steps per coarse step
  const std::size_t offset = (scale - 1) * n / 2 * ratio;  // fine index of x_0

  const std::size_t nf = fine.n_points;
  std::vector<double> taper(nf);
  std::vector<double> kf(nf);
  for (std::size_t m = 0; m < nf; ++m) {
    kf[m] = wavenumber(m, nf, fine.half_len);
    taper[m] = 0.5 * std::erfc((std::abs(kf[m]) - k1) / width);
  }
  const Stepper stepper(potential, fine, t, steps);
  const detail::Fft fft(nf);
  const double norm = 1.0 / (static_cast<double>(nf) * fine.dx());
  parallel_for(k.cols, [&](std::size_t j) {
    const double shift = grid.x(cb + j) - fine.x(0);
    std::vector<cplx> u(nf);
    for (std::size_t m = 0; m < nf; ++m) u[m] = taper[m] * unit_phase(-kf[m] * shift) * norm;
    fft.inverse(u.data());
    stepper.run(u);
    for (std::size_t i = 0; i < k.rows; ++i) k(i, j) = u[offset + (rb + i) * ratio];
  });
  return k;
}

double op_norm(const MatrixView& a, const PowerIterationOptions& options) {
  if (a.rows == 0 || a.cols == 0) return 0.0;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  std::vector<cplx> v(a.cols);
  for (cplx& c : v) c = {normal(rng), normal(rng)};
  std::vector<cplx> w(a.rows);

  auto normalize = [](std::vector<cplx>& x) {
    const double nrm = l2_norm(x, 1.0);
    if (nrm > 0.0) {
      for (cplx& c : x) c /= nrm;
    }
    return nrm;
  };
  normalize(v);
  double sigma = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    for (std::size_t i = 0; i < a.rows; ++i) {
      const cplx* row = a.data + i * a.cols;
      cplx acc = 0.0;
      for (std::size_t j = 0; j < a.cols; ++j) acc += row[j] * v[j];
      w[i] = acc;
    }
    const double next = l2_norm(w, 1.0);
    std::fill(v.begin(), v.end(), cplx{});
    for (std::size_t i = 0; i < a.rows; ++i) {
      const cplx* row = a.data + i * a.cols;
      const cplx wi = w[i];
      for (std::size_t j = 0; j < a.cols; ++j) v[j] += std::conj(row[j]) * wi;
    }
    if (normalize(v) == 0.0) return 0.0;
    const bool done = it > 0 && std::abs(next - sigma) <= options.rel_tol * next;
    sigma = next;
    if (done) break;
  }
  return sigma * std::abs(a.weight);
}

double op_norm(const KernelMatrix& kernel, const PowerIterationOptions& options) {
  return op_norm(MatrixView{kernel.entries.data(), kernel.rows, kernel.cols, kernel.grid.dx()},
                 options);
}

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(bytes, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  char bytes[sizeof(T)];
  in.read(bytes, sizeof(T));
  if (!in) throw Error(ErrorCode::io, "truncated kernel file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr char kMagic[4] = {'S', 'K', 'K', 'M'};

}  // namespace

void write_kernel_binary(const KernelMatrix& kernel, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put<std::uint32_t>(out, 1);
  put<std::uint64_t>(out, kernel.rows);
  put<std::uint64_t>(out, kernel.cols);
  put<std::uint64_t>(out, kernel.grid.n_points);
  put<double>(out, kernel.grid.half_len);
  put<double>(out, kernel.t);
  put<std::uint64_t>(out, kernel.row_begin);
  put<std::uint64_t>(out, kernel.col_begin);
  for (const cplx& c : kernel.entries) {
    put<float>(out, static_cast<float>(c.real()));
    put<float>(out, static_cast<float>(c.imag()));
  }
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

KernelMatrix read_kernel_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kMagic)) {
    throw Error(ErrorCode::io, path.string() + " is not a kernel file");
  }
  if (get<std::uint32_t>(in) != 1) {
    throw Error(ErrorCode::io, path.string() + ": unsupported kernel file version");
  }
  KernelMatrix k;
  k.rows = get<std::uint64_t>(in);
  k.cols = get<std::uint64_t>(in);
  k.grid.n_points = get<std::uint64_t>(in);
  k.grid.half_len = get<double>(in);
  k.t = get<double>(in);
  k.row_begin = get<std::uint64_t>(in);
  k.col_begin = get<std::uint64_t>(in);
  if (k.row_begin + k.rows > k.grid.n_points || k.col_begin + k.cols > k.grid.n_points) {
    throw Error(ErrorCode::io, path.string() + ": block exceeds the grid");
  }
  k.entries.resize(k.rows * k.cols);
  for (cplx& c : k.entries) {
    const float re = get<float>(in);
    const float im = get<float>(in);
    c = {re, im};
  }
  return k;
}

void write_kernel_csv_slice(const KernelMatrix& kernel, double y,
                            const std::filesystem::path& path) {
  const std::size_t col = kernel.grid.nearest(y);
  if (col < kernel.col_begin || col >= kernel.col_begin + kernel.cols) {
    throw Error(ErrorCode::invalid_argument, "slice position outside the kernel block");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out << std::setprecision(17) << "x,re,im,abs\n";
  for (std::size_t i = 0; i < kernel.rows; ++i) {
    const cplx v = kernel(i, col - kernel.col_begin);
    out << kernel.grid.x(kernel.row_begin + i) << ',' << v.real() << ',' << v.imag() << ','
        << std::abs(v) << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

}  // namespace semikernel
