#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "semikernel/classical.hpp"
#include "semikernel/error.hpp"
#include "semikernel/harness.hpp"
#include "semikernel/parallel.hpp"
#include "semikernel/wavepacket.hpp"

namespace semikernel {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Writes to `path` or stdout when empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
      if (!*file_) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
    }
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<double> split_numbers(const std::string& text, std::size_t expected,
                                  const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double d = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), d);
    if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
      throw CLI::ValidationError(what, "expected comma-separated numbers");
    }
    v.push_back(d);
  }
  if (v.size() != expected) {
    throw CLI::ValidationError(what, "expected " + std::to_string(expected) + " values");
  }
  return v;
}

int run_validate(const std::string& name) {
  const PotentialModel pot = parse_potential(name);
  const AssumptionReport r =
      check_assumption(pot, default_time_samples(), default_position_samples());
  std::cout << "potential       " << r.id << '\n'
            << "hess_bound      " << num(r.hess_bound) << '\n'
            << "max_abs_hess    " << num(r.max_abs_hess) << '\n'
            << "max_grad_error  " << num(r.max_grad_error) << '\n'
            << "samples         " << r.samples << '\n'
            << "safe_horizon    " << num(safe_horizon(pot)) << '\n'
            << "growth          " << (r.growth_ok ? "ok" : "FAIL") << '\n'
            << "consistency     " << (r.consistency_ok ? "ok" : "FAIL") << '\n';
  return r.pass() ? kExitOk : kExitFailed;
}

struct OrbitArgs {
  std::string potential = "harmonic";
  double t = 0.3;
  double x = 0.0;
  std::optional<double> y;
  std::optional<double> xi;
  int steps = 0;
  std::string out;
};

int run_orbit(const OrbitArgs& a) {
  const PotentialModel pot = parse_potential(a.potential);
  const int steps = a.steps > 0 ? a.steps : default_steps(a.t);
  Orbit orbit;
  if (a.y) {
    orbit = solve_bvp(pot, a.t, a.x, *a.y, 1e-12, steps).orbit;
  } else {
    orbit = flow_from_terminal(pot, a.t, a.x, *a.xi, steps);
  }
  Sink sink(a.out);
  std::ostream& out = sink.out();
  out << "s,x,xi,j\n";
  for (std::size_t k = 0; k < orbit.s.size(); ++k) {
    out << num(orbit.s[k]) << ',' << num(orbit.states[k].x) << ','
        << num(orbit.states[k].xi) << ',' << num(orbit.jac[k]) << '\n';
  }
  return kExitOk;
}

struct KernelArgs {
  std::string potential = "harmonic";
  double t = 0.3;
  std::size_t n = 256;
  double l = 16.0;
  int steps = 2048;
  std::string out;
  std::string mode = "discrete";
  double block = 0.0;
  std::optional<double> slice_y;
  std::string slice_out;
};

int run_kernel(const KernelArgs& a) {
  const PotentialModel pot = parse_potential(a.potential);
  const GridSpec grid{a.l, a.n};
  grid.validate();
  KernelOptions opts;
  opts.mode = a.mode == "resolved" ? KernelMode::resolved : KernelMode::discrete_delta;
  if (a.block > 0.0) {
    const auto [b, e] = central_range(grid, a.block);
    opts.row_begin = opts.col_begin = b;
    opts.row_end = opts.col_end = e;
  }
  const KernelMatrix k = numeric_kernel_matrix(pot, a.t, grid, a.steps, opts);
  write_kernel_binary(k, a.out);
  if (a.slice_y) {
    write_kernel_csv_slice(k, *a.slice_y, a.slice_out.empty() ? a.out + ".csv" : a.slice_out);
  }
  std::cerr << "kernel " << k.rows << "x" << k.cols << " written to " << a.out
            << ", dx-weighted norm " << num(op_norm(k)) << '\n';
  return kExitOk;
}

struct ParametrixArgs {
  std::string potential = "harmonic";
  double t = 0.1;
  std::string eps = "sqrt_t";
  double x = 0.0;
  double y = 0.0;
  std::string window;
  std::string quad_nodes;
  double trunc_sigma = 10.0;
  std::string out;
};

int run_parametrix(const ParametrixArgs& a) {
  const PotentialModel pot = parse_potential(a.potential);
  const double eps = EpsRule::parse(a.eps).eps(a.t);
  QuadratureSpec spec;
  spec.trunc_sigma = a.trunc_sigma;
  if (!a.quad_nodes.empty()) {
    const auto v = split_numbers(a.quad_nodes, 2, "--quad-nodes");
    spec.nodes_x = static_cast<int>(v[0]);
    spec.nodes_xi = static_cast<int>(v[1]);
  }
  std::vector<double> xs{a.x};
  std::vector<double> ys{a.y};
  if (!a.window.empty()) {
    const auto v = split_numbers(a.window, 6, "--window");
    SampleWindow w{v[0], v[1], static_cast<int>(v[2]), v[3], v[4], static_cast<int>(v[5])};
    xs = w.xs();
    ys = w.ys();
  }
  const auto samples = amplitude_window(pot, a.t, eps, spec, xs, ys);
  Sink sink(a.out);
  std::ostream& out = sink.out();
  out << "t,x,y,eps,re_e0,im_e0,s_action,re_a0,im_a0,abs_a0_minus_1\n";
  for (const AmplitudeSample& s : samples) {
    out << num(s.t) << ',' << num(s.x) << ',' << num(s.y) << ',' << num(s.eps) << ','
        << num(s.e0.real()) << ',' << num(s.e0.imag()) << ',' << num(s.s_action) << ','
        << num(s.a0.real()) << ',' << num(s.a0.imag()) << ',' << num(std::abs(s.a0 - 1.0))
        << '\n';
  }
  return kExitOk;
}

int run_keyest(const std::string& path) {
  Sink sink(path);
  std::ostream& out = sink.out();
  out << "alpha,t,eps,lhs_l1,rhs_l1,ratio_l1,lhs_l2,rhs_l2,ratio_l2\n";
  for (const KeyEstimate& k : key_estimate_sweep()) {
    out << k.alpha << ',' << num(k.t) << ',' << num(k.eps) << ',' << num(k.lhs_l1) << ','
        << num(k.rhs_l1) << ',' << num(k.ratio_l1()) << ',' << num(k.lhs_l2) << ','
        << num(k.rhs_l2) << ',' << num(k.ratio_l2()) << '\n';
  }
  return kExitOk;
}

void print_report(const RateReport& r) {
  std::cout << r.name << ":\n";
  for (const RateRow& row : r.rows) {
    std::cout << "  t=" << num(row.t) << "  err=" << num(row.err);
    if (!row.note.empty()) std::cout << "  (" << row.note << ")";
    std::cout << '\n';
  }
  if (r.exact) {
    std::cout << "  exact: every err below threshold\n";
  } else if (r.fit) {
    std::cout << "  slope=" << num(r.fit->slope) << " intercept=" << num(r.fit->intercept)
              << " r2=" << num(r.fit->r2) << '\n';
  } else {
    std::cout << "  no fit\n";
  }
}

bool meets(const RateReport& r, double slope) {
  for (const RateRow& row : r.rows) {
    if (!row.ok) return false;
  }
  return r.exact || (r.fit && r.fit->slope >= slope);
}

int run_rates(const std::string& config_path, const std::string& only,
              const std::string& out_dir) {
  ExperimentConfig config = load_config(config_path);
  if (!out_dir.empty()) config.out_dir = out_dir;
  bool ok = true;
  if (only.empty() || only == "amplitude") {
    const RateReport r = amplitude_rate_experiment(config);
    emit_report(r, config.out_dir);
    print_report(r);
    ok = meets(r, kAmplitudeSlopeThreshold) && ok;
  }
  if (only.empty() || only == "remainder") {
    const RateReport r = remainder_rate_experiment(config);
    emit_report(r, config.out_dir);
    print_report(r);
    ok = meets(r, kRemainderSlopeThreshold) && ok;
  }
  std::cout << "reports written to " << config.out_dir.string() << '\n';
  return ok ? kExitOk : kExitFailed;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Short-time propagator parametrix toolkit", "semikernel"};
  app.require_subcommand(1, 1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: SEMIKERNEL_THREADS or all cores)");

  std::string validate_potential = "harmonic";
  auto* validate = app.add_subcommand("validate", "Check the potential assumptions on samples");
  validate->add_option("--potential", validate_potential)->required();

  OrbitArgs orbit_args;
  auto* orbit = app.add_subcommand("orbit", "Classical orbit as CSV (s, x, xi, j)");
  orbit->add_option("--potential", orbit_args.potential)->required();
  orbit->add_option("--t", orbit_args.t)->required();
  orbit->add_option("--x", orbit_args.x)->required();
  auto* oy = orbit->add_option("--y", orbit_args.y, "Boundary value problem mode");
  auto* oxi = orbit->add_option("--xi", orbit_args.xi, "Terminal data mode");
  oy->excludes(oxi);
  orbit->add_option("--steps", orbit_args.steps);
  orbit->add_option("--out", orbit_args.out, "CSV path (default stdout)");

  KernelArgs kernel_args;
  auto* kernel = app.add_subcommand("kernel", "Numeric propagator kernel matrix");
  kernel->add_option("--potential", kernel_args.potential)->required();
  kernel->add_option("--t", kernel_args.t)->required();
  kernel->add_option("--grid-n", kernel_args.n);
  kernel->add_option("--grid-l", kernel_args.l);
  kernel->add_option("--steps", kernel_args.steps);
  kernel->add_option("--out", kernel_args.out)->required();
  kernel->add_option("--mode", kernel_args.mode)
      ->check(CLI::IsMember({"discrete", "resolved"}));
  kernel->add_option("--block", kernel_args.block, "Restrict to |x|, |y| <= block");
  kernel->add_option("--slice-y", kernel_args.slice_y, "Also export the column at y as CSV");
  kernel->add_option("--slice-out", kernel_args.slice_out);

  ParametrixArgs par_args;
  auto* par = app.add_subcommand("parametrix", "E0 and the amplitude a0 as CSV");
  par->add_option("--potential", par_args.potential)->required();
  par->add_option("--t", par_args.t)->required();
  par->add_option("--eps", par_args.eps, "float or sqrt_t");
  par->add_option("--x", par_args.x);
  par->add_option("--y", par_args.y);
  par->add_option("--window", par_args.window, "x0,x1,nx,y0,y1,ny");
  par->add_option("--quad-nodes", par_args.quad_nodes, "nodes_x,nodes_xi");
  par->add_option("--trunc-sigma", par_args.trunc_sigma);
  par->add_option("--out", par_args.out, "CSV path (default stdout)");

  std::string keyest_out;
  auto* keyest = app.add_subcommand("keyest", "Gaussian moment bounds sweep as CSV");
  keyest->add_option("--out", keyest_out, "CSV path (default stdout)");

  std::string config_path;
  std::string only;
  std::string out_dir;
  auto* rates = app.add_subcommand("rates", "Amplitude and remainder rate experiments");
  rates->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  rates->add_option("--only", only)->check(CLI::IsMember({"amplitude", "remainder"}));
  rates->add_option("--out-dir", out_dir, "Override the configured output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }
  if (*orbit && !orbit_args.y && !orbit_args.xi) {
    std::cerr << "orbit: one of --y or --xi is required\n" << orbit->help();
    return kExitUsage;
  }
  if (threads > 0) set_thread_count(threads);

  try {
    if (*validate) return run_validate(validate_potential);
    if (*orbit) return run_orbit(orbit_args);
    if (*kernel) return run_kernel(kernel_args);
    if (*par) return run_parametrix(par_args);
    if (*keyest) return run_keyest(keyest_out);
    if (*rates) return run_rates(config_path, only, out_dir);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    const bool usage = e.code() == ErrorCode::invalid_argument ||
                       e.code() == ErrorCode::unknown_potential;
    return usage ? kExitUsage : kExitFailed;
  }
  return kExitUsage;
}

}  // namespace semikernel
