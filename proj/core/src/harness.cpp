#include "semikernel/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "semikernel/classical.hpp"
#include "semikernel/error.hpp"

namespace semikernel {
namespace {

using nlohmann::json;

std::vector<double> points(double lo, double hi, int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "window needs at least one point");
  if (n == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::invalid_argument, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

json config_json_value(const ExperimentConfig& c) {
  json j;
  j["potential"] = c.potential;
  j["t_values"] = c.t_values;
  j["window"] = {{"x0", c.window.x0}, {"x1", c.window.x1}, {"nx", c.window.nx},
                 {"y0", c.window.y0}, {"y1", c.window.y1}, {"ny", c.window.ny}};
  j["grid"] = {{"n", c.grid.n_points}, {"l", c.grid.half_len}};
  j["quad"] = {{"nodes_x", c.quad.nodes_x},
               {"nodes_xi", c.quad.nodes_xi},
               {"trunc_sigma", c.quad.trunc_sigma}};
  if (c.eps_rule.sqrt_t) {
    j["eps_rule"] = "sqrt_t";
  } else {
    j["eps_rule"] = c.eps_rule.fixed;
  }
  j["steps"] = c.steps;
  j["out_dir"] = c.out_dir.generic_string();
  j["remainder_t_values"] = c.remainder_ladder();
  j["remainder_block"] = c.remainder_block;
  return j;
}

RateReport finish(RateReport report, double exact_threshold) {
  std::vector<RateRow> good;
  for (const RateRow& r : report.rows) {
    if (r.ok && r.err > 0.0 && std::isfinite(r.err)) good.push_back(r);
  }
  const bool all_ok = good.size() == report.rows.size();
  report.exact = all_ok && !good.empty() &&
                 std::all_of(good.begin(), good.end(),
                             [&](const RateRow& r) { return r.err <= exact_threshold; });
  if (!report.exact && good.size() >= 3) report.fit = fit_rate(good);
  return report;
}

}  // namespace

std::vector<double> SampleWindow::xs() const { return points(x0, x1, nx); }
std::vector<double> SampleWindow::ys() const { return points(y0, y1, ny); }

double EpsRule::eps(double t) const { return sqrt_t ? std::sqrt(t) : fixed; }

std::string EpsRule::to_string() const { return sqrt_t ? "sqrt_t" : format_double(fixed); }

EpsRule EpsRule::parse(const std::string& text) {
  if (text == "sqrt_t") return {};
  const double v = parse_double(text);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::invalid_argument, "eps must be positive or 'sqrt_t'");
  }
  return {false, v};
}

void ExperimentConfig::validate() const {
  const PotentialModel pot = parse_potential(potential);
  if (t_values.size() < 4) {
    throw Error(ErrorCode::invalid_argument, "t_values needs at least 4 entries");
  }
  const double horizon = safe_horizon(pot);
  for (std::size_t i = 0; i < t_values.size(); ++i) {
    const double t = t_values[i];
    if (!(t > 0.0) || !(t < horizon)) {
      throw Error(ErrorCode::horizon_exceeded,
                  "t = " + format_double(t) + " is outside (0, safe horizon)");
    }
    if (i > 0 && !(t < t_values[i - 1])) {
      throw Error(ErrorCode::invalid_argument, "t_values must be strictly decreasing");
    }
  }
  for (double t : remainder_t_values) {
    if (!(t > 0.0) || !(t < horizon)) {
      throw Error(ErrorCode::horizon_exceeded,
                  "remainder t = " + format_double(t) + " is outside (0, safe horizon)");
    }
  }
  if (window.nx < 1 || window.ny < 1) {
    throw Error(ErrorCode::invalid_argument, "window needs nx, ny >= 1");
  }
  grid.validate();
  quad.validate();
  if (steps < 1) throw Error(ErrorCode::invalid_argument, "steps must be >= 1");
  if (!eps_rule.sqrt_t && !(eps_rule.fixed > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "fixed eps must be positive");
  }
  if (!(remainder_block > 0.0) || remainder_block >= grid.half_len) {
    throw Error(ErrorCode::invalid_argument, "remainder block must lie inside the grid");
  }
}

std::vector<double> ExperimentConfig::remainder_ladder() const {
  if (!remainder_t_values.empty()) return remainder_t_values;
  std::vector<double> out;
  for (double t : t_values) {
    if (t >= 0.04 - 1e-12) out.push_back(t);
  }
  return out;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
  }
  ExperimentConfig c;
  try {
    c.potential = j.value("potential", c.potential);
    c.t_values = j.value("t_values", c.t_values);
    if (j.contains("window")) {
      const json& w = j["window"];
      c.window.x0 = w.value("x0", c.window.x0);
      c.window.x1 = w.value("x1", c.window.x1);
      c.window.nx = w.value("nx", c.window.nx);
      c.window.y0 = w.value("y0", c.window.y0);
      c.window.y1 = w.value("y1", c.window.y1);
      c.window.ny = w.value("ny", c.window.ny);
    }
    if (j.contains("grid")) {
      c.grid.n_points = j["grid"].value("n", c.grid.n_points);
      c.grid.half_len = j["grid"].value("l", c.grid.half_len);
    }
    if (j.contains("quad")) {
      const json& q = j["quad"];
      c.quad.nodes_x = q.value("nodes_x", c.quad.nodes_x);
      c.quad.nodes_xi = q.value("nodes_xi", c.quad.nodes_xi);
      c.quad.trunc_sigma = q.value("trunc_sigma", c.quad.trunc_sigma);
    }
    if (j.contains("eps_rule")) {
      const json& e = j["eps_rule"];
      c.eps_rule = e.is_string() ? EpsRule::parse(e.get<std::string>())
                                 : EpsRule::parse(format_double(e.get<double>()));
    }
    c.steps = j.value("steps", c.steps);
    c.out_dir = j.value("out_dir", c.out_dir.string());
    c.remainder_t_values = j.value("remainder_t_values", c.remainder_t_values);
    c.remainder_block = j.value("remainder_block", c.remainder_block);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
  }
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& config) {
  return config_json_value(config).dump(2);
}

RateFit fit_rate(std::span<const RateRow> pts) {
  if (pts.size() < 3) throw Error(ErrorCode::degenerate_fit, "rate fit needs >= 3 points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (const RateRow& p : pts) {
    if (!(p.t > 0.0) || !(p.err > 0.0) || !std::isfinite(p.err)) {
      throw Error(ErrorCode::degenerate_fit, "rate fit needs t > 0 and err > 0");
    }
    lx.push_back(std::log(p.t));
    ly.push_back(std::log(p.err));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = pairwise_sum(lx) / n;
  const double my = pairwise_sum(ly) / n;
  std::vector<double> sxx(lx.size());
  std::vector<double> sxy(lx.size());
  std::vector<double> syy(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx[i] = (lx[i] - mx) * (lx[i] - mx);
    sxy[i] = (lx[i] - mx) * (ly[i] - my);
    syy[i] = (ly[i] - my) * (ly[i] - my);
  }
  const double s_xx = pairwise_sum(sxx);
  if (!(s_xx > 0.0)) throw Error(ErrorCode::degenerate_fit, "all t values are equal");
  RateFit fit;
  fit.slope = pairwise_sum(sxy) / s_xx;
  fit.intercept = my - fit.slope * mx;
  std::vector<double> res(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    res[i] = e * e;
  }
  const double s_yy = pairwise_sum(syy);
  fit.r2 = s_yy > 0.0 ? 1.0 - pairwise_sum(res) / s_yy : 1.0;
  return fit;
}

RateReport amplitude_rate_experiment(const ExperimentConfig& config) {
  config.validate();
  const PotentialModel pot = parse_potential(config.potential);
  const std::vector<double> xs = config.window.xs();
  const std::vector<double> ys = config.window.ys();
  RateReport report;
  report.name = "amplitude";
  report.config_json = config_to_json(config);
  report.notes = "err = max over the window of |a0 - 1|, eps rule " +
                 config.eps_rule.to_string();
  for (double t : config.t_values) {
    RateRow row;
    row.t = t;
    try {
      const auto samples =
          amplitude_window(pot, t, config.eps_rule.eps(t), config.quad, xs, ys);
      double err = 0.0;
      for (const AmplitudeSample& s : samples) err = std::max(err, std::abs(s.a0 - 1.0));
      row.err = err;
    } catch (const Error& e) {
      row.ok = false;
      row.err = std::numeric_limits<double>::quiet_NaN();
      row.note = std::string(to_string(e.code())) + ": " + e.what();
    }
    report.rows.push_back(row);
  }
  return finish(std::move(report), kAmplitudeExactThreshold);
}

GridSpec remainder_grid(const ExperimentConfig& config, double t) {
  GridSpec g = config.grid;
  const double reach = 2.0 * config.remainder_block;
  while (g.dx() > kPi * t / reach * (1.0 + 1e-9)) g.n_points *= 2;
  return g;
}

RateReport remainder_rate_experiment(const ExperimentConfig& config) {
  config.validate();
  const PotentialModel pot = parse_potential(config.potential);
  RateReport report;
  report.name = "remainder";
  report.config_json = config_to_json(config);
  report.notes =
      "err = dx-weighted operator norm of (E_num - E0) on |x|, |y| <= " +
      format_double(config.remainder_block) +
      "; a sub-block norm bounds the global operator norm from below";
  for (double t : config.remainder_ladder()) {
    RateRow row;
    row.t = t;
    try {
      const GridSpec grid = remainder_grid(config, t);
      const auto [b, e] = central_range(grid, config.remainder_block);
      KernelOptions opts;
      opts.mode = KernelMode::resolved;
      opts.row_begin = opts.col_begin = b;
      opts.row_end = opts.col_end = e;
      KernelMatrix diff = numeric_kernel_matrix(pot, t, grid, config.steps, opts);
      std::vector<double> pos(e - b);
      for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = grid.x(b + i);
      const double eps = config.eps_rule.eps(t);
      const OrbitTable table = build_orbit_table(pot, t, eps, config.quad,
                                                 {pos.front(), pos.back(), pos.front(),
                                                  pos.back()});
      const std::vector<cplx> par = e0_block(table, pos, pos);
      for (std::size_t k = 0; k < par.size(); ++k) diff.entries[k] -= par[k];
      row.err = op_norm(diff);
      row.note = "N=" + std::to_string(grid.n_points);
    } catch (const Error& e) {
      row.ok = false;
      row.err = std::numeric_limits<double>::quiet_NaN();
      row.note = std::string(to_string(e.code())) + ": " + e.what();
    }
    report.rows.push_back(row);
  }
  return finish(std::move(report), kRemainderExactThreshold);
}

void emit_report(const RateReport& report, const std::filesystem::path& dir) {
  if (report.rows.empty()) throw Error(ErrorCode::degenerate_fit, "report has no rows");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());

  std::ostringstream csv;
  csv << "t,err\n";
  for (const RateRow& r : report.rows) csv << format_double(r.t) << ',' << format_double(r.err) << '\n';

  json j;
  j["name"] = report.name;
  j["exact"] = report.exact;
  if (report.fit) {
    j["slope"] = report.fit->slope;
    j["intercept"] = report.fit->intercept;
    j["r2"] = report.fit->r2;
  } else {
    j["slope"] = nullptr;
    j["intercept"] = nullptr;
    j["r2"] = nullptr;
  }
  j["config"] = report.config_json.empty() ? json::object() : json::parse(report.config_json);
  json rows = json::array();
  for (const RateRow& r : report.rows) {
    json row = {{"t", r.t}, {"ok", r.ok}, {"note", r.note}};
    row["err"] = std::isfinite(r.err) ? json(r.err) : json(nullptr);
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["notes"] = report.notes;
  j["version"] = "semikernel 0.1.0";

  const auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open " + p.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::io, "write failed: " + p.string());
  };
  write(dir / (report.name + ".csv"), csv.str());
  write(dir / (report.name + ".json"), j.dump(2) + "\n");
}

std::vector<RateRow> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "t,err") {
    throw Error(ErrorCode::io, path.string() + ": missing 't,err' header");
  }
  std::vector<RateRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::io, path.string() + ": bad row");
    RateRow r;
    r.t = parse_double(std::string_view(line).substr(0, comma));
    const std::string_view err = std::string_view(line).substr(comma + 1);
    r.err = err == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(err);
    r.ok = std::isfinite(r.err);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace semikernel
