#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semikernel/parametrix.hpp"
#include "semikernel/propagator.hpp"

namespace semikernel {

struct SampleWindow {
  double x0 = -1.0;
  double x1 = 1.0;
  int nx = 5;
  double y0 = -1.0;
  double y1 = 1.0;
  int ny = 5;

  std::vector<double> xs() const;
  std::vector<double> ys() const;
};

struct EpsRule {
  bool sqrt_t = true;
  double fixed = 0.0;

  double eps(double t) const;
  std::string to_string() const;
  /// "sqrt_t" or a positive float.
  static EpsRule parse(const std::string& text);
};

struct ExperimentConfig {
  std::string potential = "harmonic";
  std::vector<double> t_values{0.32, 0.16, 0.08, 0.04, 0.02};
  SampleWindow window;
  GridSpec grid{16.0, 256};
  QuadratureSpec quad;
  EpsRule eps_rule;
  int steps = 512;
  std::filesystem::path out_dir = "out";
  /// Remainder ladder; defaults to the t_values that are >= 0.04.
  std::vector<double> remainder_t_values;
  /// Half width of the central (x, y) block for the remainder norm.
  double remainder_block = 4.0;

  /// Checks the invariants (t < safe horizon, >= 4 t values, ...).
  void validate() const;
  std::vector<double> remainder_ladder() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

struct RateRow {
  double t = 0.0;
  double err = 0.0;
  bool ok = true;
  std::string note;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

struct RateReport {
  std::string name;
  std::vector<RateRow> rows;
  std::optional<RateFit> fit;
  bool exact = false;  // every err below the exactness threshold; no fit
  std::string config_json;
  std::string notes;
};

/// Ordinary least squares of log(err) on log(t).
RateFit fit_rate(std::span<const RateRow> points);

/// err(t) = max over the window of |a0 - 1| with eps from the config rule.
RateReport amplitude_rate_experiment(const ExperimentConfig& config);

/// err(t) = dx-weighted operator norm of (E_num - E0) on the central block.
RateReport remainder_rate_experiment(const ExperimentConfig& config);

/// Sampling grid for the remainder block at time t: the configured grid,
/// refined by powers of two until the kernel phase (|x - y| <= 2 block)/t
/// is resolved.
GridSpec remainder_grid(const ExperimentConfig& config, double t);

inline constexpr double kAmplitudeExactThreshold = 1e-5;
inline constexpr double kRemainderExactThreshold = 1e-4;
inline constexpr double kAmplitudeSlopeThreshold = 0.9;
inline constexpr double kRemainderSlopeThreshold = 1.8;

/// Writes <dir>/<name>.csv (t, err) and <dir>/<name>.json.
void emit_report(const RateReport& report, const std::filesystem::path& dir);

/// Parses the (t, err) rows of a CSV written by emit_report.
std::vector<RateRow> read_report_csv(const std::filesystem::path& path);

/// Entry point of the semikernel tool: 0 success, 1 failed thresholds or
/// checks, 2 usage error.
int cli_main(int argc, const char* const* argv);

}  // namespace semikernel
