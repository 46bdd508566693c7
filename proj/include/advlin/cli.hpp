#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "advlin/datagen.hpp"
#include "advlin/norms.hpp"

// Experiment driver, exposed as a library so the commands are testable
// without spawning processes.  Commands return tables or JSON strings; the
// thin binary in tools/ parses flags, writes files, and maps outcomes to
// exit codes (0 ok, 1 verify failure, 2 usage, 3 solver non-convergence).

namespace advlin::cli {

struct run_config {
  scenario_spec scenario;              // n, p, d, scales, seed, csv path/target
  std::string scenario_name = "gaussian";  // gaussian|latent|fourier|projection|csv
  norm_kind attack = norm_kind::linf;
  std::string method = "adv";          // adv|lasso|ridge|sqrt-lasso|min-norm
  double grid_min = 0.0;               // <= 0 means automatic anchoring
  double grid_max = 0.0;
  int grid_points = 0;                 // <= 0 means 48 per decade of span
  int repetitions = 5;
  double csv_split_fraction = 0.8;
};

// Column-named numeric table; metadata rides along so every emitted file is
// regenerable from its own header.
struct result_table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::string> metadata;
};

// Regularization path: one grid row per knob value (delta or lambda), with
// per-coefficient columns, the l1 norm, errors, and certificates.
result_table cmd_path(const run_config& cfg);

// Train/test error sweep over the knob grid with delta_bar and the zero
// threshold recorded in metadata.  Same row schema as cmd_path.
result_table cmd_sweep(const run_config& cfg);

// delta_bar, its singular-value bracket, and the reference radius
// 0.01*mean||x|| as a function of p at fixed n; medians over repetitions.
result_table cmd_threshold_curve(const run_config& cfg,
                                 const std::vector<Eigen::Index>& p_values);

// Best-tuned normalized test MSE per (method, tuning rule) pair, with the
// minimum-norm interpolators appended as untuned baselines.  Returns JSON.
std::string cmd_compare(
    const run_config& cfg,
    const std::vector<std::pair<std::string, std::string>>& methods);

struct verify_options {
  int trials = 3;                    // scales instance counts per property
  double delta_bar_scale = 1.0;      // test hook: misplace the transition
  std::uint64_t seed = 0;
};

struct verify_outcome {
  bool all_passed = false;
  std::string json;  // ledger with per-property pass flags and margins
};

// Runs the cross-module property suite (norm duality, closed-form attack
// identity, interpolation transition, threshold bracket, zero threshold,
// generator determinism, kernel agreement, solver certificates).
verify_outcome cmd_verify(const verify_options& opts);

// CSV with "# key=value" metadata comment lines, a header row, and one line
// per table row at full precision.
void write_csv(const result_table& table, std::ostream& out);

struct svg_options {
  std::string x_column;
  std::vector<std::string> y_columns;  // one polyline per entry
  std::string x_label;
  std::string y_label;
  std::string title;
  bool log_x = false;
  std::optional<double> vline;  // e.g. delta_bar marker
};

// Self-contained static SVG line plot of the selected table columns.
// Throws on an empty table, unknown columns, or log-x with nonpositive data.
std::string emit_svg(const result_table& table, const svg_options& opts);

}  // namespace advlin::cli
