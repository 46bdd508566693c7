#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "advlin/cli.hpp"
#include "advlin/version.hpp"

// Thin flag-parsing shell over the command library.  Exit codes: 0 success,
// 1 verify failure, 2 usage error, 3 solver non-convergence (outputs are
// still written in that case).

namespace {

struct flags {
  std::string scenario = "gaussian";
  std::string csv, target;
  std::string method = "adv";
  std::string attack = "linf";
  std::string out, svg;
  long long n = 60, p = 200, d = 1, n_test = 10000;
  double sigma = 1.0, r = 1.0, sigma_w = 0.01;
  std::uint64_t seed = 0;
  bool sparse_truth = false;
  double grid_min = 0.0, grid_max = 0.0;
  int grid_points = 0;
  int repetitions = 5;
  double fraction = 0.8;
};

void add_common(CLI::App* sub, flags& f) {
  sub->add_option("--scenario", f.scenario, "data source")
      ->check(CLI::IsMember({"gaussian", "latent", "fourier", "projection",
                             "csv"}));
  sub->add_option("--csv", f.csv, "CSV path (csv/fourier scenarios)");
  sub->add_option("--target", f.target, "CSV target column name");
  sub->add_option("--n", f.n, "training rows");
  sub->add_option("--p", f.p, "features");
  sub->add_option("--d", f.d, "latent / ambient input dimension");
  sub->add_option("--n-test", f.n_test, "synthetic test rows");
  sub->add_option("--sigma", f.sigma, "noise scale");
  sub->add_option("--r", f.r, "covariate scale");
  sub->add_option("--sigma-w", f.sigma_w, "feature-map scale");
  sub->add_flag("--sparse-truth", f.sparse_truth, "5-sparse +-1 ground truth");
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_option("--attack", f.attack, "attack norm")
      ->check(CLI::IsMember({"l2", "linf"}));
  sub->add_option("--method", f.method, "estimator")
      ->check(CLI::IsMember({"adv", "lasso", "ridge", "sqrt-lasso",
                             "min-norm"}));
  sub->add_option("--grid-min", f.grid_min, "grid lower end (0 = auto)");
  sub->add_option("--grid-max", f.grid_max, "grid upper end (0 = auto)");
  sub->add_option("--grid-points", f.grid_points, "grid size (0 = auto)");
  sub->add_option("--repetitions", f.repetitions, "repeats for aggregation");
  sub->add_option("--fraction", f.fraction, "train share for csv scenario");
  sub->add_option("--out", f.out, "output file (default stdout)");
  sub->add_option("--svg", f.svg, "also render an SVG plot to this path");
}

advlin::cli::run_config to_config(const flags& f) {
  advlin::cli::run_config cfg;
  cfg.scenario.n = f.n;
  cfg.scenario.p = f.p;
  cfg.scenario.d = f.d;
  cfg.scenario.n_test = f.n_test;
  cfg.scenario.sigma = f.sigma;
  cfg.scenario.r = f.r;
  cfg.scenario.sigma_w = f.sigma_w;
  cfg.scenario.sparse_truth = f.sparse_truth;
  cfg.scenario.seed = f.seed;
  cfg.scenario.path = f.csv;
  cfg.scenario.target = f.target;
  cfg.scenario_name = f.scenario;
  cfg.method = f.method;
  cfg.attack = f.attack == "l2" ? advlin::norm_kind::l2
                                : advlin::norm_kind::linf;
  cfg.grid_min = f.grid_min;
  cfg.grid_max = f.grid_max;
  cfg.grid_points = f.grid_points;
  cfg.repetitions = f.repetitions;
  cfg.csv_split_fraction = f.fraction;
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_table(const advlin::cli::result_table& t, const std::string& path) {
  if (path.empty()) {
    advlin::cli::write_csv(t, std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  advlin::cli::write_csv(t, out);
}

std::optional<double> meta_double(const advlin::cli::result_table& t,
                                  const std::string& key) {
  const auto it = t.metadata.find(key);
  if (it == t.metadata.end()) return std::nullopt;
  try {
    const double v = std::stod(it->second);
    if (std::isfinite(v)) return v;
  } catch (...) {
  }
  return std::nullopt;
}

void maybe_svg(const advlin::cli::result_table& t, const flags& f,
               bool sweep_style) {
  if (f.svg.empty()) return;
  advlin::cli::svg_options so;
  so.x_column = "knob";
  so.log_x = true;
  so.vline = meta_double(t, "delta_bar");
  if (sweep_style) {
    so.y_columns = {"train_mse", "test_mse", "adv_test_mse"};
    so.y_label = "mean squared error";
    so.title = "error sweep (" + t.metadata.at("method") + ", " +
               t.metadata.at("attack") + " attack)";
  } else {
    // the handful of coefficients with the largest excursions
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& col : t.columns) {
      if (col.rfind("coef_", 0) != 0) continue;
      std::size_t idx = 0;
      for (; idx < t.columns.size(); ++idx)
        if (t.columns[idx] == col) break;
      double mx = 0.0;
      for (const auto& row : t.rows) mx = std::max(mx, std::abs(row[idx]));
      ranked.emplace_back(mx, col);
    }
    std::sort(ranked.rbegin(), ranked.rend());
    for (std::size_t i = 0; i < ranked.size() && i < 10; ++i)
      so.y_columns.push_back(ranked[i].second);
    so.y_label = "coefficient";
    so.title = "regularization path (" + t.metadata.at("method") + ")";
  }
  so.x_label = t.metadata.at("method") == "adv" ? "delta" : "lambda";
  write_text(f.svg, advlin::cli::emit_svg(t, so));
}

int nonconverged_exit(const advlin::cli::result_table& t) {
  const auto it = t.metadata.find("nonconverged_rows");
  if (it != t.metadata.end() && it->second != "0") return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarially trained linear models: experiment driver"};
  app.set_version_flag("--version", advlin::version_string);
  app.require_subcommand(1);

  flags f;
  std::vector<long long> p_list;
  std::vector<std::string> methods{"adv", "lasso", "ridge", "sqrt-lasso"};
  std::vector<std::string> tunings{"grid"};
  int trials = 3;
  double perturb = 1.0;

  auto* path_cmd = app.add_subcommand("path", "regularization path table");
  add_common(path_cmd, f);
  auto* sweep_cmd = app.add_subcommand("sweep", "train/test error sweep");
  add_common(sweep_cmd, f);
  auto* curve_cmd =
      app.add_subcommand("threshold-curve", "delta_bar as a function of p");
  add_common(curve_cmd, f);
  curve_cmd
      ->add_option("--p-list", p_list, "feature counts, comma separated")
      ->delimiter(',')
      ->required();
  auto* compare_cmd =
      app.add_subcommand("compare", "best-tuned test NMSE per method");
  add_common(compare_cmd, f);
  compare_cmd->add_option("--methods", methods, "methods, comma separated")
      ->delimiter(',');
  compare_cmd
      ->add_option("--tunings", tunings,
                   "tuning rule per method (grid|cv|heuristic|pivotal); a "
                   "single value applies to all")
      ->delimiter(',');
  auto* verify_cmd =
      app.add_subcommand("verify", "cross-module property suite");
  add_common(verify_cmd, f);
  verify_cmd->add_option("--trials", trials, "property trial multiplier");
  verify_cmd->add_option(
      "--perturb-delta-bar", perturb,
      "test hook: scale the transition location (fails the suite when far "
      "from 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (path_cmd->parsed()) {
      const auto t = advlin::cli::cmd_path(to_config(f));
      write_table(t, f.out);
      maybe_svg(t, f, false);
      return nonconverged_exit(t);
    }
    if (sweep_cmd->parsed()) {
      const auto t = advlin::cli::cmd_sweep(to_config(f));
      write_table(t, f.out);
      maybe_svg(t, f, true);
      return nonconverged_exit(t);
    }
    if (curve_cmd->parsed()) {
      std::vector<Eigen::Index> ps(p_list.begin(), p_list.end());
      const auto t = advlin::cli::cmd_threshold_curve(to_config(f), ps);
      write_table(t, f.out);
      if (!f.svg.empty()) {
        advlin::cli::svg_options so;
        so.x_column = "p";
        so.y_columns = {"delta_bar", "lower_bound", "upper_bound",
                        "reference"};
        so.x_label = "p";
        so.y_label = "delta";
        so.title = "interpolation threshold vs feature count";
        write_text(f.svg, advlin::cli::emit_svg(t, so));
      }
      return 0;
    }
    if (compare_cmd->parsed()) {
      if (tunings.size() == 1 && methods.size() > 1)
        tunings.assign(methods.size(), tunings.front());
      if (tunings.size() != methods.size())
        throw std::invalid_argument(
            "--tunings must have one entry, or one per method");
      std::vector<std::pair<std::string, std::string>> pairs;
      for (std::size_t i = 0; i < methods.size(); ++i)
        pairs.emplace_back(methods[i], tunings[i]);
      const std::string json_text =
          advlin::cli::cmd_compare(to_config(f), pairs);
      write_text(f.out, json_text + "\n");
      const auto parsed = nlohmann::json::parse(json_text);
      for (const auto& e : parsed["methods"])
        if (e.contains("converged") && !e["converged"].get<bool>()) return 3;
      return 0;
    }
    if (verify_cmd->parsed()) {
      advlin::cli::verify_options vo;
      vo.trials = trials;
      vo.delta_bar_scale = perturb;
      vo.seed = f.seed;
      const auto outcome = advlin::cli::cmd_verify(vo);
      write_text(f.out, outcome.json + "\n");
      return outcome.all_passed ? 0 : 1;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
