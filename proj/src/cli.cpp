#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "advlin/cli.hpp"
#include "advlin/objective.hpp"
#include "advlin/rng.hpp"
#include "advlin/solvers.hpp"
#include "advlin/theory.hpp"
#include "advlin/version.hpp"

namespace advlin::cli {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(),
                         [](double x) { return !std::isfinite(x); }),
          v.end());
  if (v.empty()) return nan_v;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  return 0.5 * (v[m - 1] + v[m]);
}

// everything a solver call needs; ambient rows (and S) align one to one
// with the training rows when the scenario observes projected inputs
struct problem_view {
  dataset train;
  dataset test;
  std::optional<dataset> ambient_train;
  std::optional<dataset> ambient_test;
  MatrixXd S;  // p x d when ambient data is present
  std::vector<std::string> warnings;
};

problem_view make_data(const run_config& cfg) {
  problem_view pv;
  const scenario_spec& spec = cfg.scenario;
  if (cfg.scenario_name == "gaussian") {
    auto s = gen_gaussian(spec);
    pv.train = std::move(s.train);
    pv.test = std::move(s.test);
  } else if (cfg.scenario_name == "latent") {
    auto s = gen_latent(spec);
    pv.train = std::move(s.train);
    pv.test = std::move(s.test);
  } else if (cfg.scenario_name == "fourier") {
    dataset base;
    if (!spec.path.empty()) {
      auto norm = normalize(load_csv(spec.path, spec.target));
      base = std::move(norm.data);
      pv.warnings = std::move(norm.warnings);
    }
    auto s = gen_fourier(spec, base);
    pv.train = std::move(s.train);
    pv.test = std::move(s.test);
  } else if (cfg.scenario_name == "projection") {
    auto s = gen_projection(spec);
    pv.train = std::move(s.data.train);
    pv.test = std::move(s.data.test);
    pv.ambient_train = std::move(s.ambient_train);
    pv.ambient_test = std::move(s.ambient_test);
    pv.S = std::move(s.S);
  } else if (cfg.scenario_name == "csv") {
    if (spec.path.empty())
      throw std::invalid_argument("csv scenario requires --csv and --target");
    auto norm = normalize(load_csv(spec.path, spec.target));
    pv.warnings = std::move(norm.warnings);
    auto s = split(norm.data, cfg.csv_split_fraction, spec.seed);
    pv.train = std::move(s.train);
    pv.test = std::move(s.test);
  } else {
    throw std::invalid_argument("unknown scenario '" + cfg.scenario_name +
                                "'");
  }
  return pv;
}

bool is_linmap(const problem_view& pv) { return pv.ambient_train.has_value(); }

fit_result run_method(const std::string& method, norm_kind attack, double knob,
                      const problem_view& pv) {
  if (method == "adv") {
    const adv_config acfg{knob, attack};
    if (is_linmap(pv)) return solve_adv_linmap(*pv.ambient_train, pv.S, acfg);
    return solve_adv(pv.train, acfg);
  }
  if (method == "lasso") return solve_lasso(pv.train, knob);
  if (method == "ridge") return solve_ridge(pv.train, knob);
  if (method == "sqrt-lasso") return solve_sqrt_lasso(pv.train, knob);
  if (method == "min-norm") return min_norm_interpolator(pv.train, attack);
  throw std::invalid_argument("unknown method '" + method + "'");
}

double mse_of(const dataset& D, const VectorXd& beta) {
  if (D.n() == 0) return nan_v;
  return (D.y - D.X * beta).squaredNorm() / static_cast<double>(D.n());
}

// adversarial risk with the regularizer evaluated in the right space
// (||S^T theta||_* for projected scenarios, ||beta||_* otherwise)
double adv_value(const dataset& D, const VectorXd& beta, double delta,
                 norm_kind attack, const problem_view& pv) {
  if (D.n() == 0) return nan_v;
  const VectorXd phi = is_linmap(pv) ? VectorXd(pv.S.transpose() * beta) : beta;
  const double g = norm(phi, dual_kind(attack));
  const VectorXd r = D.y - D.X * beta;
  double acc = 0.0;
  for (Index i = 0; i < D.n(); ++i) {
    const double t = std::abs(r[i]) + delta * g;
    acc += t * t;
  }
  return acc / static_cast<double>(D.n());
}

double reg_norm_of(const VectorXd& beta, norm_kind attack,
                   const problem_view& pv) {
  const VectorXd phi = is_linmap(pv) ? VectorXd(pv.S.transpose() * beta) : beta;
  return norm(phi, dual_kind(attack));
}

double compute_delta_bar(const run_config& cfg, const problem_view& pv) {
  try {
    if (is_linmap(pv))
      return delta_bar_linmap(*pv.ambient_train, pv.S, cfg.attack);
    return delta_bar(pv.train, cfg.attack);
  } catch (const std::exception&) {
    return nan_v;
  }
}

struct grid_spec {
  std::vector<double> knobs;
  double lo = 0.0;
  double hi = 0.0;
};

grid_spec make_grid(const run_config& cfg, double dbar, double zt) {
  grid_spec g;
  if (cfg.method == "min-norm") {
    g.knobs = {0.0};
    return g;
  }
  double lo = cfg.grid_min;
  double hi = cfg.grid_max;
  if (lo <= 0.0 || hi <= 0.0) {
    if (cfg.method == "adv") {
      hi = zt > 0.0 ? 2.0 * zt : 1.0;
      lo = std::isfinite(dbar) && dbar > 0.0 ? 0.05 * dbar : 1e-4 * hi;
      if (lo >= hi) lo = 1e-4 * hi;
    } else if (cfg.method == "ridge") {
      lo = 1e-8;
      hi = 1e2;
    } else {
      // zt here is the method's own vanishing threshold
      hi = zt > 0.0 ? 2.0 * zt : 1.0;
      lo = 1e-4 * hi;
    }
    if (cfg.grid_min > 0.0) lo = cfg.grid_min;
    if (cfg.grid_max > 0.0) hi = cfg.grid_max;
  }
  if (!(lo > 0.0) || !(hi >= lo))
    throw std::invalid_argument("empty or invalid grid: [" + fmt(lo) + ", " +
                                fmt(hi) + "]");
  int m = cfg.grid_points;
  if (m <= 0) {
    const double decades = std::log10(hi / lo);
    m = static_cast<int>(std::ceil(48.0 * std::max(decades, 0.0))) + 1;
    m = std::clamp(m, 2, 481);
  }
  if (m == 1 || hi == lo) {
    g.knobs = {lo};
  } else {
    g.knobs.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      g.knobs[static_cast<std::size_t>(i)] =
          lo * std::pow(hi / lo, static_cast<double>(i) /
                                     static_cast<double>(m - 1));
    g.knobs.front() = lo;
    g.knobs.back() = hi;
  }
  g.lo = lo;
  g.hi = hi;
  return g;
}

// vanishing threshold of the method's own knob, used to anchor grids
double method_zero_threshold(const run_config& cfg, const problem_view& pv) {
  const dataset& D = pv.train;
  const double nd = static_cast<double>(D.n());
  if (cfg.method == "adv") return zero_threshold(D, cfg.attack);
  if (cfg.method == "lasso")
    return (2.0 / nd) * (D.X.transpose() * D.y).lpNorm<Eigen::Infinity>();
  if (cfg.method == "sqrt-lasso") {
    const double yn = D.y.norm();
    if (yn == 0.0) return 0.0;
    return (D.X.transpose() * D.y).lpNorm<Eigen::Infinity>() /
           (std::sqrt(nd) * yn);
  }
  return 0.0;
}

void base_metadata(const run_config& cfg, const problem_view& pv,
                   result_table& t, const char* command) {
  const scenario_spec& s = cfg.scenario;
  t.metadata["command"] = command;
  t.metadata["version"] = version_string;
  t.metadata["scenario"] = cfg.scenario_name;
  t.metadata["method"] = cfg.method;
  t.metadata["attack"] = norm_name(cfg.attack);
  t.metadata["n"] = std::to_string(pv.train.n());
  t.metadata["p"] = std::to_string(pv.train.p());
  t.metadata["n_test"] = std::to_string(pv.test.n());
  t.metadata["d"] = std::to_string(s.d);
  t.metadata["sigma"] = fmt(s.sigma);
  t.metadata["r"] = fmt(s.r);
  t.metadata["sigma_w"] = fmt(s.sigma_w);
  t.metadata["sparse_truth"] = s.sparse_truth ? "1" : "0";
  t.metadata["seed"] = std::to_string(s.seed);
  if (!s.path.empty()) {
    t.metadata["csv"] = s.path;
    t.metadata["target"] = s.target;
  }
  for (std::size_t i = 0; i < pv.warnings.size(); ++i)
    t.metadata["warning_" + std::to_string(i)] = pv.warnings[i];
  if (is_linmap(pv)) t.metadata["threshold_space"] = "projected";
}

result_table grid_table(const run_config& cfg, const char* command) {
  const problem_view pv = make_data(cfg);
  const double dbar =
      cfg.method == "adv" || cfg.method == "min-norm"
          ? compute_delta_bar(cfg, pv)
          : nan_v;
  const double zt = zero_threshold(pv.train, cfg.attack);
  const grid_spec grid = make_grid(cfg, dbar, method_zero_threshold(cfg, pv));

  result_table t;
  base_metadata(cfg, pv, t, command);
  t.metadata["delta_bar"] = fmt(dbar);
  t.metadata["zero_threshold"] = fmt(zt);
  t.metadata["grid_min"] = fmt(grid.lo);
  t.metadata["grid_max"] = fmt(grid.hi);
  t.metadata["grid_points"] = std::to_string(grid.knobs.size());

  const Index q = cfg.method == "adv" && is_linmap(pv)
                      ? pv.S.rows()
                      : pv.train.p();
  t.columns = {"knob",     "train_mse", "test_mse",
               "adv_test_mse", "reg_norm",  "l1_norm",
               "certificate_residual", "converged"};
  for (Index j = 0; j < q; ++j)
    t.columns.push_back("coef_" + std::to_string(j));

  int bad = 0;
  for (double knob : grid.knobs) {
    const fit_result fit = run_method(cfg.method, cfg.attack, knob, pv);
    if (!fit.converged) ++bad;
    std::vector<double> row;
    row.reserve(t.columns.size());
    row.push_back(knob);
    row.push_back(mse_of(pv.train, fit.beta));
    row.push_back(mse_of(pv.test, fit.beta));
    row.push_back(cfg.method == "adv"
                      ? adv_value(pv.test, fit.beta, knob, cfg.attack, pv)
                      : mse_of(pv.test, fit.beta));
    row.push_back(reg_norm_of(fit.beta, cfg.attack, pv));
    row.push_back(fit.beta.lpNorm<1>());
    row.push_back(fit.certificate_residual);
    row.push_back(fit.converged ? 1.0 : 0.0);
    for (Index j = 0; j < q; ++j) row.push_back(fit.beta[j]);
    t.rows.push_back(std::move(row));
  }
  t.metadata["nonconverged_rows"] = std::to_string(bad);
  return t;
}

struct fold_view {
  problem_view fit_part;
  dataset val;
};

std::vector<fold_view> make_folds(const problem_view& pv, int k,
                                  std::uint64_t seed) {
  const Index n = pv.train.n();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  rng g(seed, "cv.perm", 0);
  for (Index i = n - 1; i > 0; --i) {
    const Index j =
        static_cast<Index>(g.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(j)]);
  }
  const auto take = [&](const dataset& D, const std::vector<Index>& idx) {
    dataset out;
    out.X.resize(static_cast<Index>(idx.size()), D.p());
    out.y.resize(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.X.row(static_cast<Index>(i)) = D.X.row(idx[i]);
      out.y[static_cast<Index>(i)] = D.y[idx[i]];
    }
    return out;
  };
  std::vector<fold_view> folds;
  for (int f = 0; f < k; ++f) {
    std::vector<Index> val_idx, fit_idx;
    for (Index i = 0; i < n; ++i) {
      if (static_cast<int>(i % static_cast<Index>(k)) == f)
        val_idx.push_back(perm[static_cast<std::size_t>(i)]);
      else
        fit_idx.push_back(perm[static_cast<std::size_t>(i)]);
    }
    if (val_idx.empty() || fit_idx.empty()) continue;
    fold_view fv;
    fv.fit_part.train = take(pv.train, fit_idx);
    if (pv.ambient_train) {
      fv.fit_part.ambient_train = take(*pv.ambient_train, fit_idx);
      fv.fit_part.S = pv.S;
    }
    fv.val = take(pv.train, val_idx);
    folds.push_back(std::move(fv));
  }
  return folds;
}

}  // namespace

result_table cmd_path(const run_config& cfg) { return grid_table(cfg, "path"); }

result_table cmd_sweep(const run_config& cfg) {
  return grid_table(cfg, "sweep");
}

result_table cmd_threshold_curve(const run_config& cfg,
                                 const std::vector<Index>& p_values) {
  if (p_values.empty())
    throw std::invalid_argument("threshold-curve requires at least one p");
  for (Index p : p_values)
    if (p < cfg.scenario.n)
      throw std::invalid_argument(
          "threshold-curve requires p >= n (full row rank); got p = " +
          std::to_string(p));
  if (cfg.repetitions < 1)
    throw std::invalid_argument("repetitions must be >= 1");

  result_table t;
  t.columns = {"p", "delta_bar", "lower_bound", "upper_bound", "reference"};

  bool meta_done = false;
  for (Index p : p_values) {
    std::vector<double> dbars, lowers, uppers, refs;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      run_config rc = cfg;
      rc.scenario.p = p;
      rc.scenario.n_test = 0;
      rc.scenario.seed = cfg.scenario.seed + static_cast<std::uint64_t>(rep);
      const problem_view pv = make_data(rc);
      if (!meta_done) {
        base_metadata(cfg, pv, t, "threshold-curve");
        t.metadata["aggregation"] = "median";
        t.metadata["repetitions"] = std::to_string(cfg.repetitions);
        t.metadata["p"] = "varies";
        meta_done = true;
      }
      dbars.push_back(compute_delta_bar(rc, pv));
      if (is_linmap(pv)) {
        // inputs are fixed in the ambient space, so neither the
        // singular-value bracket nor an absolute reference radius applies
        lowers.push_back(nan_v);
        uppers.push_back(nan_v);
        refs.push_back(nan_v);
      } else {
        try {
          const auto [lo, hi] = delta_bar_bounds(pv.train, cfg.attack);
          lowers.push_back(lo);
          uppers.push_back(hi);
        } catch (const std::exception&) {
          lowers.push_back(nan_v);
          uppers.push_back(nan_v);
        }
        double acc = 0.0;
        for (Index i = 0; i < pv.train.n(); ++i)
          acc += pv.train.X.row(i).norm();
        refs.push_back(0.01 * acc / static_cast<double>(pv.train.n()));
      }
    }
    t.rows.push_back({static_cast<double>(p), median(dbars), median(lowers),
                      median(uppers), median(refs)});
  }
  return t;
}

std::string cmd_compare(
    const run_config& cfg,
    const std::vector<std::pair<std::string, std::string>>& methods) {
  const problem_view pv = make_data(cfg);
  if (pv.test.n() == 0)
    throw std::invalid_argument("compare requires a nonempty test split");
  const double ytest_sq = pv.test.y.squaredNorm();
  if (ytest_sq == 0.0)
    throw std::invalid_argument("compare requires nonzero test targets");

  const auto nmse = [&](const VectorXd& beta) {
    return (pv.test.y - pv.test.X * beta).squaredNorm() / ytest_sq;
  };

  json out;
  {
    result_table meta_holder;
    base_metadata(cfg, pv, meta_holder, "compare");
    json meta;
    for (const auto& [k, v] : meta_holder.metadata) meta[k] = v;
    meta["nmse"] = "||y_hat - y||^2 / ||y||^2 on the test split";
    out["metadata"] = meta;
  }
  out["methods"] = json::array();

  const auto entry_for = [&](const std::string& method,
                             const std::string& tuning) {
    json e;
    e["method"] = method;
    e["tuning"] = tuning;
    if (method == "adv" || method == "min-norm")
      e["attack"] = norm_name(cfg.attack);

    run_config mc = cfg;
    mc.method = method;
    double knob = 0.0;
    if (method == "min-norm") {
      e["tuning"] = "none";
    } else if (tuning == "grid") {
      const double dbar =
          method == "adv" ? compute_delta_bar(cfg, pv) : nan_v;
      grid_spec grid = make_grid(mc, dbar, method_zero_threshold(mc, pv));
      if (static_cast<int>(grid.knobs.size()) > 49) {
        run_config dense = mc;
        dense.grid_points = 49;
        grid = make_grid(dense, dbar, method_zero_threshold(mc, pv));
      }
      double best = std::numeric_limits<double>::infinity();
      for (double k : grid.knobs) {
        const fit_result f = run_method(method, cfg.attack, k, pv);
        const double v = nmse(f.beta);
        if (v < best) {
          best = v;
          knob = k;
        }
      }
      e["tuning"] = "grid (best on test)";
    } else if (tuning == "cv") {
      const double dbar =
          method == "adv" ? compute_delta_bar(cfg, pv) : nan_v;
      grid_spec grid = make_grid(mc, dbar, method_zero_threshold(mc, pv));
      if (static_cast<int>(grid.knobs.size()) > 25) {
        run_config dense = mc;
        dense.grid_points = 25;
        grid = make_grid(dense, dbar, method_zero_threshold(mc, pv));
      }
      const auto folds = make_folds(
          pv, static_cast<int>(std::min<Index>(5, pv.train.n())),
          cfg.scenario.seed);
      double best = std::numeric_limits<double>::infinity();
      for (double k : grid.knobs) {
        double acc = 0.0;
        for (const auto& f : folds) {
          const fit_result fr = run_method(method, cfg.attack, k, f.fit_part);
          acc += mse_of(f.val, fr.beta);
        }
        acc /= static_cast<double>(folds.size());
        if (acc < best) {
          best = acc;
          knob = k;
        }
      }
      e["tuning"] = "cross-validation (5-fold)";
    } else if (tuning == "heuristic") {
      if (method == "adv")
        knob = heuristic_delta(pv.train.X, 0.5, cfg.scenario.seed);
      else if (method == "sqrt-lasso")
        knob =
            heuristic_sqrt_lasso_lambda(pv.train.X, 0.1, cfg.scenario.seed);
      else
        throw std::invalid_argument("heuristic tuning applies to adv and "
                                    "sqrt-lasso only");
      e["tuning"] = "heuristic";
    } else if (tuning == "pivotal") {
      if (method != "adv")
        throw std::invalid_argument("pivotal tuning applies to adv only");
      knob = pivotal_delta(pv.train.n(), pv.train.p(),
                           pv.train.X.cwiseAbs().maxCoeff(), 1.0);
      e["tuning"] = "pivotal (K=1, M=max|X|)";
    } else {
      throw std::invalid_argument("unknown tuning rule '" + tuning + "'");
    }

    const fit_result fit = run_method(method, cfg.attack, knob, pv);
    e["selected"] = knob;
    e["nmse"] = nmse(fit.beta);
    e["converged"] = fit.converged;
    e["certificate_residual"] = fit.certificate_residual;
    return e;
  };

  for (const auto& [method, tuning] : methods)
    out["methods"].push_back(entry_for(method, tuning));

  // untuned interpolators ride along as baselines whenever they exist
  for (norm_kind atk : {norm_kind::linf, norm_kind::l2}) {
    json e;
    e["method"] = "min-norm";
    e["attack"] = norm_name(atk);
    e["tuning"] = "none";
    try {
      const fit_result fit = min_norm_interpolator(pv.train, atk);
      e["selected"] = 0.0;
      e["nmse"] = nmse(fit.beta);
      e["converged"] = fit.converged;
      e["certificate_residual"] = fit.certificate_residual;
      e["feasible"] = true;
    } catch (const std::exception& ex) {
      e["feasible"] = false;
      e["note"] = ex.what();
    }
    out["methods"].push_back(e);
  }

  return out.dump(2);
}

void write_csv(const result_table& table, std::ostream& out) {
  for (const auto& [k, v] : table.metadata) out << "# " << k << "=" << v << "\n";
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out << ",";
    out << table.columns[j];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ",";
      out << fmt(row[j]);
    }
    out << "\n";
  }
}

}  // namespace advlin::cli
