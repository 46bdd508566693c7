#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "advlin/cli.hpp"
#include "advlin/kernels.hpp"
#include "advlin/objective.hpp"
#include "advlin/rng.hpp"
#include "advlin/solvers.hpp"
#include "advlin/theory.hpp"
#include "advlin/version.hpp"

// Cross-module property suite behind `verify`.  Each property reports a
// margin: the smallest observed slack against its tolerance, so a pass at
// margin 1e-15 reads very differently from a pass at 1e-3.

namespace advlin::cli {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct prop_result {
  std::string name;
  bool passed = true;
  double margin = std::numeric_limits<double>::infinity();
  std::string detail;
};

void fold(prop_result& r, double slack, const std::string& what) {
  if (slack < r.margin) {
    r.margin = slack;
    r.detail = what;
  }
  if (slack < 0.0) r.passed = false;
}

VectorXd random_vec(rng& g, Index n, double scale = 1.0) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * g.normal();
  return v;
}

MatrixXd random_mat(rng& g, Index n, Index p, double scale = 1.0) {
  MatrixXd M(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) M(i, j) = scale * g.normal();
  return M;
}

constexpr norm_kind all_norms[] = {norm_kind::l1, norm_kind::l2,
                                   norm_kind::linf};

prop_result check_norm_duality(const verify_options& opts) {
  prop_result r{"norm-duality"};
  rng g(opts.seed, "verify.norms", 0);
  const int reps = 8 * std::max(1, opts.trials);
  for (int t = 0; t < reps; ++t) {
    const Index n = 1 + static_cast<Index>(g.below(12));
    const VectorXd x = random_vec(g, n);
    const VectorXd y = random_vec(g, n);
    for (norm_kind k : all_norms) {
      const norm_kind kd = dual_kind(k);
      fold(r, norm(x, k) * norm(y, kd) - std::abs(x.dot(y)) + 1e-12,
           "holder pairing");
      const VectorXd v = norm_subgradient(x, k);
      fold(r, 1e-10 * (1.0 + norm(x, k)) - std::abs(v.dot(x) - norm(x, k)),
           "subgradient pairing identity");
      fold(r, 1.0 + 1e-12 - norm(v, kd), "subgradient dual-ball membership");
    }
  }
  return r;
}

prop_result check_closed_form_attack(const verify_options& opts) {
  prop_result r{"closed-form-attack"};
  rng g(opts.seed, "verify.attack", 0);
  const int reps = 6 * std::max(1, opts.trials);
  for (int t = 0; t < reps; ++t) {
    const Index n = 1 + static_cast<Index>(g.below(4));
    const Index p = 1 + static_cast<Index>(g.below(5));
    dataset D{random_mat(g, n, p), random_vec(g, n)};
    const VectorXd beta = random_vec(g, p);
    const double delta = 0.05 + g.uniform();
    for (norm_kind k : all_norms) {
      const adv_config cfg{delta, k};
      const double closed = adv_risk(beta, D, cfg);
      const MatrixXd worst = worst_case_perturbations(beta, D, cfg);
      double attained = 0.0;
      for (Index i = 0; i < n; ++i) {
        const double e = D.y[i] - (D.X.row(i) + worst.row(i)).dot(beta);
        attained += e * e;
      }
      attained /= static_cast<double>(n);
      fold(r, 1e-9 * (1.0 + closed) - std::abs(closed - attained),
           "constructed maximizer attains the closed form");
      const double sampled =
          adv_risk_sampled(beta, D, cfg, 100, opts.seed + t);
      fold(r, closed - sampled + 1e-9 * (1.0 + closed),
           "sampled attacks never beat the closed form");
    }
  }
  return r;
}

prop_result check_transition(const verify_options& opts) {
  prop_result r{"interpolation-transition"};
  const int reps = std::max(1, opts.trials / 2);
  for (int t = 0; t < reps; ++t) {
    scenario_spec spec;
    spec.n = 12;
    spec.p = 30;
    spec.n_test = 0;
    spec.seed = opts.seed + 700 + static_cast<std::uint64_t>(t);
    const labeled_split s = gen_gaussian(spec);
    for (norm_kind k : {norm_kind::l2, norm_kind::linf}) {
      const double db = delta_bar(s.train, k) * opts.delta_bar_scale;
      const auto below = solve_adv(s.train, {0.9 * db, k});
      const auto above = solve_adv(s.train, {1.1 * db, k});
      const double mse_lo =
          (s.train.y - s.train.X * below.beta).squaredNorm() /
          static_cast<double>(spec.n);
      const double mse_hi =
          (s.train.y - s.train.X * above.beta).squaredNorm() /
          static_cast<double>(spec.n);
      fold(r, 1e-6 - mse_lo, "interpolation below delta_bar");
      fold(r, mse_hi - 1e-6, "non-interpolation above delta_bar");
    }
  }
  return r;
}

prop_result check_bracket(const verify_options& opts) {
  prop_result r{"delta-bar-bracket"};
  rng g(opts.seed, "verify.bracket", 0);
  const int reps = 6 * std::max(1, opts.trials);
  for (int t = 0; t < reps; ++t) {
    const Index n = 2 + static_cast<Index>(g.below(5));
    const Index p = n + static_cast<Index>(g.below(8));
    dataset D{random_mat(g, n, p), random_vec(g, n)};
    for (norm_kind k : {norm_kind::l2, norm_kind::linf}) {
      const double db = delta_bar(D, k);
      const auto [lo, hi] = delta_bar_bounds(D, k);
      fold(r, db - lo, "lower bound");
      fold(r, hi - db, "upper bound");
    }
  }
  return r;
}

prop_result check_zero_threshold(const verify_options& opts) {
  prop_result r{"zero-threshold"};
  rng g(opts.seed, "verify.zero", 0);
  const int reps = 4 * std::max(1, opts.trials);
  for (int t = 0; t < reps; ++t) {
    const Index n = 2 + static_cast<Index>(g.below(4));
    const Index p = 1 + static_cast<Index>(g.below(8));
    dataset D{random_mat(g, n, p), random_vec(g, n)};
    for (norm_kind k : {norm_kind::l2, norm_kind::linf}) {
      const double zt = zero_threshold(D, k);
      if (zt <= 0.0) continue;
      const auto hi = solve_adv(D, {1.05 * zt, k});
      const auto lo = solve_adv(D, {0.95 * zt, k});
      fold(r, 1e-6 - hi.beta.lpNorm<Eigen::Infinity>(),
           "zero above the threshold");
      fold(r, lo.beta.lpNorm<Eigen::Infinity>() - 1e-6,
           "nonzero below the threshold");
    }
  }
  return r;
}

prop_result check_generators(const verify_options& opts) {
  prop_result r{"generator-determinism"};
  const auto same = [](const MatrixXd& A, const MatrixXd& B) {
    return A.rows() == B.rows() && A.cols() == B.cols() &&
           std::memcmp(A.data(), B.data(),
                       sizeof(double) * static_cast<std::size_t>(A.size())) ==
               0;
  };
  const auto same_vec = [](const VectorXd& a, const VectorXd& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(),
                       sizeof(double) * static_cast<std::size_t>(a.size())) ==
               0;
  };
  const int reps = std::max(1, opts.trials);
  for (int t = 0; t < reps; ++t) {
    scenario_spec spec;
    spec.n = 9;
    spec.p = 14;
    spec.d = 3;
    spec.n_test = 5;
    spec.seed = opts.seed + 40 + static_cast<std::uint64_t>(t);

    const auto g1 = gen_gaussian(spec), g2 = gen_gaussian(spec);
    fold(r, same(g1.train.X, g2.train.X) && same_vec(g1.train.y, g2.train.y) &&
                    same(g1.test.X, g2.test.X)
                ? 1.0
                : -1.0,
         "gaussian bytes");

    const auto l1 = gen_latent(spec), l2 = gen_latent(spec);
    fold(r, same(l1.train.X, l2.train.X) && same_vec(l1.train.y, l2.train.y)
                ? 1.0
                : -1.0,
         "latent bytes (and internal W orthogonality check passed)");

    const auto f1 = gen_fourier(spec, dataset{}),
               f2 = gen_fourier(spec, dataset{});
    fold(r, same(f1.train.X, f2.train.X) && same_vec(f1.train.y, f2.train.y)
                ? 1.0
                : -1.0,
         "fourier bytes");
    const double amp = std::sqrt(2.0 / static_cast<double>(spec.p));
    fold(r, amp + 1e-15 - f1.train.X.cwiseAbs().maxCoeff(),
         "fourier feature range");

    scenario_spec pspec = spec;
    pspec.d = 20;
    const auto pr1 = gen_projection(pspec), pr2 = gen_projection(pspec);
    fold(r,
         same(pr1.data.train.X, pr2.data.train.X) && same(pr1.S, pr2.S)
             ? 1.0
             : -1.0,
         "projection bytes");
    bool pm = true;
    for (Index i = 0; i < pr1.S.rows() && pm; ++i)
      for (Index j = 0; j < pr1.S.cols() && pm; ++j)
        pm = pr1.S(i, j) == 1.0 || pr1.S(i, j) == -1.0;
    fold(r, pm ? 1.0 : -1.0, "projection entries exactly +-1");
  }
  return r;
}

prop_result check_kernels(const verify_options& opts) {
  prop_result r{"kernel-agreement"};
  rng g(opts.seed, "verify.kernels", 0);
  const int reps = 4 * std::max(1, opts.trials);
  for (int t = 0; t < reps; ++t) {
    const Index n = 1 + static_cast<Index>(g.below(40));
    const Index p = 1 + static_cast<Index>(g.below(70));
    const MatrixXd M = random_mat(g, n, p);
    const VectorXd v = random_vec(g, p);
    const VectorXd w = random_vec(g, n);
    VectorXd a(n), b(n), c(p), d(p);
    kernels::matvec_serial(M, v, a);
    kernels::matvec_parallel(M, v, b);
    kernels::matvec_t_serial(M, w, c);
    kernels::matvec_t_parallel(M, w, d);
    Eigen::Map<const VectorXd> mflat(M.data(), M.size());
    const bool ok =
        std::memcmp(a.data(), b.data(),
                    sizeof(double) * static_cast<std::size_t>(a.size())) == 0 &&
        std::memcmp(c.data(), d.data(),
                    sizeof(double) * static_cast<std::size_t>(c.size())) == 0 &&
        kernels::max_abs_serial(mflat) == kernels::max_abs_parallel(mflat);
    fold(r, ok ? 1.0 : -1.0, "serial and parallel kernels agree bitwise");
  }
  return r;
}

prop_result check_certificates(const verify_options& opts) {
  prop_result r{"solver-certificates"};
  rng g(opts.seed, "verify.solver", 0);
  const int reps = 3 * std::max(1, opts.trials);
  for (int t = 0; t < reps; ++t) {
    const Index n = 2 + static_cast<Index>(g.below(4));
    const Index p = 2 + static_cast<Index>(g.below(8));
    dataset D{random_mat(g, n, p), random_vec(g, n)};
    for (norm_kind k : {norm_kind::l2, norm_kind::linf}) {
      const double zt = zero_threshold(D, k);
      const double delta = zt * (0.2 + g.uniform());
      const adv_config cfg{delta, k};
      const fit_result fit = solve_adv(D, cfg);
      if (!fit.converged) {
        fold(r, -1.0, "solver failed to converge on a small instance");
        continue;
      }
      fold(r, 1e-6 - optimality_residual(fit.beta, D, cfg),
           "certificate within tolerance");
    }
  }
  // one mapped solve
  {
    rng gs(opts.seed, "verify.linmap", 0);
    dataset D{random_mat(gs, 4, 3), random_vec(gs, 4)};
    const MatrixXd S = random_mat(gs, 6, 3);
    const fit_result fit = solve_adv_linmap(D, S, {0.3, norm_kind::l2});
    fold(r, fit.converged ? fit.certificate_residual <= 1e-6 ? 1.0 : -1.0
                          : -1.0,
         "mapped solve certified");
  }
  return r;
}

}  // namespace

verify_outcome cmd_verify(const verify_options& opts) {
  std::vector<prop_result> props;
  props.push_back(check_norm_duality(opts));
  props.push_back(check_closed_form_attack(opts));
  props.push_back(check_transition(opts));
  props.push_back(check_bracket(opts));
  props.push_back(check_zero_threshold(opts));
  props.push_back(check_generators(opts));
  props.push_back(check_kernels(opts));
  props.push_back(check_certificates(opts));

  verify_outcome out;
  out.all_passed = true;
  nlohmann::json j;
  j["version"] = version_string;
  j["trials"] = opts.trials;
  j["seed"] = opts.seed;
  if (opts.delta_bar_scale != 1.0)
    j["delta_bar_scale"] = opts.delta_bar_scale;
  j["properties"] = nlohmann::json::array();
  for (const auto& p : props) {
    out.all_passed = out.all_passed && p.passed;
    nlohmann::json e;
    e["property"] = p.name;
    e["passed"] = p.passed;
    e["margin"] = std::isfinite(p.margin) ? p.margin : 0.0;
    e["tightest"] = p.detail;
    j["properties"].push_back(e);
  }
  j["all_passed"] = out.all_passed;
  out.json = j.dump(2);
  return out;
}

}  // namespace advlin::cli
