#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "advlin/rng.hpp"
#include "advlin/theory.hpp"
#include "detail.hpp"

namespace advlin {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd draw_xi(Index n, std::uint64_t seed) {
  rng gen(seed, "theory.xi", 0);
  VectorXd xi(n);
  for (Index i = 0; i < n; ++i) xi[i] = gen.normal();
  return xi;
}

}  // namespace

double delta_bar(const dataset& D, norm_kind attack) {
  if (!detail::full_row_rank(D.X))
    throw std::invalid_argument(
        "delta_bar requires a numerically full-row-rank design");
  const dual_certificate cert = solve_dual_certificate(D, attack);
  const double amax = cert.alpha.lpNorm<Eigen::Infinity>();
  if (amax == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (static_cast<double>(D.n()) * amax);
}

std::pair<double, double> delta_bar_bounds(const dataset& D,
                                           norm_kind attack) {
  if (attack == norm_kind::l1)
    throw std::invalid_argument(
        "delta_bar_bounds: no singular-value bracket for the l1 attack");
  Eigen::JacobiSVD<MatrixXd> svd(D.X);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double nd = static_cast<double>(D.n());
  const double rootp = std::sqrt(static_cast<double>(D.p()));
  const double lower =
      attack == norm_kind::linf ? smin / (rootp * nd) : smin / nd;
  return {lower, rootp * smax / nd};
}

double zero_threshold(const dataset& D, norm_kind attack) {
  const double y1 = D.y.lpNorm<1>();
  if (y1 == 0.0) return 0.0;
  return norm(D.X.transpose() * D.y, attack) / y1;
}

double delta_bar_linmap(const dataset& D, const MatrixXd& S,
                        norm_kind attack) {
  if (S.cols() != D.p())
    throw std::invalid_argument(
        "delta_bar_linmap: S must have one column per ambient feature");
  Eigen::LLT<MatrixXd> llt(S * S.transpose());
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("delta_bar_linmap: S must have full row rank");
  // project the design onto the row space of S; the certificate of the
  // mapped interpolation problem lives there
  const MatrixXd P = S.transpose() * llt.solve(S);
  dataset mapped{D.X * P, D.y};
  return delta_bar(mapped, attack);
}

double delta_star(const MatrixXd& X, const VectorXd& eps) {
  if (eps.size() != X.rows())
    throw std::invalid_argument("delta_star: eps must have one entry per row");
  const double e1 = eps.lpNorm<1>();
  if (e1 == 0.0)
    throw std::invalid_argument("delta_star: eps must be nonzero");
  return 3.0 * (X.transpose() * eps).lpNorm<Eigen::Infinity>() / e1;
}

double prediction_bound_rhs(double delta, double beta_star_l1, double eps_l1,
                            Index n) {
  if (n < 1) throw std::invalid_argument("prediction_bound_rhs: n must be >= 1");
  const double b = delta * beta_star_l1;
  return 8.0 * b * (eps_l1 / static_cast<double>(n) + 10.0 * b);
}

double lasso_bound_rhs(double lambda, double beta_star_l1) {
  return 8.0 * lambda * beta_star_l1;
}

double robustness_gap_bound(double adv_train_risk_at_delta_bar,
                            double delta_test, double delta_bar,
                            bool mismatched, Index p) {
  if (!(delta_bar > 0.0))
    throw std::invalid_argument("robustness_gap_bound: delta_bar must be > 0");
  if (adv_train_risk_at_delta_bar < 0.0)
    throw std::invalid_argument("robustness_gap_bound: risk must be >= 0");
  double out = (delta_test / delta_bar) * std::sqrt(adv_train_risk_at_delta_bar);
  if (mismatched) out *= std::sqrt(static_cast<double>(p));
  return out;
}

double pivotal_delta(Index n, Index p, double M, double K) {
  if (p < 2) throw std::invalid_argument("pivotal_delta: p must be >= 2");
  if (n < 1) throw std::invalid_argument("pivotal_delta: n must be >= 1");
  return K * M *
         std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

double heuristic_delta(const MatrixXd& X, double c, std::uint64_t seed) {
  const VectorXd xi = draw_xi(X.rows(), seed);
  return c * (X.transpose() * xi).lpNorm<Eigen::Infinity>() / xi.lpNorm<1>();
}

double heuristic_sqrt_lasso_lambda(const MatrixXd& X, double c,
                                   std::uint64_t seed) {
  const VectorXd xi = draw_xi(X.rows(), seed);
  return c * (X.transpose() * xi).lpNorm<Eigen::Infinity>() /
         (std::sqrt(static_cast<double>(X.rows())) * xi.norm());
}

shrinkage_report shrinkage_equiv_check(const VectorXd& beta_hat,
                                       const dataset& D,
                                       const adv_config& cfg) {
  if (beta_hat.size() != D.p())
    throw std::invalid_argument("shrinkage_equiv_check: beta size mismatch");
  const Index n = D.n();
  const Index p = D.p();
  const double nd = static_cast<double>(n);
  const norm_kind reg = dual_kind(cfg.attack);

  shrinkage_report rep;

  const bool positive = (D.y.array() > 0.0).all();
  const double xmax = D.X.cwiseAbs().maxCoeff();
  const bool centered =
      (D.X.transpose() * VectorXd::Ones(n)).lpNorm<Eigen::Infinity>() <=
      1e-8 * nd * xmax;

  double bound = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double rown = norm(D.X.row(i).transpose(), cfg.attack);
    if (rown > 0.0) bound = std::min(bound, std::abs(D.y[i]) / rown);
  }
  const double g = norm(beta_hat, reg);
  const bool small_enough = g <= bound;
  rep.conditions_met = positive && centered && small_enough;
  rep.near_binding = std::isfinite(bound) && g >= 0.9 * bound && small_enough;

  // stationarity of (1/n)||y-Xb||^2 + (delta*||b||_* + q/n)^2 at beta_hat,
  // minimized over the regularizer subgradient selection
  const VectorXd r = D.y - D.X * beta_hat;
  double q = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (r[i] > 0.0)
      q += D.y[i];
    else if (r[i] < 0.0)
      q -= D.y[i];
  }
  const VectorXd cgrad = -2.0 / nd * (D.X.transpose() * r);
  const double a = 2.0 * cfg.delta * (cfg.delta * g + q / nd);
  const MatrixXd empty(p, 0);
  const double tie_tol = 1e-12 * (1.0 + g);

  switch (reg) {
    case norm_kind::l1: {
      VectorXd base = cgrad;
      std::vector<Index> zeros;
      for (Index j = 0; j < p; ++j) {
        if (beta_hat[j] > 0.0)
          base[j] += a;
        else if (beta_hat[j] < 0.0)
          base[j] -= a;
        else
          zeros.push_back(j);
      }
      MatrixXd B(p, static_cast<Index>(zeros.size()));
      B.setZero();
      for (std::size_t k = 0; k < zeros.size(); ++k)
        B(zeros[k], static_cast<Index>(k)) = a;
      rep.modified_objective_residual =
          detail::min_selection_norm(base, B, empty, detail::free_part::none);
      break;
    }
    case norm_kind::l2: {
      if (g <= tie_tol)
        rep.modified_objective_residual = std::max(0.0, cgrad.norm() - a);
      else
        rep.modified_objective_residual = (cgrad + (a / g) * beta_hat).norm();
      break;
    }
    case norm_kind::linf: {
      if (g <= tie_tol) {
        rep.modified_objective_residual = detail::min_selection_norm(
            cgrad, empty, a * MatrixXd::Identity(p, p),
            detail::free_part::l1_ball);
        break;
      }
      std::vector<Index> ties;
      for (Index j = 0; j < p; ++j)
        if (std::abs(beta_hat[j]) >= g - tie_tol) ties.push_back(j);
      MatrixXd E(p, static_cast<Index>(ties.size()));
      E.setZero();
      for (std::size_t k = 0; k < ties.size(); ++k)
        E(ties[k], static_cast<Index>(k)) =
            a * (beta_hat[ties[k]] > 0.0 ? 1.0 : -1.0);
      rep.modified_objective_residual = detail::min_selection_norm(
          cgrad, empty, E, detail::free_part::simplex);
      break;
    }
  }
  return rep;
}

}  // namespace advlin
