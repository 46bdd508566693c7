#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "advlin/solvers.hpp"

// Thresholds, bounds, and radius-selection rules, as pure functions.

namespace advlin {

struct threshold_report {
  double delta_bar = 0.0;
  double delta_bar_lower = 0.0;  // bracket on delta_bar itself (already /n)
  double delta_bar_upper = 0.0;
  double zero_threshold = 0.0;
  norm_kind attack = norm_kind::l2;
};

struct bound_report {
  double delta_star = 0.0;
  double bound_rhs = 0.0;
  double lhs_observed = 0.0;
  bool holds = false;
};

struct shrinkage_report {
  bool conditions_met = false;
  bool near_binding = false;  // norm condition within 10% of binding
  double modified_objective_residual = 0.0;
};

// Largest delta at which the minimum-norm interpolator stays optimal:
// 1/(n*||alpha||_inf) with alpha from solve_dual_certificate.  Requires full
// row rank.
double delta_bar(const dataset& D, norm_kind attack);

// Singular-value bracket for n*delta_bar, depending only on X:
//   linf attack: sigma_min(X)/sqrt(p) <= n*delta_bar <= sqrt(p)*sigma_max(X)
//   l2 attack:   sigma_min(X)         <= n*delta_bar <= sqrt(p)*sigma_max(X)
// Returned already divided by n so it brackets delta_bar directly.
std::pair<double, double> delta_bar_bounds(const dataset& D, norm_kind attack);

// Smallest delta at which beta = 0 is optimal: ||X^T y||_attack / ||y||_1.
// Returns 0 for y = 0.
double zero_threshold(const dataset& D, norm_kind attack);

// delta_bar for the linear-map problem of solve_adv_linmap: the dual
// certificate is solved on X*P with P = S^T (S S^T)^{-1} S.
double delta_bar_linmap(const dataset& D, const Eigen::MatrixXd& S,
                        norm_kind attack);

// Pivotal radius 3*||X^T eps||_inf / ||eps||_1 (invariant to scaling eps).
double delta_star(const Eigen::MatrixXd& X, const Eigen::VectorXd& eps);

// In-sample prediction error bound for linf-adversarial training:
// 8*delta*||b*||_1*((1/n)||eps||_1 + 10*delta*||b*||_1).
double prediction_bound_rhs(double delta, double beta_star_l1, double eps_l1,
                            Eigen::Index n);

// Lasso counterpart: 8*lambda*||b*||_1.
double lasso_bound_rhs(double lambda, double beta_star_l1);

// Upper bound on sqrt(adv test risk) - sqrt(test risk) for the interpolator
// trained at delta_bar: (delta_test/delta_bar)*sqrt(adv train risk at
// delta_bar), times sqrt(p) when the test attack norm is mismatched.
double robustness_gap_bound(double adv_train_risk_at_delta_bar,
                            double delta_test, double delta_bar,
                            bool mismatched, Eigen::Index p);

// K*M*sqrt(log(p)/n); requires p >= 2.
double pivotal_delta(Eigen::Index n, Eigen::Index p, double M, double K);

// c*||X^T xi||_inf / ||xi||_1 with xi standard normal of length n drawn from
// the seed.  Default c = 0.5.  Scale-free in xi by construction.
double heuristic_delta(const Eigen::MatrixXd& X, double c = 0.5,
                       std::uint64_t seed = 0);

// Variant tuned for the sqrt-lasso penalty: c*||X^T xi||_inf/(sqrt(n)||xi||_2),
// default c = 0.1.
double heuristic_sqrt_lasso_lambda(const Eigen::MatrixXd& X, double c = 0.1,
                                   std::uint64_t seed = 0);

// Checks the shrinkage-equivalence preconditions (y > 0, centered columns,
// ||b||_* <= min_i |y_i|/||x_i||_attack) and reports the stationarity
// residual of the modified objective
//   (1/n)||y - Xb||^2 + (delta*||b||_* + q/n)^2,  q = sign(y - Xb).y
// at beta_hat.  Reports, never throws, when conditions fail.
shrinkage_report shrinkage_equiv_check(const Eigen::VectorXd& beta_hat,
                                       const dataset& D,
                                       const adv_config& cfg);

}  // namespace advlin
