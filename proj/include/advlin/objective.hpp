#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "advlin/norms.hpp"

// Adversarial risk of a linear predictor under per-row feature perturbations
// bounded in the attack norm, in closed form:
//
//   (1/n) sum_i ( |y_i - x_i'b| + delta * ||b||_* )^2
//
// where ||.||_* is the dual of the attack norm.  The closed form equals the
// max of the squared loss over the perturbation ball; worst_case_perturbations
// constructs rows attaining that max and adv_risk_sampled brute-forces it.

namespace advlin {

struct adv_config {
  double delta = 0.0;
  norm_kind attack = norm_kind::l2;
};

enum class general_loss_kind {
  squared_regression,
  absolute_regression,
  hinge,
  logistic
};

double adv_risk(const Eigen::VectorXd& beta, const dataset& D,
                const adv_config& cfg);

// One row per sample: the perturbation of x_i maximizing the squared loss.
// Rows satisfy ||row||_attack <= delta.  For beta = 0 with delta > 0 every
// perturbation is worst-case and zero rows are returned.
Eigen::MatrixXd worst_case_perturbations(const Eigen::VectorXd& beta,
                                         const dataset& D,
                                         const adv_config& cfg);

// Monte-Carlo lower oracle: max of the primal loss over `samples` uniform
// draws from the attack ball per row, plus the constructed worst case.
// Included worst case makes it equal adv_risk up to tiny rounding.
double adv_risk_sampled(const Eigen::VectorXd& beta, const dataset& D,
                        const adv_config& cfg, int samples,
                        std::uint64_t seed);

// Pointwise adversarial loss for the general convex losses.  For regression
// kinds the adversary shifts the absolute residual up by `margin`; for
// classification kinds (y in {-1,+1}) it shifts the classification margin
// y*inner down by `margin`.
double adv_loss_general(double inner, double y, double margin,
                        general_loss_kind kind);

// Worst value of ||y - (X+D)b||_2 over disturbance matrices D whose columns
// have Euclidean norm at most delta: ||y - Xb||_2 + delta*||b||_1.
double robust_colset_worst_value(const Eigen::VectorXd& beta, const dataset& D,
                                 double delta);

// adv_risk on a held-out set; throws std::invalid_argument on a feature
// dimension mismatch.
double adv_test_mse(const Eigen::VectorXd& beta, const dataset& Dtest,
                    const adv_config& cfg);

}  // namespace advlin
