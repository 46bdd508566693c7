#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "advlin/objective.hpp"

namespace advlin {

struct solver_options {
  int max_iterations = 200000;
  double objective_tolerance = 1e-8;    // relative, on objective progress
  double certificate_tolerance = 1e-6;  // absolute, on subgradient residual
  double smoothing_floor = 1e-10;
  std::uint64_t seed = 0;
};

struct fit_result {
  Eigen::VectorXd beta;
  double objective_value = 0.0;
  double certificate_residual = 0.0;
  int iterations_used = 0;
  bool converged = false;
};

struct dual_certificate {
  Eigen::VectorXd alpha;        // length n
  double constraint_norm = 0.0; // ||X^T alpha|| in the attack norm
  double objective = 0.0;       // alpha . y
  int iterations_used = 0;
  bool converged = false;
};

// Minimize (1/n) sum_i (|y_i - x_i'b| + delta*||b||_*)^2 where ||.||_* is
// dual to the attack norm.  Smoothing continuation (Moreau envelopes of the
// absolute value and of the regularizer, shrunk geometrically to
// opts.smoothing_floor) drives an accelerated gradient method; the iterate is
// then snapped onto the detected active structure (exactly interpolated rows,
// exactly zero coefficients), polished on that manifold, and accepted only if
// optimality_residual passes opts.certificate_tolerance.  delta = 0 falls
// back to least squares (minimum-norm solution when rank deficient).
// Non-convergence is reported via converged=false with the best iterate kept.
fit_result solve_adv(const dataset& D, const adv_config& cfg,
                     const solver_options& opts = {});

// Linear-map variant: features live in R^d, S maps them to R^p, and the
// perturbation hits the ambient input.  Minimizes over theta in R^p
//   (1/n) sum_i (|y_i - (S x_i)' theta| + delta*||S^T theta||_*)^2.
// S must have p rows and d = D.p() columns.
fit_result solve_adv_linmap(const dataset& D, const Eigen::MatrixXd& S,
                            const adv_config& cfg,
                            const solver_options& opts = {});

// (1/n)||y - Xb||^2 + lambda*||b||_2^2, closed form via the smaller of the
// primal/dual normal systems.  certificate_residual is the gradient norm.
fit_result solve_ridge(const dataset& D, double lambda);

// (1/n)||y - Xb||^2 + lambda*||b||_1 by cyclic coordinate descent.
// certificate_residual is the largest violation of the stationarity
// conditions.  Zero-norm columns keep coefficient zero.
fit_result solve_lasso(const dataset& D, double lambda,
                       const solver_options& opts = {});

// sqrt((1/n)||y - Xb||^2) + lambda*||b||_1 via the scaled-lasso fixed point
// lambda_k = 2*lambda*sqrt(mse(b_k)).  When the minimizer interpolates the
// result is certified by objective comparison against the min-l1
// interpolator instead of a stationarity residual.
fit_result solve_sqrt_lasso(const dataset& D, double lambda,
                            const solver_options& opts = {});

// min ||b||_{dual(attack)} subject to Xb = y.  l2: least-norm least squares.
// linf (so min-l1): operator splitting with exact affine projection, then
// purification to a vertex of the solution polytope.  Requires numerically
// full row rank; certified against solve_dual_certificate by strong duality.
fit_result min_norm_interpolator(const dataset& D, norm_kind attack);

// max alpha.y subject to ||X^T alpha||_attack <= 1.  linf attack: dense
// predictor-corrector interior-point method on the box LP; l2 attack: closed
// form through XX^T; l1 attack: the same IPM on the epigraph LP.
dual_certificate solve_dual_certificate(const dataset& D, norm_kind attack);

// Minimum Euclidean norm over admissible subgradient selections of the
// adversarial risk at beta (free residual signs on exactly-interpolated rows,
// free regularizer subgradient coordinates at kinks).  Exact for box-shaped
// selection sets (linf attack), accurate to ~1e-8 for the l2 ball, an upper
// bound for the l1 attack.
double optimality_residual(const Eigen::VectorXd& beta, const dataset& D,
                           const adv_config& cfg);

}  // namespace advlin
