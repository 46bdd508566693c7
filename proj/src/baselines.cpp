#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advlin/solvers.hpp"

namespace advlin {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double soft(double v, double t) {
  const double a = std::abs(v) - t;
  return a > 0.0 ? (v > 0.0 ? a : -a) : 0.0;
}

// cyclic coordinate descent on (1/n)||y - Xb||^2 + lam*||b||_1 with an
// incrementally maintained residual; returns the max stationarity violation
double lasso_cd(const dataset& D, double lam, VectorXd& beta, int max_sweeps,
                int& sweeps_used) {
  const Index n = D.n();
  const Index p = D.p();
  const double inv_n = 1.0 / static_cast<double>(n);
  VectorXd colsq(p);
  for (Index j = 0; j < p; ++j) colsq[j] = 2.0 * inv_n * D.X.col(j).squaredNorm();
  VectorXd r = D.y - D.X * beta;

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    double scale = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (colsq[j] <= 0.0) {
        beta[j] = 0.0;
        continue;
      }
      const double c = 2.0 * inv_n * D.X.col(j).dot(r) + colsq[j] * beta[j];
      const double bn = soft(c, lam) / colsq[j];
      const double diff = bn - beta[j];
      if (diff != 0.0) {
        r -= diff * D.X.col(j);
        beta[j] = bn;
      }
      moved = std::max(moved, std::abs(diff));
      scale = std::max(scale, std::abs(bn));
    }
    if (moved <= 1e-14 * (1.0 + scale)) {
      ++sweep;
      break;
    }
  }
  sweeps_used = sweep;

  r = D.y - D.X * beta;  // refresh against incremental drift
  double kkt = 0.0;
  for (Index j = 0; j < p; ++j) {
    if (colsq[j] <= 0.0) continue;
    const double g = 2.0 * inv_n * D.X.col(j).dot(r);
    if (beta[j] != 0.0)
      kkt = std::max(kkt, std::abs(g - lam * (beta[j] > 0.0 ? 1.0 : -1.0)));
    else
      kkt = std::max(kkt, std::max(0.0, std::abs(g) - lam));
  }
  return kkt;
}

}  // namespace

fit_result solve_ridge(const dataset& D, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("solve_ridge: lambda must be nonnegative");
  const Index n = D.n();
  const Index p = D.p();
  fit_result out;
  if (lambda == 0.0) {
    out.beta = D.X.completeOrthogonalDecomposition().solve(D.y);
  } else if (p <= n) {
    const MatrixXd N = D.X.transpose() * D.X +
                       static_cast<double>(n) * lambda *
                           MatrixXd::Identity(p, p);
    out.beta = Eigen::LLT<MatrixXd>(N).solve(D.X.transpose() * D.y);
  } else {
    // dual normal system: b = X'(XX' + n*lam*I)^{-1} y
    const MatrixXd N = D.X * D.X.transpose() +
                       static_cast<double>(n) * lambda *
                           MatrixXd::Identity(n, n);
    out.beta = D.X.transpose() * Eigen::LLT<MatrixXd>(N).solve(D.y);
  }
  const VectorXd r = D.y - D.X * out.beta;
  out.objective_value =
      r.squaredNorm() / static_cast<double>(n) + lambda * out.beta.squaredNorm();
  out.certificate_residual =
      (-2.0 / static_cast<double>(n) * (D.X.transpose() * r) +
       2.0 * lambda * out.beta)
          .norm();
  out.converged = out.certificate_residual <=
                  1e-8 * (1.0 + D.y.cwiseAbs().maxCoeff());
  return out;
}

fit_result solve_lasso(const dataset& D, double lambda,
                       const solver_options& opts) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("solve_lasso: lambda must be nonnegative");
  fit_result out;
  out.beta = VectorXd::Zero(D.p());
  const int max_sweeps =
      std::max(1000, opts.max_iterations / std::max<int>(1, static_cast<int>(D.p())));
  int sweeps = 0;
  out.certificate_residual = lasso_cd(D, lambda, out.beta, max_sweeps, sweeps);
  out.iterations_used = sweeps;
  const VectorXd r = D.y - D.X * out.beta;
  out.objective_value = r.squaredNorm() / static_cast<double>(D.n()) +
                        lambda * out.beta.lpNorm<1>();
  out.converged = out.certificate_residual <= opts.certificate_tolerance;
  return out;
}

fit_result solve_sqrt_lasso(const dataset& D, double lambda,
                            const solver_options& opts) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("solve_sqrt_lasso: lambda must be nonnegative");
  const Index n = D.n();
  const double nd = static_cast<double>(n);
  const double ynorm = D.y.norm();

  fit_result out;
  out.beta = VectorXd::Zero(D.p());
  if (ynorm == 0.0) {
    out.converged = true;
    return out;
  }

  // the zero vector is optimal iff lambda clears the gradient of the
  // root-mse term at the origin
  const double zero_threshold =
      (D.X.transpose() * D.y).lpNorm<Eigen::Infinity>() / (std::sqrt(nd) * ynorm);
  if (lambda >= zero_threshold) {
    out.objective_value = ynorm / std::sqrt(nd);
    out.certificate_residual = std::max(0.0, zero_threshold - lambda);
    out.converged = true;
    return out;
  }

  // fixed point: the minimizer also solves the lasso with lam_k tied to its
  // own root mse
  double rmse = ynorm / std::sqrt(nd);
  int total_sweeps = 0;
  bool interpolating = false;
  for (int it = 0; it < 200; ++it) {
    const double lam_k = 2.0 * lambda * rmse;
    int sweeps = 0;
    lasso_cd(D, lam_k, out.beta, 20000, sweeps);
    total_sweeps += sweeps;
    const double next =
        std::sqrt((D.y - D.X * out.beta).squaredNorm() / nd);
    if (next <= 1e-9 * ynorm / std::sqrt(nd)) {
      interpolating = true;
      break;
    }
    const bool settled = std::abs(next - rmse) <= 1e-13 * (1.0 + rmse);
    rmse = next;
    if (settled) break;
  }
  out.iterations_used = total_sweeps;

  if (interpolating) {
    // The fixed point collapsed onto the interpolation set, where the
    // objective reduces to lambda times the l1 norm and the min-l1
    // interpolator wins.  Its optimality for the full problem is certified
    // through the LP dual alpha of that interpolation problem: scaling it by
    // sqrt(n)*lambda gives a root-mse subgradient whenever its Euclidean
    // norm stays within one, and X'alpha is an l1 subgradient at the
    // interpolator by complementary slackness.
    const dual_certificate cert = solve_dual_certificate(D, norm_kind::linf);
    const double excess =
        std::max(0.0, lambda * std::sqrt(nd) * cert.alpha.norm() - 1.0);
    fit_result mn = min_norm_interpolator(D, norm_kind::linf);
    out.beta = mn.beta;
    out.objective_value = lambda * mn.beta.lpNorm<1>();
    out.certificate_residual = mn.certificate_residual + excess;
    out.converged = mn.converged && cert.converged && excess <= 1e-9;
    return out;
  }

  const VectorXd r = D.y - D.X * out.beta;
  const double rn = r.norm();
  out.objective_value = rn / std::sqrt(nd) + lambda * out.beta.lpNorm<1>();
  double kkt = 0.0;
  for (Index j = 0; j < D.p(); ++j) {
    const double g = D.X.col(j).dot(r) / (std::sqrt(nd) * rn);
    if (out.beta[j] != 0.0)
      kkt = std::max(kkt,
                     std::abs(g - lambda * (out.beta[j] > 0.0 ? 1.0 : -1.0)));
    else
      kkt = std::max(kkt, std::max(0.0, std::abs(g) - lambda));
  }
  out.certificate_residual = kkt;
  out.converged = kkt <= opts.certificate_tolerance;
  return out;
}

}  // namespace advlin
