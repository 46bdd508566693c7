#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "advlin/solvers.hpp"
#include "detail.hpp"

// Minimum-norm interpolation.  The l2 case is least-norm least squares on
// the row space.  The l1 case (linf attack) runs operator splitting on
// min ||z||_1 s.t. Xb = y, b = z, with an exact cached projection onto the
// affine constraint, then purifies the solution to a vertex of the optimal
// face by walking null-space directions of the active columns until
// coordinates hit zero.  The linf case (l1 attack) swaps the shrinkage step
// for the linf prox and skips purification.  Every result is certified by
// strong duality against solve_dual_certificate.

namespace advlin {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// move along null directions of the active columns until enough coordinates
// hit exact zero that the active submatrix has full column rank
void purify_to_vertex(const MatrixXd& X, VectorXd& beta) {
  const Index p = X.cols();
  const double scale = beta.cwiseAbs().maxCoeff();
  std::vector<Index> sup;
  for (Index j = 0; j < p; ++j)
    if (std::abs(beta[j]) > 1e-11 * (1.0 + scale))
      sup.push_back(j);
    else
      beta[j] = 0.0;

  for (int guard = 0; guard < 4 * static_cast<int>(p); ++guard) {
    const Index k = static_cast<Index>(sup.size());
    if (k == 0) return;
    MatrixXd Xs(X.rows(), k);
    for (Index c = 0; c < k; ++c) Xs.col(c) = X.col(sup[c]);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(Xs.transpose() * Xs);
    qr.setThreshold(1e-12);
    const Index rank = qr.rank();
    if (rank >= k) return;  // basic solution reached
    // one null direction of Xs
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(Xs);
    cod.setThreshold(1e-12);
    const MatrixXd Z = cod.matrixZ().transpose();
    VectorXd dir = Z.rightCols(k - cod.rank()).col(0);
    // P is column-permuted inside COD: null(Xs) = P * trailing Z columns
    dir = cod.colsPermutation() * dir;
    if (dir.cwiseAbs().maxCoeff() <= 0.0) return;

    VectorXd bs(k);
    for (Index c = 0; c < k; ++c) bs[c] = beta[sup[c]];
    double slope = 0.0;
    for (Index c = 0; c < k; ++c)
      slope += (bs[c] > 0.0 ? 1.0 : -1.0) * dir[c];
    if (slope > 0.0) dir = -dir;

    // first coordinate to cross zero moving in +dir
    double tstar = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < k; ++c) {
      if (bs[c] * dir[c] < 0.0) tstar = std::min(tstar, -bs[c] / dir[c]);
    }
    if (!std::isfinite(tstar)) {
      dir = -dir;  // l1-neutral ray: cross zero the other way
      for (Index c = 0; c < k; ++c)
        if (bs[c] * dir[c] < 0.0) tstar = std::min(tstar, -bs[c] / dir[c]);
      if (!std::isfinite(tstar)) return;
    }
    Index hit = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < k; ++c) {
      if (bs[c] * dir[c] < 0.0) {
        const double t = -bs[c] / dir[c];
        if (t < best) {
          best = t;
          hit = c;
        }
      }
    }
    bs += tstar * dir;
    std::vector<Index> next;
    for (Index c = 0; c < k; ++c) {
      if (c == hit || std::abs(bs[c]) <= 1e-13 * (1.0 + scale)) {
        beta[sup[c]] = 0.0;
      } else {
        beta[sup[c]] = bs[c];
        next.push_back(sup[c]);
      }
    }
    sup.swap(next);
  }
}

// refit exactly on the support (least-norm solve keeps Xb = y to working
// precision after the purification walk)
void refit_support(const MatrixXd& X, const VectorXd& y, VectorXd& beta) {
  std::vector<Index> sup;
  for (Index j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) sup.push_back(j);
  if (sup.empty()) return;
  MatrixXd Xs(X.rows(), static_cast<Index>(sup.size()));
  for (std::size_t c = 0; c < sup.size(); ++c)
    Xs.col(static_cast<Index>(c)) = X.col(sup[c]);
  const VectorXd bs = Xs.completeOrthogonalDecomposition().solve(y);
  for (std::size_t c = 0; c < sup.size(); ++c)
    beta[sup[c]] = bs[static_cast<Index>(c)];
}

}  // namespace

fit_result min_norm_interpolator(const dataset& D, norm_kind attack) {
  const Index p = D.p();
  if (!detail::full_row_rank(D.X))
    throw std::invalid_argument(
        "min_norm_interpolator requires a numerically full-row-rank design");

  const norm_kind reg = dual_kind(attack);
  const dual_certificate cert = solve_dual_certificate(D, attack);

  fit_result out;
  Eigen::LLT<MatrixXd> llt(D.X * D.X.transpose());

  if (attack == norm_kind::l2) {
    out.beta = D.X.transpose() * llt.solve(D.y);
  } else {
    // operator splitting; projection reuses the cached factorization
    const double yscale = 1.0 + D.y.cwiseAbs().maxCoeff();
    double rho = 1.0;
    VectorXd z = VectorXd::Zero(p), u = VectorXd::Zero(p), beta(p);
    const auto proj = [&](const VectorXd& v) -> VectorXd {
      return v - D.X.transpose() * llt.solve(D.X * v - D.y);
    };
    const auto prox = [&](const VectorXd& v, double t) -> VectorXd {
      if (reg == norm_kind::l1) {
        VectorXd out_v(p);
        for (Index j = 0; j < p; ++j) {
          const double a = std::abs(v[j]) - t;
          out_v[j] = a > 0.0 ? (v[j] > 0.0 ? a : -a) : 0.0;
        }
        return out_v;
      }
      return v - t * detail::project_l1_ball(v / t, 1.0);  // prox of linf
    };
    int it = 0;
    for (; it < 50000; ++it) {
      beta = proj(z - u);
      const VectorXd relaxed = 1.7 * beta + (1.0 - 1.7) * z;
      const VectorXd zprev = z;
      z = prox(relaxed + u, 1.0 / rho);
      u += relaxed - z;
      const double rprim = (beta - z).lpNorm<Eigen::Infinity>();
      const double rdual = rho * (z - zprev).lpNorm<Eigen::Infinity>();
      if ((it & 15) == 15) {
        const double gap = norm(beta, reg) - cert.objective;
        if (rprim <= 1e-12 * yscale && gap <= 1e-8 * (1.0 + std::abs(cert.objective)))
          break;
        // residual balancing keeps the splitting well conditioned
        if (rprim > 10.0 * rdual) {
          rho *= 2.0;
          u /= 2.0;
        } else if (rdual > 10.0 * rprim) {
          rho /= 2.0;
          u *= 2.0;
        }
      }
    }
    out.iterations_used = it;
    if (reg == norm_kind::l1) {
      purify_to_vertex(D.X, beta);
      refit_support(D.X, D.y, beta);
    }
    out.beta = beta;
  }

  const double feas =
      (D.X * out.beta - D.y).lpNorm<Eigen::Infinity>() /
      (1.0 + D.y.lpNorm<Eigen::Infinity>());
  const double val = norm(out.beta, reg);
  const double gap =
      std::abs(val - cert.objective) / (1.0 + std::abs(cert.objective));
  out.objective_value = val;
  out.certificate_residual = feas + gap;
  out.converged = feas <= 1e-8 && gap <= 1e-6 && cert.converged;
  return out;
}

}  // namespace advlin
