#include <cmath>
#include <stdexcept>

#include "advlin/solvers.hpp"

// Dual certificates for minimum-norm interpolation:
//   max  y'alpha   s.t.  ||X'alpha||_attack <= 1.
// The l2 case is a closed form through XX'.  The polyhedral cases share one
// dense predictor-corrector interior-point solver on the inequality-form LP
//   max  c'w  s.t.  A w <= b,
// reduced to normal equations A' diag(z/s) A in the (small) w dimension.
// With a degenerate optimal face the central path converges to its analytic
// center, which is the representative this function reports.

namespace advlin {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct lp_result {
  VectorXd w;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Mehrotra predictor-corrector with an infeasible-dual start; w0 must be
// strictly feasible (A w0 < b)
lp_result solve_ineq_lp(const MatrixXd& A, const VectorXd& b,
                        const VectorXd& c, const VectorXd& w0) {
  const Index m = A.rows();
  lp_result out;
  out.w = w0;
  VectorXd s = b - A * w0;
  if (s.minCoeff() <= 0.0)
    throw std::logic_error("interior-point start is not strictly feasible");
  VectorXd z = VectorXd::Ones(m);

  const double bscale = 1.0 + b.cwiseAbs().maxCoeff();
  const double cscale = 1.0 + c.cwiseAbs().maxCoeff();

  for (int it = 0; it < 100; ++it) {
    const VectorXd rp = b - A * out.w - s;          // primal residual
    const VectorXd rd = c - A.transpose() * z;      // dual residual
    const double mu = s.dot(z) / static_cast<double>(m);
    const double gap = std::abs(c.dot(out.w) - b.dot(z)) /
                       (1.0 + std::abs(c.dot(out.w)) + std::abs(b.dot(z)));
    out.iterations = it;
    if (mu <= 1e-12 * bscale * cscale && gap <= 1e-10 &&
        rp.lpNorm<Eigen::Infinity>() <= 1e-10 * bscale &&
        rd.lpNorm<Eigen::Infinity>() <= 1e-10 * cscale) {
      out.converged = true;
      break;
    }

    const VectorXd d = z.cwiseQuotient(s);
    MatrixXd N = A.transpose() * d.asDiagonal() * A;
    Eigen::LLT<MatrixXd> llt(N);
    double tau = 1e-14 * (1.0 + N.diagonal().maxCoeff());
    while (llt.info() != Eigen::Success && tau < 1e30) {
      llt.compute(N + tau * MatrixXd::Identity(N.rows(), N.cols()));
      tau *= 100.0;
    }
    if (llt.info() != Eigen::Success) break;

    // rc is the complementarity target; solving twice reuses the factors
    const auto newton = [&](const VectorXd& rc, VectorXd& dw, VectorXd& ds,
                            VectorXd& dz) {
      const VectorXd t = rp - rc.cwiseQuotient(z);
      dw = llt.solve(rd + A.transpose() * (d.asDiagonal() * t));
      dz = d.asDiagonal() * (A * dw - t);
      ds = (rc - s.cwiseProduct(dz)).cwiseQuotient(z);
    };
    const auto max_step = [&](const VectorXd& v, const VectorXd& dv) {
      double a = 1.0;
      for (Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
      return a;
    };

    VectorXd dw, ds, dz;
    newton(-s.cwiseProduct(z), dw, ds, dz);  // affine predictor
    const double ap = max_step(s, ds);
    const double ad = max_step(z, dz);
    const double mu_aff =
        (s + ap * ds).dot(z + ad * dz) / static_cast<double>(m);
    const double sigma = std::pow(mu_aff / mu, 3.0);

    const VectorXd rc = -s.cwiseProduct(z) - ds.cwiseProduct(dz) +
                        VectorXd::Constant(m, sigma * mu);
    newton(rc, dw, ds, dz);
    const double step_p = std::min(1.0, 0.9995 * max_step(s, ds));
    const double step_d = std::min(1.0, 0.9995 * max_step(z, dz));

    out.w += step_p * dw;
    s += step_p * ds;
    z += step_d * dz;
  }
  out.value = c.dot(out.w);
  return out;
}

dual_certificate closed_form_l2(const dataset& D) {
  dual_certificate cert;
  cert.converged = true;
  if (D.y.lpNorm<Eigen::Infinity>() == 0.0) {
    cert.alpha = VectorXd::Zero(D.n());
    return cert;
  }
  Eigen::LLT<MatrixXd> llt(D.X * D.X.transpose());
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(
        "dual certificate requires a full-row-rank design");
  const VectorXd q = llt.solve(D.y);
  const double v = D.y.dot(q);
  if (!(v > 0.0))
    throw std::invalid_argument(
        "dual certificate requires a full-row-rank design");
  cert.alpha = q / std::sqrt(v);
  cert.objective = std::sqrt(v);
  cert.constraint_norm = norm(D.X.transpose() * cert.alpha, norm_kind::l2);
  return cert;
}

}  // namespace

dual_certificate solve_dual_certificate(const dataset& D, norm_kind attack) {
  const Index n = D.n();
  const Index p = D.p();
  if (attack == norm_kind::l2) return closed_form_l2(D);

  dual_certificate cert;
  if (D.y.lpNorm<Eigen::Infinity>() == 0.0) {
    cert.alpha = VectorXd::Zero(n);
    cert.converged = true;
    return cert;
  }

  lp_result lp;
  if (attack == norm_kind::linf) {
    // ||X'alpha||_inf <= 1 as a box: [X'; -X'] alpha <= 1
    MatrixXd A(2 * p, n);
    A.topRows(p) = D.X.transpose();
    A.bottomRows(p) = -D.X.transpose();
    lp = solve_ineq_lp(A, VectorXd::Ones(2 * p), D.y, VectorXd::Zero(n));
    cert.alpha = lp.w;
  } else {
    // ||X'alpha||_1 <= 1 through the epigraph: w = (alpha, t),
    // +-X'alpha <= t coordinatewise and sum(t) <= 1
    MatrixXd A = MatrixXd::Zero(2 * p + 1, n + p);
    A.block(0, 0, p, n) = D.X.transpose();
    A.block(p, 0, p, n) = -D.X.transpose();
    A.block(0, n, p, p) = -MatrixXd::Identity(p, p);
    A.block(p, n, p, p) = -MatrixXd::Identity(p, p);
    A.row(2 * p).tail(p).setOnes();
    VectorXd b = VectorXd::Zero(2 * p + 1);
    b[2 * p] = 1.0;
    VectorXd c = VectorXd::Zero(n + p);
    c.head(n) = D.y;
    VectorXd w0 = VectorXd::Zero(n + p);
    w0.tail(p).setConstant(1.0 / (2.0 * static_cast<double>(p)));
    lp = solve_ineq_lp(A, b, c, w0);
    cert.alpha = lp.w.head(n);
  }

  cert.objective = D.y.dot(cert.alpha);
  cert.constraint_norm = norm(D.X.transpose() * cert.alpha, attack);
  cert.iterations_used = lp.iterations;
  cert.converged = lp.converged;
  return cert;
}

}  // namespace advlin
