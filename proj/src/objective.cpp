#include "advlin/objective.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "advlin/kernels.hpp"
#include "advlin/rng.hpp"

namespace advlin {

namespace {

double sign_or_one(double t) { return t < 0.0 ? -1.0 : 1.0; }

// log(1 + exp(-z)) without overflow
double softplus_neg(double z) {
  if (z > 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

// One uniform draw from the attack ball of radius delta, p coordinates.
Eigen::VectorXd sample_ball(rng& g, Eigen::Index p, double delta,
                            norm_kind attack) {
  Eigen::VectorXd d(p);
  switch (attack) {
    case norm_kind::linf:
      for (Eigen::Index j = 0; j < p; ++j)
        d[j] = delta * (2.0 * g.uniform() - 1.0);
      return d;
    case norm_kind::l2: {
      for (Eigen::Index j = 0; j < p; ++j) d[j] = g.normal();
      const double nh = d.norm();
      const double radius =
          delta * std::pow(g.uniform(), 1.0 / static_cast<double>(p));
      if (nh > 0.0) d *= radius / nh;
      return d;
    }
    case norm_kind::l1: {
      // Dirichlet(1,..,1) magnitudes with random signs, scaled radius
      double total = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        d[j] = -std::log(1.0 - g.uniform());
        total += d[j];
      }
      const double radius =
          delta * std::pow(g.uniform(), 1.0 / static_cast<double>(p));
      for (Eigen::Index j = 0; j < p; ++j)
        d[j] *= (g.rademacher() * radius) / total;
      return d;
    }
  }
  throw std::logic_error("unknown norm kind");
}

}  // namespace

double adv_risk(const Eigen::VectorXd& beta, const dataset& D,
                const adv_config& cfg) {
  const Eigen::VectorXd r = D.y - kernels::matvec(D.X, beta);
  const double margin = cfg.delta * norm(beta, dual_kind(cfg.attack));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double t = std::abs(r[i]) + margin;
    acc += t * t;
  }
  return acc / static_cast<double>(D.n());
}

Eigen::MatrixXd worst_case_perturbations(const Eigen::VectorXd& beta,
                                         const dataset& D,
                                         const adv_config& cfg) {
  const Eigen::Index n = D.n();
  const Eigen::Index p = D.p();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, p);
  if (cfg.delta == 0.0 || beta.isZero(0.0)) return P;
  // h attains h.beta = ||beta||_* with ||h||_attack <= 1; pushing x_i by
  // -sign(r_i) * delta * h grows the absolute residual by delta*||beta||_*.
  const Eigen::VectorXd h = norm_subgradient(beta, dual_kind(cfg.attack));
  const Eigen::VectorXd r = D.y - kernels::matvec(D.X, beta);
  for (Eigen::Index i = 0; i < n; ++i)
    P.row(i) = (-sign_or_one(r[i]) * cfg.delta) * h.transpose();
  return P;
}

double adv_risk_sampled(const Eigen::VectorXd& beta, const dataset& D,
                        const adv_config& cfg, int samples,
                        std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const Eigen::Index n = D.n();
  const Eigen::Index p = D.p();
  const Eigen::VectorXd r = D.y - kernels::matvec(D.X, beta);
  const double margin = cfg.delta * norm(beta, dual_kind(cfg.attack));
  Eigen::VectorXd row_worst(n);
  // each (row, sample) pair owns an independent stream, so the result does
  // not depend on how rows are assigned to threads
  const auto ns = static_cast<std::uint64_t>(samples);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    // constructed worst case first: |r_i| + delta*||beta||_*
    double worst = std::abs(r[i]) + margin;
    for (int s = 0; s < samples; ++s) {
      rng g(seed, "advsample", static_cast<std::uint64_t>(i) * ns +
                                   static_cast<std::uint64_t>(s));
      const Eigen::VectorXd dx = sample_ball(g, p, cfg.delta, cfg.attack);
      const double loss = std::abs(r[i] - dx.dot(beta));
      if (loss > worst) worst = loss;
    }
    row_worst[i] = worst * worst;
  }
  return row_worst.sum() / static_cast<double>(n);
}

double adv_loss_general(double inner, double y, double margin,
                        general_loss_kind kind) {
  if (margin < 0.0) throw std::invalid_argument("margin must be >= 0");
  const bool classification =
      kind == general_loss_kind::hinge || kind == general_loss_kind::logistic;
  if (classification && y != 1.0 && y != -1.0)
    throw std::invalid_argument("classification labels must be -1 or +1");
  double worst = -std::numeric_limits<double>::infinity();
  for (double s : {-1.0, 1.0}) {
    const double shifted = inner + s * margin;
    double v = 0.0;
    switch (kind) {
      case general_loss_kind::squared_regression:
        v = (y - shifted) * (y - shifted);
        break;
      case general_loss_kind::absolute_regression:
        v = std::abs(y - shifted);
        break;
      case general_loss_kind::hinge:
        v = std::max(0.0, 1.0 - y * shifted);
        break;
      case general_loss_kind::logistic:
        v = softplus_neg(y * shifted);
        break;
    }
    worst = std::max(worst, v);
  }
  return worst;
}

double robust_colset_worst_value(const Eigen::VectorXd& beta, const dataset& D,
                                 double delta) {
  const Eigen::VectorXd r = D.y - kernels::matvec(D.X, beta);
  return r.norm() + delta * beta.lpNorm<1>();
}

double adv_test_mse(const Eigen::VectorXd& beta, const dataset& Dtest,
                    const adv_config& cfg) {
  if (beta.size() != Dtest.p())
    throw std::invalid_argument("feature dimension mismatch");
  return adv_risk(beta, Dtest, cfg);
}

}  // namespace advlin
