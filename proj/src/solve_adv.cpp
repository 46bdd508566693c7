#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "advlin/kernels.hpp"
#include "advlin/solvers.hpp"
#include "detail.hpp"

// Adversarial-risk minimization.  The objective
//
//   F(t) = (1/n) sum_i (|y_i - m_i't| + delta*||phi(t)||_reg)^2,  phi = S^T t
//
// is convex and piecewise smooth with kinks on the interpolation manifolds
// {r_i = 0} and at the regularizer's nondifferentiability set.  The driver
// minimizes Moreau-envelope smoothings with an accelerated gradient method,
// shrinking the smoothing parameter geometrically; after each stage the
// iterate's active structure (rows interpolated to within the smoothing
// scale, coefficients at kinks) is extracted and the exact objective is
// minimized on that structure by an equality-constrained least-squares
// polish.  A candidate is accepted only when the subgradient-selection
// residual passes the certificate tolerance, so correctness rests on the
// certificate rather than on the iteration scheme.

namespace advlin {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct problem {
  const MatrixXd& M;   // n x q design (X, or X S^T for the linear-map case)
  const VectorXd& y;
  const MatrixXd* S;   // nullable; phi = S^T theta when present
  double delta;
  norm_kind reg;       // dual of the attack norm

  Index n() const { return M.rows(); }
  Index q() const { return M.cols(); }
  Index m() const { return S ? S->cols() : M.cols(); }

  VectorXd phi(const VectorXd& th) const {
    if (S) return S->transpose() * th;
    return th;
  }
  VectorXd pull(const VectorXd& g) const {  // chain rule through phi
    if (S) return (*S) * g;
    return g;
  }
};

double huber(double t, double mu) {
  const double a = std::abs(t);
  return a <= mu ? t * t / (2.0 * mu) : a - 0.5 * mu;
}

double dhuber(double t, double mu) { return std::clamp(t / mu, -1.0, 1.0); }

// Moreau envelope of the regularizer norm and its gradient.
double env_reg(const VectorXd& phi, norm_kind reg, double mu, VectorXd& grad) {
  switch (reg) {
    case norm_kind::l1: {
      double val = 0.0;
      grad.resize(phi.size());
      for (Index j = 0; j < phi.size(); ++j) {
        val += huber(phi[j], mu);
        grad[j] = dhuber(phi[j], mu);
      }
      return val;
    }
    case norm_kind::l2: {
      const double nv = phi.norm();
      if (nv <= mu) {
        grad = phi / mu;
        return nv * nv / (2.0 * mu);
      }
      grad = phi / nv;
      return nv - 0.5 * mu;
    }
    case norm_kind::linf: {
      grad = detail::project_l1_ball(phi / mu, 1.0);
      const VectorXd prox = phi - mu * grad;
      return norm(prox, norm_kind::linf) +
             (prox - phi).squaredNorm() / (2.0 * mu);
    }
  }
  throw std::logic_error("unknown norm kind");
}

double smoothed_value(const problem& P, const VectorXd& th, double mu,
                      VectorXd* grad_out) {
  const VectorXd r = P.y - kernels::matvec(P.M, th);
  const VectorXd phi = P.phi(th);
  VectorXd gphi;
  const double G = env_reg(phi, P.reg, mu, gphi);
  const Index n = P.n();
  double F = 0.0;
  double term_sum = 0.0;
  VectorXd u(n);
  for (Index i = 0; i < n; ++i) {
    const double term = huber(r[i], mu) + P.delta * G;
    F += term * term;
    term_sum += term;
    u[i] = term * dhuber(r[i], mu);
  }
  F /= static_cast<double>(n);
  if (grad_out) {
    *grad_out = (-2.0 / n) * kernels::matvec_t(P.M, u) +
                (2.0 * P.delta * term_sum / n) * P.pull(gphi);
  }
  return F;
}

// Accelerated gradient with backtracking and function-value restart on the
// smoothed objective.  Returns iterations spent; L is carried across stages.
int fista_stage(const problem& P, double mu, VectorXd& th, double& L,
                double rel_tol, int max_iter) {
  VectorXd x = th, xp = th;
  double t = 1.0;
  double fbest = smoothed_value(P, x, mu, nullptr);
  int since_best = 0;
  int iter = 0;
  VectorXd g;
  for (; iter < max_iter; ++iter) {
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    VectorXd z = x + ((t - 1.0) / tn) * (x - xp);
    const double fz = smoothed_value(P, z, mu, &g);
    const double g2 = g.squaredNorm();
    VectorXd xn;
    double fn;
    for (;;) {
      xn = z - g / L;
      fn = smoothed_value(P, xn, mu, nullptr);
      if (fn <= fz - 0.5 * g2 / L || L > 1e18) break;
      L *= 2.0;
    }
    xp = x;
    x = xn;
    if (fn > fbest) {
      t = 1.0;  // restart kills the momentum after a backslide
    } else {
      t = tn;
      if (fbest - fn <= rel_tol * std::max(1.0, std::abs(fbest)))
        ++since_best;
      else
        since_best = 0;
      fbest = fn;
    }
    L *= 0.97;  // gentle step-size recovery between backtracks
    if (since_best >= 12) break;
  }
  th = x;
  return iter;
}

struct structure {
  std::vector<Index> interp;  // rows treated as exactly interpolated
  std::vector<Index> kinks;   // phi coordinates pinned to zero (l1 reg)
  VectorXd row_sign;          // sign of r_i for rows not in interp
  VectorXd phi_sign;          // sign pattern of phi off the kinks (l1 reg)
};

structure identify(const problem& P, const VectorXd& th, double row_tol,
                   double kink_tol) {
  structure st;
  const VectorXd r = P.y - kernels::matvec(P.M, th);
  const VectorXd phi = P.phi(th);
  st.row_sign.resize(P.n());
  for (Index i = 0; i < P.n(); ++i) {
    if (std::abs(r[i]) <= row_tol) {
      st.interp.push_back(i);
      st.row_sign[i] = 0.0;
    } else {
      st.row_sign[i] = r[i] > 0.0 ? 1.0 : -1.0;
    }
  }
  if (P.reg == norm_kind::l1) {
    st.phi_sign = VectorXd::Zero(P.m());
    for (Index j = 0; j < P.m(); ++j) {
      if (std::abs(phi[j]) <= kink_tol)
        st.kinks.push_back(j);
      else
        st.phi_sign[j] = phi[j] > 0.0 ? 1.0 : -1.0;
    }
  }
  return st;
}

double exact_objective(const problem& P, const VectorXd& th);

// Damped Newton minimization of the objective restricted to the smooth piece
// picked out by fixed residual signs and the equality constraints C th = d.
// On its piece the objective is twice differentiable with a positive
// semidefinite Hessian, and the line search is run on the exact (convex,
// global) objective, so a wrong piece costs nothing beyond a rejected step.
VectorXd newton_l2(const problem& P, const structure& st, VectorXd th,
                   const MatrixXd& C, const VectorXd& d) {
  const Index n = P.n();
  const Index q = P.q();
  const Index nc = C.rows();

  if (nc > 0) th += C.completeOrthogonalDecomposition().solve(d - C * th);
  if (!th.allFinite()) return VectorXd();

  const MatrixXd GG =
      P.S ? MatrixXd((*P.S) * P.S->transpose()) : MatrixXd::Identity(q, q);

  double fcur = exact_objective(P, th);
  for (int it = 0; it < 80; ++it) {
    const VectorXd phi = P.phi(th);
    const double hnorm = phi.norm();
    if (hnorm <= 1e-14) return VectorXd();  // zero is its own candidate
    const VectorXd dh = (P.delta / hnorm) * P.pull(phi);  // gradient of h
    const double h = P.delta * hnorm;

    VectorXd grad = VectorXd::Zero(q);
    MatrixXd H = MatrixXd::Zero(q, q);
    double total = 0.0;
    Index ni = 0;
    for (Index i = 0; i < n; ++i) {
      if (st.row_sign[i] == 0.0) {
        ++ni;
        total += h;
        continue;
      }
      const double qi = st.row_sign[i] * (P.y[i] - P.M.row(i).dot(th));
      const double u = qi + h;
      const VectorXd ai = dh - st.row_sign[i] * P.M.row(i).transpose();
      grad += u * ai;
      H += ai * ai.transpose();
      total += u;
    }
    grad += static_cast<double>(ni) * h * dh;
    H += static_cast<double>(ni) * dh * dh.transpose();
    H += (total * P.delta / hnorm) *
         (GG - (1.0 / (P.delta * P.delta)) * dh * dh.transpose());
    grad *= 2.0 / static_cast<double>(n);
    H *= 2.0 / static_cast<double>(n);

    MatrixXd K = MatrixXd::Zero(q + nc, q + nc);
    K.topLeftCorner(q, q) = H;
    if (nc > 0) {
      K.topRightCorner(q, nc) = C.transpose();
      K.bottomLeftCorner(nc, q) = C;
    }
    VectorXd rhs = VectorXd::Zero(q + nc);
    rhs.head(q) = -grad;

    VectorXd step;
    double ridge = 1e-13 * (1.0 + H.diagonal().maxCoeff());
    for (int attempt = 0; attempt < 6; ++attempt) {
      MatrixXd Kr = K;
      Kr.topLeftCorner(q, q).diagonal().array() += ridge;
      Eigen::PartialPivLU<MatrixXd> lu(Kr);
      step = lu.solve(rhs);
      if (step.allFinite()) break;
      ridge *= 1e3;
    }
    if (!step.allFinite()) return th;
    const VectorXd dth = step.head(q);
    const double slope = grad.dot(dth);
    if (slope >= 0.0) return th;

    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls) {
      const VectorXd trial = th + t * dth;
      const double f = exact_objective(P, trial);
      if (f <= fcur + 1e-4 * t * slope) {
        th = trial;
        fcur = f;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) return th;
    if (t * dth.norm() <= 1e-15 * (1.0 + th.norm())) return th;
  }
  return th;
}

// Exact minimization of the objective restricted to the smooth piece picked
// out by `st`: residual signs fixed off the interpolation set, kink
// coordinates pinned, the regularizer locally linear (l1) or smooth and
// minimized by Newton (l2).  Empty result on structural contradiction.
VectorXd polish(const problem& P, const structure& st, const VectorXd& th0) {
  const Index n = P.n();
  const Index q = P.q();
  const Index na = static_cast<Index>(st.interp.size());
  const Index nz = static_cast<Index>(st.kinks.size());

  // equality constraints: interpolated rows, pinned kinks
  auto build_constraints = [&](const structure& s, MatrixXd& C, VectorXd& d) {
    const Index ai = static_cast<Index>(s.interp.size());
    const Index zi = static_cast<Index>(s.kinks.size());
    C.resize(ai + zi, q);
    d.resize(ai + zi);
    for (Index a = 0; a < ai; ++a) {
      C.row(a) = P.M.row(s.interp[a]);
      d[a] = P.y[s.interp[a]];
    }
    for (Index z = 0; z < zi; ++z) {
      VectorXd ej = VectorXd::Zero(P.m());
      ej[s.kinks[z]] = 1.0;
      C.row(ai + z) = P.pull(ej).transpose();
      d[ai + z] = 0.0;
    }
  };

  MatrixXd C(na + nz, q);
  VectorXd d(na + nz);
  build_constraints(st, C, d);

  auto assemble = [&](const structure& s, const VectorXd& wvec,
                      const MatrixXd& Cc, const VectorXd& dc) {
    MatrixXd Q(n, q);
    VectorXd b(n);
    for (Index i = 0; i < n; ++i) {
      if (s.row_sign[i] == 0.0) {
        Q.row(i) = -P.delta * wvec.transpose();
        b[i] = 0.0;
      } else {
        Q.row(i) = s.row_sign[i] * P.M.row(i) - P.delta * wvec.transpose();
        b[i] = s.row_sign[i] * P.y[i];
      }
    }
    return detail::equality_constrained_lsq(Q, b, Cc, dc);
  };

  if (P.reg == norm_kind::l1) {
    // The restricted problem carries sign inequalities alongside the
    // equality structure.  Solve the equality-constrained quadratic, then
    // pin whatever left its sign region and re-solve: each augmentation is
    // forced by a first-order violation, so the loop terminates at a point
    // that is stationary on its own piece.
    structure cur = st;
    const double tiny = 1e-13 * (1.0 + kernels::max_abs(P.y));
    for (Index round = 0; round <= n + P.m(); ++round) {
      MatrixXd Cc;
      VectorXd dc;
      build_constraints(cur, Cc, dc);
      const VectorXd th = assemble(cur, P.pull(cur.phi_sign), Cc, dc);
      if (th.size() == 0 || !th.allFinite()) return VectorXd();
      bool consistent = true;
      const VectorXd phi = P.phi(th);
      for (Index j = 0; j < P.m(); ++j) {
        if (cur.phi_sign[j] != 0.0 && cur.phi_sign[j] * phi[j] < -tiny) {
          cur.kinks.push_back(j);
          cur.phi_sign[j] = 0.0;
          consistent = false;
        }
      }
      const VectorXd r = P.y - kernels::matvec(P.M, th);
      for (Index i = 0; i < n; ++i) {
        if (cur.row_sign[i] != 0.0 && cur.row_sign[i] * r[i] < -tiny) {
          cur.interp.push_back(i);
          cur.row_sign[i] = 0.0;
          consistent = false;
        }
      }
      if (consistent) return th;
    }
    return VectorXd();
  }
  if (P.reg == norm_kind::l2) {
    return newton_l2(P, st, th0, C, d);
  }
  // linf regularizer: only the generic single-argmax piece is polished
  const VectorXd phi = P.phi(th0);
  Index jmax = 0;
  const double mx = phi.cwiseAbs().maxCoeff(&jmax);
  if (mx <= 0.0) return VectorXd();
  VectorXd e = VectorXd::Zero(P.m());
  e[jmax] = phi[jmax] > 0.0 ? 1.0 : -1.0;
  return assemble(P.pull(e));
}

// Minimum Euclidean norm over admissible subgradient selections at th.
double residual_core(const problem& P, const VectorXd& th) {
  const Index n = P.n();
  const VectorXd Mt = kernels::matvec(P.M, th);
  const VectorXd r = P.y - Mt;
  const VectorXd phi = P.phi(th);
  const double g = norm(phi, P.reg);
  const double dg = P.delta * g;

  const double row_scale =
      1e-12 * (1.0 + kernels::max_abs(P.y) + kernels::max_abs(Mt));
  std::vector<Index> interp;
  VectorXd wgt = VectorXd::Zero(n);  // fixed-sign row weights
  double r_l1 = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double a = std::abs(r[i]);
    if (a <= row_scale) {
      interp.push_back(i);
    } else {
      wgt[i] = (a + dg) * (r[i] > 0.0 ? 1.0 : -1.0);
      r_l1 += a;
    }
  }
  const double coef_v = (2.0 * P.delta / n) * (r_l1 + n * dg);

  VectorXd c = (-2.0 / n) * kernels::matvec_t(P.M, wgt);

  MatrixXd B(P.q(), 0);
  if (dg > 0.0 && !interp.empty()) {
    B.resize(P.q(), static_cast<Index>(interp.size()));
    for (Index a = 0; a < B.cols(); ++a)
      B.col(a) = (-2.0 * dg / n) * P.M.row(interp[a]).transpose();
  }

  const double kink_scale = 1e-12 * (1.0 + kernels::max_abs(phi));
  const MatrixXd empty(P.q(), 0);

  switch (P.reg) {
    case norm_kind::l1: {
      std::vector<Index> zeros;
      VectorXd signs = VectorXd::Zero(P.m());
      for (Index j = 0; j < P.m(); ++j) {
        if (std::abs(phi[j]) <= kink_scale)
          zeros.push_back(j);
        else
          signs[j] = phi[j] > 0.0 ? 1.0 : -1.0;
      }
      c += coef_v * P.pull(signs);
      if (coef_v > 0.0 && !zeros.empty()) {
        MatrixXd Bz(P.q(), B.cols() + static_cast<Index>(zeros.size()));
        Bz.leftCols(B.cols()) = B;
        for (std::size_t z = 0; z < zeros.size(); ++z) {
          VectorXd ej = VectorXd::Zero(P.m());
          ej[zeros[z]] = 1.0;
          Bz.col(B.cols() + static_cast<Index>(z)) = coef_v * P.pull(ej);
        }
        B.swap(Bz);
      }
      return detail::min_selection_norm(c, B, empty,
                                        detail::free_part::none);
    }
    case norm_kind::l2: {
      if (g <= kink_scale) {
        // at phi = 0 the row selections vanish with the zero regularizer
        if (!P.S) return std::max(0.0, c.norm() - coef_v);
        return detail::min_selection_norm(c, empty, coef_v * (*P.S),
                                          detail::free_part::l2_ball);
      }
      c += coef_v * P.pull(phi / g);
      return detail::min_selection_norm(c, B, empty, detail::free_part::none);
    }
    case norm_kind::linf: {
      if (g <= kink_scale) {
        MatrixXd E = coef_v * (P.S ? *P.S : MatrixXd::Identity(P.q(), P.q()));
        return detail::min_selection_norm(c, empty, E,
                                          detail::free_part::l1_ball);
      }
      std::vector<Index> ties;
      for (Index j = 0; j < P.m(); ++j)
        if (std::abs(phi[j]) >= g - kink_scale) ties.push_back(j);
      MatrixXd E(P.q(), static_cast<Index>(ties.size()));
      for (std::size_t k = 0; k < ties.size(); ++k) {
        VectorXd ej = VectorXd::Zero(P.m());
        ej[ties[k]] = phi[ties[k]] > 0.0 ? 1.0 : -1.0;
        E.col(static_cast<Index>(k)) = coef_v * P.pull(ej);
      }
      return detail::min_selection_norm(c, B, E, detail::free_part::simplex);
    }
  }
  throw std::logic_error("unknown norm kind");
}

double exact_objective(const problem& P, const VectorXd& th) {
  const VectorXd r = P.y - kernels::matvec(P.M, th);
  const double dg = P.delta * norm(P.phi(th), P.reg);
  double F = 0.0;
  for (Index i = 0; i < P.n(); ++i) {
    const double t = std::abs(r[i]) + dg;
    F += t * t;
  }
  return F / static_cast<double>(P.n());
}

// threshold-ladder splits of a magnitude profile: for each decade, how many
// of the smallest entries fall below it (distinct counts only)
std::vector<Index> ladder_splits(const VectorXd& mags,
                                 const std::vector<Index>& order,
                                 double scale, Index cap) {
  std::vector<Index> sizes{0};
  const Index n = mags.size();
  for (double t = 1e-2; t >= 1e-13; t *= 0.1) {
    Index k = 0;
    while (k < n &&
           std::abs(mags[order[static_cast<std::size_t>(k)]]) <= t * scale)
      ++k;
    if (k <= cap && k != sizes.back()) sizes.push_back(k);
  }
  return sizes;
}

std::vector<Index> sorted_by_abs(const VectorXd& v) {
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(v[a]) < std::abs(v[b]);
  });
  return order;
}

// Alternate structure identification and restricted polish from a starting
// point, re-reading the structure off each polished iterate.  This is an
// active-set refinement: each round solves the smooth piece exactly, so it
// settles in a handful of rounds once the structure stops changing.  Neither
// the interpolation set nor the kink set is read at a single threshold;
// every split of the sorted magnitudes that some decade of a threshold
// ladder picks out is polished, which makes the refinement robust to a
// crude start.
void refine(const problem& P, VectorXd th,
            const std::function<void(const VectorXd&)>& offer) {
  const Index n = P.n();
  double prev = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 10; ++round) {
    const VectorXd r = P.y - kernels::matvec(P.M, th);
    const std::vector<Index> rorder = sorted_by_abs(r);
    const std::vector<Index> rsizes = ladder_splits(
        r, rorder, 1.0 + kernels::max_abs(P.y), std::min(n, P.q()));

    const VectorXd phi = P.phi(th);
    std::vector<Index> korder;
    std::vector<Index> ksizes{0};
    if (P.reg == norm_kind::l1) {
      korder = sorted_by_abs(phi);
      ksizes =
          ladder_splits(phi, korder, 1.0 + kernels::max_abs(phi), P.m());
    }

    double best = std::numeric_limits<double>::infinity();
    VectorXd bestv;
    int tried = 0;
    for (Index k : rsizes) {
      for (Index kk : ksizes) {
        if (++tried > 72) break;
        structure st;
        st.row_sign = VectorXd::Zero(n);
        for (Index i = 0; i < n; ++i) {
          const Index row = rorder[static_cast<std::size_t>(i)];
          if (i < k)
            st.interp.push_back(row);
          else
            st.row_sign[row] = r[row] > 0.0 ? 1.0 : -1.0;
        }
        if (P.reg == norm_kind::l1) {
          st.phi_sign = VectorXd::Zero(P.m());
          for (Index j = 0; j < P.m(); ++j) {
            const Index coord = korder[static_cast<std::size_t>(j)];
            if (j < kk)
              st.kinks.push_back(coord);
            else
              st.phi_sign[coord] = phi[coord] > 0.0 ? 1.0 : -1.0;
          }
          std::sort(st.kinks.begin(), st.kinks.end());
        }
        const VectorXd next = polish(P, st, th);
        if (next.size() == 0 || !next.allFinite()) continue;
        offer(next);
        const double obj = exact_objective(P, next);
        if (obj < best) {
          best = obj;
          bestv = next;
        }
      }
    }
    if (bestv.size() == 0 || best >= prev * (1.0 - 1e-15)) return;
    prev = best;
    th = bestv;
  }
}

struct candidate_pool {
  VectorXd best_beta;
  double best_obj = std::numeric_limits<double>::infinity();
  double best_res = std::numeric_limits<double>::infinity();
  VectorXd cert_beta;
  double cert_obj = std::numeric_limits<double>::infinity();
  double cert_res = std::numeric_limits<double>::infinity();
  bool has_cert = false;

  void offer(const problem& P, const VectorXd& th, double tol) {
    if (th.size() == 0) return;
    if (!th.allFinite()) return;
    const double obj = exact_objective(P, th);
    const double res = residual_core(P, th);
    if (obj < best_obj) {
      best_obj = obj;
      best_res = res;
      best_beta = th;
    }
    if (res <= tol && obj < cert_obj) {
      cert_obj = obj;
      cert_res = res;
      cert_beta = th;
      has_cert = true;
    }
  }
};

fit_result solve_core(const problem& P, const solver_options& opts,
                      const std::function<VectorXd()>& interp_candidate = {}) {
  fit_result out;
  const Index q = P.q();

  if (P.delta == 0.0) {
    // plain least squares; minimum-norm solution when rank deficient
    const VectorXd th =
        P.M.completeOrthogonalDecomposition().solve(P.y);
    out.beta = th;
    out.objective_value = exact_objective(P, th);
    out.certificate_residual = residual_core(P, th);
    out.converged = out.certificate_residual <= opts.certificate_tolerance;
    return out;
  }

  candidate_pool pool;
  const double tol = opts.certificate_tolerance;

  // the zero vector is always a candidate (and the optimum for large delta)
  pool.offer(P, VectorXd::Zero(q), tol);
  if (pool.has_cert) {
    out.beta = pool.cert_beta;
    out.objective_value = pool.cert_obj;
    out.certificate_residual = pool.cert_res;
    out.converged = true;
    return out;
  }

  // warm start at the minimum-norm least-squares point
  VectorXd th = P.M.completeOrthogonalDecomposition().solve(P.y);
  pool.offer(P, th, tol);

  // Below the interpolation transition the minimizer is the interpolator of
  // smallest regularizer norm, a point continuation approaches only slowly.
  // When the least-squares fit shows the data can be interpolated, offer that
  // point directly and let the certificate decide whether delta is below the
  // transition.
  if (interp_candidate && !pool.has_cert) {
    const double feas = kernels::max_abs(P.y - kernels::matvec(P.M, th));
    if (feas <= 1e-8 * (1.0 + kernels::max_abs(P.y)))
      pool.offer(P, interp_candidate(), tol);
  }

  double L = 1.0;
  int used = 0;
  const int stage_cap = std::max(300, opts.max_iterations / 24);
  for (double mu = 1.0; mu >= opts.smoothing_floor && !pool.has_cert;
       mu *= 0.1) {
    if (used >= opts.max_iterations) break;
    const int budget = std::min(stage_cap, opts.max_iterations - used);
    used += fista_stage(P, mu, th, L, opts.objective_tolerance, budget);
    pool.offer(P, th, tol);

    const double row_scale = 1e-10 * (1.0 + kernels::max_abs(P.y));
    for (double c : {10.0, 1.0}) {
      const structure st =
          identify(P, th, c * mu + row_scale, c * mu + 1e-12);
      const VectorXd polished = polish(P, st, th);
      pool.offer(P, polished, tol);
      if (pool.has_cert) break;
    }
    if (!pool.has_cert && mu <= 1e-4) {
      refine(P, pool.best_beta,
             [&](const VectorXd& c) { pool.offer(P, c, tol); });
    }
  }

  out.iterations_used = used;
  if (pool.has_cert) {
    out.beta = pool.cert_beta;
    out.objective_value = pool.cert_obj;
    out.certificate_residual = pool.cert_res;
    out.converged = true;
  } else {
    out.beta = pool.best_beta;
    out.objective_value = pool.best_obj;
    out.certificate_residual = pool.best_res;
    out.converged = false;
  }
  return out;
}

}  // namespace

fit_result solve_adv(const dataset& D, const adv_config& cfg,
                     const solver_options& opts) {
  if (cfg.delta < 0.0) throw std::invalid_argument("delta must be >= 0");
  const problem P{D.X, D.y, nullptr, cfg.delta, dual_kind(cfg.attack)};
  return solve_core(P, opts, [&]() -> VectorXd {
    try {
      const fit_result mn = min_norm_interpolator(D, cfg.attack);
      if (mn.converged) return mn.beta;
    } catch (const std::exception&) {
    }
    return VectorXd();
  });
}

fit_result solve_adv_linmap(const dataset& D, const Eigen::MatrixXd& S,
                            const adv_config& cfg,
                            const solver_options& opts) {
  if (cfg.delta < 0.0) throw std::invalid_argument("delta must be >= 0");
  if (S.cols() != D.p())
    throw std::invalid_argument("S must have one column per input feature");
  if (!S.allFinite()) throw std::invalid_argument("S must be finite");
  const MatrixXd M = D.X * S.transpose();
  const problem P{M, D.y, &S, cfg.delta, dual_kind(cfg.attack)};
  return solve_core(P, opts, [&]() -> VectorXd {
    // Minimize the regularizer over interpolating points of the restricted
    // model: phi = S^T theta ranges over the row space of S, so solve the
    // plain interpolation problem with extra zero-valued rows spanning the
    // orthogonal complement, then map the solution back to theta.
    try {
      const Index k = S.rows(), d = S.cols(), n = D.n();
      Eigen::HouseholderQR<MatrixXd> qr(S.transpose());
      const MatrixXd Q = qr.householderQ();
      const Index extra = d - k;
      MatrixXd Xext(n + extra, d);
      Xext.topRows(n) = D.X;
      if (extra > 0) Xext.bottomRows(extra) = Q.rightCols(extra).transpose();
      VectorXd yext = VectorXd::Zero(n + extra);
      yext.head(n) = D.y;
      const fit_result mn =
          min_norm_interpolator(dataset{Xext, yext}, cfg.attack);
      if (!mn.converged) return VectorXd();
      Eigen::LLT<MatrixXd> llt(S * S.transpose());
      if (llt.info() != Eigen::Success) return VectorXd();
      return llt.solve(S * mn.beta);
    } catch (const std::exception&) {
    }
    return VectorXd();
  });
}

double optimality_residual(const Eigen::VectorXd& beta, const dataset& D,
                           const adv_config& cfg) {
  if (beta.size() != D.p())
    throw std::invalid_argument("beta length must match feature count");
  const problem P{D.X, D.y, nullptr, cfg.delta, dual_kind(cfg.attack)};
  return residual_core(P, beta);
}

}  // namespace advlin
