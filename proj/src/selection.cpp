#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "detail.hpp"

namespace advlin::detail {

namespace {

// Exact coordinate descent for min 0.5*||rho||^2, rho = c + B w, w in a box.
// Each coordinate update is an exact clipped minimization, so sweeps decrease
// the objective monotonically and converge to the box optimum.
double box_cd(const Eigen::MatrixXd& B, Eigen::VectorXd& w,
              Eigen::VectorXd& rho, int max_sweeps) {
  const Eigen::Index k = B.cols();
  if (k == 0) return rho.norm();
  Eigen::VectorXd colsq(k);
  for (Eigen::Index j = 0; j < k; ++j) colsq[j] = B.col(j).squaredNorm();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (colsq[j] == 0.0) continue;
      const double grad = B.col(j).dot(rho);
      const double wj = std::clamp(w[j] - grad / colsq[j], -1.0, 1.0);
      const double step = wj - w[j];
      if (step != 0.0) {
        rho += step * B.col(j);
        w[j] = wj;
        moved += std::abs(step) * std::sqrt(colsq[j]);
      }
    }
    if (moved <= 1e-16 * (1.0 + rho.norm())) break;
  }
  return rho.norm();
}

// Active-set solve of min 0.5*||c + B w||^2 over the box [-1,1]^k, in the
// style of bounded-variable least squares: repeatedly solve the free-set
// least-squares problem exactly, clip along the segment to the first bound
// when the solution leaves the box, and release the worst first-order
// violator among the bound variables.  Terminates at an exact KKT point of
// this convex problem (up to the iteration cap; the returned value is always
// a feasible objective, so a premature stop can only overstate the minimum).
double box_active_set(const Eigen::VectorXd& c, const Eigen::MatrixXd& B,
                      Eigen::VectorXd& w) {
  using Eigen::Index;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const Index k = B.cols();
  if (k == 0) return c.norm();

  std::vector<int> state(static_cast<std::size_t>(k));  // -1, +1 bound; 0 free
  for (Index j = 0; j < k; ++j) {
    if (w[j] >= 1.0)
      state[static_cast<std::size_t>(j)] = 1;
    else if (w[j] <= -1.0)
      state[static_cast<std::size_t>(j)] = -1;
    else
      state[static_cast<std::size_t>(j)] = 0;
  }

  const double gtol = 1e-13 * (1.0 + c.norm()) *
                      (1.0 + B.colwise().norm().maxCoeff());
  const int cap = static_cast<int>(6 * k + 60);
  for (int it = 0; it < cap; ++it) {
    std::vector<Index> F;
    for (Index j = 0; j < k; ++j)
      if (state[static_cast<std::size_t>(j)] == 0) F.push_back(j);

    if (!F.empty()) {
      VectorXd fixed = c;
      for (Index j = 0; j < k; ++j)
        if (state[static_cast<std::size_t>(j)] != 0)
          fixed += w[j] * B.col(j);
      MatrixXd BF(B.rows(), static_cast<Index>(F.size()));
      for (std::size_t a = 0; a < F.size(); ++a)
        BF.col(static_cast<Index>(a)) = B.col(F[a]);
      const VectorXd z =
          BF.completeOrthogonalDecomposition().solve(-fixed);

      bool inside = true;
      double tmax = 1.0;
      Index block = -1;
      for (std::size_t a = 0; a < F.size(); ++a) {
        const double cur = w[F[a]], tgt = z[static_cast<Index>(a)];
        if (tgt > 1.0 || tgt < -1.0) inside = false;
        const double lim = tgt > cur ? 1.0 : -1.0;
        if (tgt != cur) {
          const double t = (lim - cur) / (tgt - cur);
          if (t < tmax) {
            tmax = t;
            block = F[a];
          }
        }
      }
      if (inside) {
        for (std::size_t a = 0; a < F.size(); ++a)
          w[F[a]] = z[static_cast<Index>(a)];
      } else {
        tmax = std::max(0.0, tmax);
        for (std::size_t a = 0; a < F.size(); ++a) {
          const double cur = w[F[a]];
          w[F[a]] = std::clamp(cur + tmax * (z[static_cast<Index>(a)] - cur),
                               -1.0, 1.0);
        }
        if (block >= 0) {
          w[block] = w[block] > 0.0 ? 1.0 : -1.0;
          state[static_cast<std::size_t>(block)] =
              w[block] > 0.0 ? 1 : -1;
        }
        continue;  // re-solve the shrunken free set before testing bounds
      }
    }

    const VectorXd g = B.transpose() * (c + B * w);
    double worst = gtol;
    Index rel = -1;
    for (Index j = 0; j < k; ++j) {
      const int s = state[static_cast<std::size_t>(j)];
      if (s == 1 && g[j] > worst) {
        worst = g[j];
        rel = j;
      } else if (s == -1 && -g[j] > worst) {
        worst = -g[j];
        rel = j;
      }
    }
    if (rel < 0) break;
    state[static_cast<std::size_t>(rel)] = 0;
  }
  return (c + B * w).norm();
}

double joint_spectral_sq(const Eigen::MatrixXd& B, const Eigen::MatrixXd& E) {
  const Eigen::Index kb = B.cols(), ke = E.cols();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(kb + ke);
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < 40; ++it) {
    const Eigen::VectorXd img = B * v.head(kb) + E * v.tail(ke);
    Eigen::VectorXd next(kb + ke);
    next.head(kb) = B.transpose() * img;
    next.tail(ke) = E.transpose() * img;
    lam = next.norm();
    if (lam == 0.0) return 0.0;
    v = next / lam;
  }
  return lam;
}

void project_free(Eigen::VectorXd& v, free_part kind) {
  switch (kind) {
    case free_part::none:
      return;
    case free_part::l2_ball: {
      const double nv = v.norm();
      if (nv > 1.0) v /= nv;
      return;
    }
    case free_part::l1_ball:
      v = project_l1_ball(v, 1.0);
      return;
    case free_part::simplex:
      v = project_simplex(v);
      return;
  }
}

}  // namespace

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index m = v.size();
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  bool found = false;
  for (Eigen::Index j = 0; j < m; ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) {
      theta = t;
      found = true;
    }
  }
  if (!found) theta = v.maxCoeff() - 1.0;
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> u(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) u[j] = std::abs(v[j]);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double mag = std::max(0.0, std::abs(v[j]) - theta);
    out[j] = v[j] >= 0.0 ? mag : -mag;
  }
  return out;
}

double min_selection_norm(const Eigen::VectorXd& c, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& E, free_part kind) {
  const Eigen::Index kb = B.cols();
  const Eigen::Index ke = E.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(kb);
  if (kind == free_part::none || ke == 0) {
    Eigen::VectorXd rho = c;
    box_cd(B, w, rho, 30);  // cheap warm start for the active-set solve
    return box_active_set(c, B, w);
  }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(ke);
  if (kind == free_part::simplex) v.setConstant(1.0 / static_cast<double>(ke));

  // accelerated projected gradient on the joint variable (w, v)
  const double L = std::max(joint_spectral_sq(B, E), 1e-300);
  const double step = 1.0 / L;
  Eigen::VectorXd wp = w, vp = v;
  double t = 1.0;
  double best = (c + B * w + E * v).squaredNorm();
  for (int it = 0; it < 6000; ++it) {
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double mom = (t - 1.0) / tn;
    Eigen::VectorXd wz =
        (w + mom * (w - wp)).cwiseMax(-1.0).cwiseMin(1.0);
    Eigen::VectorXd vz = v + mom * (v - vp);
    project_free(vz, kind);
    const Eigen::VectorXd rho = c + B * wz + E * vz;
    wp = w;
    vp = v;
    w = (wz - step * (B.transpose() * rho)).cwiseMax(-1.0).cwiseMin(1.0);
    v = vz - step * (E.transpose() * rho);
    project_free(v, kind);
    t = tn;
    if ((it & 127) == 127) {
      const double cur = (c + B * w + E * v).squaredNorm();
      if (cur > best) t = 1.0;  // momentum restart on backslide
      if (best - cur <= 1e-20 * (1.0 + cur) && it > 500) break;
      best = std::min(best, cur);
    }
  }

  // alternating polish: exact box solve in w, projected-gradient burst in v
  // at the exact Lipschitz constant of E
  Eigen::VectorXd rho = c + B * w + E * v;
  const double Le =
      std::max(joint_spectral_sq(Eigen::MatrixXd(c.size(), 0), E), 1e-300);
  for (int round = 0; round < 80; ++round) {
    const double before = rho.norm();
    box_active_set(c + E * v, B, w);
    rho = c + B * w + E * v;
    const Eigen::VectorXd base = rho - E * v;
    for (int s = 0; s < 300; ++s) {
      v -= (E.transpose() * rho) / Le;
      project_free(v, kind);
      rho = base + E * v;
    }
    if (before - rho.norm() <= 1e-17 * (1.0 + before)) break;
  }
  return rho.norm();
}

Eigen::VectorXd equality_constrained_lsq(const Eigen::MatrixXd& Q,
                                         const Eigen::VectorXd& b,
                                         const Eigen::MatrixXd& C,
                                         const Eigen::VectorXd& d) {
  const Eigen::Index q = Q.cols();
  if (C.rows() == 0) {
    return Q.completeOrthogonalDecomposition().solve(b);
  }
  // particular solution plus null-space parametrization of C z = d; the
  // pivoted QR of C^T yields an orthonormal basis of null(C) in the trailing
  // columns of its Q factor
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(C.transpose());
  const Eigen::Index rank = qr.rank();
  const Eigen::VectorXd z0 = C.completeOrthogonalDecomposition().solve(d);
  if (rank >= q) return z0;
  const Eigen::MatrixXd Qfull =
      qr.householderQ() * Eigen::MatrixXd::Identity(q, q);
  const Eigen::MatrixXd N = Qfull.rightCols(q - rank);
  const Eigen::VectorXd rhs = b - Q * z0;
  const Eigen::VectorXd zn =
      (Q * N).completeOrthogonalDecomposition().solve(rhs);
  return z0 + N * zn;
}

bool full_row_rank(const Eigen::MatrixXd& X) {
  if (X.rows() > X.cols()) return false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  const auto& sv = svd.singularValues();
  return sv.size() > 0 && sv(sv.size() - 1) > 1e-10 * sv(0);
}

}  // namespace advlin::detail
