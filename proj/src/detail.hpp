#pragma once

#include <Eigen/Dense>

#include "advlin/norms.hpp"

// Internal numerical helpers shared by the solver translation units.

namespace advlin::detail {

// Euclidean projection onto the probability simplex {t >= 0, sum t = 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

// Euclidean projection onto the l1 ball of the given radius.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius);

// Free part of a subgradient-selection set: absent, the unit l2 ball, the
// unit l1 ball, or the probability simplex (mixing weights over tied
// coordinates of an linf regularizer).
enum class free_part { none, l2_ball, l1_ball, simplex };

// min over w in [-1,1]^k and v in the free part of || c + B w + E v ||_2.
// Exact (cyclic coordinate descent) when the free part is absent; otherwise
// accelerated projected gradient plus alternating polish.  B and E may have
// zero columns.
double min_selection_norm(const Eigen::VectorXd& c, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& E, free_part kind);

// Least-squares polish on an identified smooth piece: minimize ||b - Q z||_2
// subject to C z = d (C may have zero rows).  Rank-revealing solves; returns
// the minimum-norm minimizer.
Eigen::VectorXd equality_constrained_lsq(const Eigen::MatrixXd& Q,
                                         const Eigen::VectorXd& b,
                                         const Eigen::MatrixXd& C,
                                         const Eigen::VectorXd& d);

// Numerical full-row-rank test (relative singular-value cutoff 1e-10).
bool full_row_rank(const Eigen::MatrixXd& X);

}  // namespace advlin::detail
