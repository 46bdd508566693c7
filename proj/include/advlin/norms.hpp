#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>

namespace advlin {

// The attack ball norm and its dual (the regularizer norm) are both drawn
// from this set.  dual_kind(l2)=l2, dual_kind(linf)=l1, dual_kind(l1)=linf.
enum class norm_kind { l1, l2, linf };

struct dataset {
  Eigen::MatrixXd X;  // n rows (samples) by p columns (features)
  Eigen::VectorXd y;  // length n

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

double norm(const Eigen::VectorXd& v, norm_kind k);

norm_kind dual_kind(norm_kind k);

// A member g of the subdifferential of ||.||_k at v: ||g||_dual(k) <= 1 and
// g.v = ||v||_k.  At kinks (zero coordinates for l1, the zero vector for l2
// and linf ties) the minimum-Euclidean-norm member is returned, so zeros stay
// zero and linf ties share weight equally.
Eigen::VectorXd norm_subgradient(const Eigen::VectorXd& v, norm_kind k);

const char* norm_name(norm_kind k);
std::optional<norm_kind> parse_norm(std::string_view name);

}  // namespace advlin
