#include "advlin/norms.hpp"

#include <cmath>
#include <stdexcept>

namespace advlin {

double norm(const Eigen::VectorXd& v, norm_kind k) {
  switch (k) {
    case norm_kind::l1:
      return v.lpNorm<1>();
    case norm_kind::l2:
      return v.norm();
    case norm_kind::linf:
      return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
  throw std::logic_error("unknown norm kind");
}

norm_kind dual_kind(norm_kind k) {
  switch (k) {
    case norm_kind::l1:
      return norm_kind::linf;
    case norm_kind::l2:
      return norm_kind::l2;
    case norm_kind::linf:
      return norm_kind::l1;
  }
  throw std::logic_error("unknown norm kind");
}

Eigen::VectorXd norm_subgradient(const Eigen::VectorXd& v, norm_kind k) {
  const Eigen::Index p = v.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
  switch (k) {
    case norm_kind::l1:
      for (Eigen::Index j = 0; j < p; ++j) {
        if (v[j] > 0.0) g[j] = 1.0;
        else if (v[j] < 0.0) g[j] = -1.0;
      }
      return g;
    case norm_kind::l2: {
      const double nv = v.norm();
      if (nv > 0.0) g = v / nv;
      return g;
    }
    case norm_kind::linf: {
      const double m = norm(v, norm_kind::linf);
      if (m == 0.0) return g;
      // ties share weight equally: the minimum-Euclidean-norm member of the
      // convex hull of the tied signed unit vectors
      Eigen::Index ties = 0;
      for (Eigen::Index j = 0; j < p; ++j)
        if (std::abs(v[j]) == m) ++ties;
      for (Eigen::Index j = 0; j < p; ++j)
        if (std::abs(v[j]) == m) g[j] = (v[j] > 0.0 ? 1.0 : -1.0) / double(ties);
      return g;
    }
  }
  throw std::logic_error("unknown norm kind");
}

const char* norm_name(norm_kind k) {
  switch (k) {
    case norm_kind::l1:
      return "l1";
    case norm_kind::l2:
      return "l2";
    case norm_kind::linf:
      return "linf";
  }
  return "?";
}

std::optional<norm_kind> parse_norm(std::string_view name) {
  if (name == "l1") return norm_kind::l1;
  if (name == "l2") return norm_kind::l2;
  if (name == "linf" || name == "inf") return norm_kind::linf;
  return std::nullopt;
}

}  // namespace advlin
