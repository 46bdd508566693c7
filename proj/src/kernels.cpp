#include "advlin/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace advlin::kernels {

namespace {

// Both variants must route every output element through the same inner
// routine on the same data, otherwise bitwise agreement is lost.
inline double row_dot(const Eigen::MatrixXd& X, Eigen::Index i,
                      const Eigen::VectorXd& v) {
  double acc = 0.0;
  const double* row = X.data() + i;  // column-major stride walk
  const Eigen::Index n = X.rows();
  for (Eigen::Index j = 0; j < X.cols(); ++j) acc += row[j * n] * v[j];
  return acc;
}

inline double col_dot(const Eigen::MatrixXd& X, Eigen::Index j,
                      const Eigen::VectorXd& u) {
  const double* col = X.data() + j * X.rows();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) acc += col[i] * u[i];
  return acc;
}

constexpr Eigen::Index parallel_cutoff = 64 * 1024;  // elements of X

}  // namespace

void matvec_serial(const Eigen::MatrixXd& X, const Eigen::VectorXd& v,
                   Eigen::VectorXd& out) {
  out.resize(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = row_dot(X, i, v);
}

void matvec_parallel(const Eigen::MatrixXd& X, const Eigen::VectorXd& v,
                     Eigen::VectorXd& out) {
  out.resize(X.rows());
  const Eigen::Index n = X.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = row_dot(X, i, v);
}

Eigen::VectorXd matvec(const Eigen::MatrixXd& X, const Eigen::VectorXd& v) {
  Eigen::VectorXd out;
  if (X.size() >= parallel_cutoff && thread_count() > 1)
    matvec_parallel(X, v, out);
  else
    matvec_serial(X, v, out);
  return out;
}

void matvec_t_serial(const Eigen::MatrixXd& X, const Eigen::VectorXd& u,
                     Eigen::VectorXd& out) {
  out.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) out[j] = col_dot(X, j, u);
}

void matvec_t_parallel(const Eigen::MatrixXd& X, const Eigen::VectorXd& u,
                       Eigen::VectorXd& out) {
  out.resize(X.cols());
  const Eigen::Index p = X.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < p; ++j) out[j] = col_dot(X, j, u);
}

Eigen::VectorXd matvec_t(const Eigen::MatrixXd& X, const Eigen::VectorXd& u) {
  Eigen::VectorXd out;
  if (X.size() >= parallel_cutoff && thread_count() > 1)
    matvec_t_parallel(X, u, out);
  else
    matvec_t_serial(X, u, out);
  return out;
}

double max_abs_serial(const Eigen::VectorXd& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > m) m = a;
  }
  return m;
}

double max_abs_parallel(const Eigen::VectorXd& v) {
  double m = 0.0;
  const Eigen::Index n = v.size();
#pragma omp parallel for reduction(max : m) schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(v[i]);
    if (a > m) m = a;
  }
  return m;
}

double max_abs(const Eigen::VectorXd& v) {
  if (v.size() >= parallel_cutoff && thread_count() > 1)
    return max_abs_parallel(v);
  return max_abs_serial(v);
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace advlin::kernels
