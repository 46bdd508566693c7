#pragma once

#include <Eigen/Dense>

// Dense kernels used in solver inner loops, each in two variants: a serial
// reference and an OpenMP version.  The parallel variants split work only
// across output elements; every element is produced by exactly one thread
// running the same serial inner loop as the reference, so the two variants
// agree bitwise for any thread count.  The unsuffixed entry points dispatch
// on problem size.

namespace advlin::kernels {

// out = X * v
void matvec_serial(const Eigen::MatrixXd& X, const Eigen::VectorXd& v,
                   Eigen::VectorXd& out);
void matvec_parallel(const Eigen::MatrixXd& X, const Eigen::VectorXd& v,
                     Eigen::VectorXd& out);
Eigen::VectorXd matvec(const Eigen::MatrixXd& X, const Eigen::VectorXd& v);

// out = X^T * u
void matvec_t_serial(const Eigen::MatrixXd& X, const Eigen::VectorXd& u,
                     Eigen::VectorXd& out);
void matvec_t_parallel(const Eigen::MatrixXd& X, const Eigen::VectorXd& u,
                       Eigen::VectorXd& out);
Eigen::VectorXd matvec_t(const Eigen::MatrixXd& X, const Eigen::VectorXd& u);

// max_i |v_i| (0 for an empty vector); max is order-insensitive so the
// parallel reduction is exact.
double max_abs_serial(const Eigen::VectorXd& v);
double max_abs_parallel(const Eigen::VectorXd& v);
double max_abs(const Eigen::VectorXd& v);

// Number of threads the parallel variants will fan out over (1 when built
// without OpenMP).
int thread_count();

}  // namespace advlin::kernels
