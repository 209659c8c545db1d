#pragma once

#include <Eigen/Dense>

namespace cgs::linalg {

/// Number of singular values above `rel_tol * sigma_max`. With the default
/// (negative) `rel_tol` the cutoff is max(rows, cols) * eps * sigma_max.
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = -1.0);

/// Norm of the component of `v` orthogonal to the column span of `basis`.
double projection_residual(const Eigen::MatrixXd& basis, const Eigen::VectorXd& v);

/// Orthonormal basis of the null space of `m` (columns), using the same
/// rank cutoff as numerical_rank.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double rel_tol = -1.0);

/// Least-squares coordinates of `v` in the columns of `basis`.
Eigen::VectorXd coordinates(const Eigen::MatrixXd& basis, const Eigen::VectorXd& v);

}  // namespace cgs::linalg
