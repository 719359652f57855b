#pragma once

#include <Eigen/Dense>
#include <utility>

namespace tiltcheck {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numerical rank: number of singular values above tol_rank * sigma_max.
/// An empty matrix has rank 0.
int rank(const Matrix& m, double tol_rank = 1e-8);

/// Orthonormal basis of ker(m) as columns of an n x k matrix,
/// k = n - rank(m).  A matrix with no rows yields the n x n identity.
Matrix null_space_orthonormal(const Matrix& m, double tol_rank = 1e-8);

/// Smallest eigenvalue and a unit eigenvector of a symmetric matrix.
/// Throws std::invalid_argument if h is asymmetric beyond sym_tol.
std::pair<double, Vector> sym_eig_min(const Matrix& h, double sym_tol = 1e-10);

}  // namespace tiltcheck
