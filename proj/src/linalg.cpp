#include "tiltcheck/linalg.hpp"

#include <stdexcept>

namespace tiltcheck {

int rank(const Matrix& m, double tol_rank) {
  if (tol_rank <= 0.0) throw std::invalid_argument("tol_rank must be positive");
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (smax == 0.0) return 0;
  int r = 0;
  for (long i = 0; i < sv.size(); ++i)
    if (sv(i) > tol_rank * smax) ++r;
  return r;
}

Matrix null_space_orthonormal(const Matrix& m, double tol_rank) {
  const long n = m.cols();
  if (m.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  long r = 0;
  if (smax > 0.0)
    for (long i = 0; i < sv.size(); ++i)
      if (sv(i) > tol_rank * smax) ++r;
  return svd.matrixV().rightCols(n - r);
}

std::pair<double, Vector> sym_eig_min(const Matrix& h, double sym_tol) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw std::invalid_argument("sym_eig_min needs a nonempty square matrix");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
    throw std::invalid_argument("matrix is asymmetric beyond tolerance");
  Eigen::SelfAdjointEigenSolver<Matrix> eig((h + h.transpose()) / 2.0);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigendecomposition failed");
  return {eig.eigenvalues()(0), eig.eigenvectors().col(0)};
}

}  // namespace tiltcheck
