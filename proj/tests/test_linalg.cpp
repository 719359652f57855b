#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "tiltcheck/linalg.hpp"

using namespace tiltcheck;

TEST_CASE("rank of the q5/q6 gradient pair collapses at x2 = 0") {
  // gradients (-1, 2*x2, 0, 0) and (-1, 0, 0, 0)
  Matrix at_origin(2, 4);
  at_origin << -1, 0, 0, 0, -1, 0, 0, 0;
  CHECK(rank(at_origin) == 1);

  Matrix off_origin(2, 4);
  off_origin << -1, 0.2, 0, 0, -1, 0, 0, 0;
  CHECK(rank(off_origin) == 2);

  CHECK(rank(Matrix::Zero(3, 3)) == 0);
  CHECK(rank(Matrix(0, 4)) == 0);
}

TEST_CASE("null space basis of the full NLP1 active gradient family") {
  // all seven gradients at the origin span R^3 x {0}
  Matrix rows(7, 4);
  rows << 1, 0, -1, 0, -1, 0, -1, 0, 0, 1, -2, 0, 0, -1, -2, 0, -1, 0, 0, 0, -1,
      0, 0, 0, -1, 1, 0, 0;
  const Matrix basis = null_space_orthonormal(rows);
  REQUIRE(basis.cols() == 1);
  CHECK(std::abs(basis(3, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(basis.topRows(3).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("null space edge cases") {
  const Matrix empty_basis = null_space_orthonormal(Matrix(0, 3));
  CHECK(empty_basis.cols() == 3);
  CHECK((empty_basis.transpose() * empty_basis - Matrix::Identity(3, 3)).norm() <=
        1e-12);

  Matrix full = Matrix::Identity(3, 3);
  CHECK(null_space_orthonormal(full).cols() == 0);
}

TEST_CASE("rank-nullity and orthonormality on random mixed-scale matrices") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_int_distribution<int> scale_pow(-6, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = dim(rng), n = dim(rng);
    Matrix a(m, n);
    for (int i = 0; i < m; ++i) {
      const double s = std::pow(10.0, scale_pow(rng));
      for (int j = 0; j < n; ++j) a(i, j) = s * u(rng);
    }
    const int r = rank(a);
    const Matrix ns = null_space_orthonormal(a);
    CHECK(r + ns.cols() == n);
    if (ns.cols() > 0) {
      CHECK((a * ns).cwiseAbs().maxCoeff() <=
            1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff()));
      CHECK((ns.transpose() * ns - Matrix::Identity(ns.cols(), ns.cols()))
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("smallest symmetric eigenpair") {
  Matrix d(2, 2);
  d << 2, 0, 0, 1;
  auto [lam, v] = sym_eig_min(d);
  CHECK(lam == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(v(1)) == doctest::Approx(1.0).epsilon(1e-10));

  Matrix one(1, 1);
  one << 1;
  auto [lam1, v1] = sym_eig_min(one);
  CHECK(lam1 == doctest::Approx(1.0));
  CHECK(std::abs(v1(0)) == doctest::Approx(1.0));

  // hand eigendecomposition: eigenvalues -1 and 1, minimizer (1,1)/sqrt(2)
  Matrix offdiag(2, 2);
  offdiag << 0, -1, -1, 0;
  auto [lam2, v2] = sym_eig_min(offdiag);
  CHECK(lam2 == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK((offdiag * v2 - lam2 * v2).norm() <= 1e-8);
  CHECK(std::abs(v2(0) - v2(1)) <= 1e-10);  // proportional to (1, 1)

  Matrix asym(2, 2);
  asym << 0, 1, 0, 0;
  CHECK_THROWS_AS(sym_eig_min(asym), std::invalid_argument);
}
