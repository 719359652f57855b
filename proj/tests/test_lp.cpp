#include <optional>
#include <random>

#include "doctest.h"
#include "tiltcheck/lp.hpp"

using namespace tiltcheck;

namespace {

// Independent oracle: enumerate every basic solution of a x = b, x >= 0,
// and keep the best objective value. Valid for bounded feasible regions.
std::optional<double> bfs_best_value(const Matrix& a, const Vector& b,
                                     const Vector& c, LPSense sense) {
  const long m = a.rows(), n = a.cols();
  std::optional<double> best;
  const long subsets = 1L << n;
  for (long mask = 0; mask < subsets; ++mask) {
    std::vector<long> cols;
    for (long j = 0; j < n; ++j)
      if (mask & (1L << j)) cols.push_back(j);
    if (static_cast<long>(cols.size()) > m) continue;

    Matrix as(m, static_cast<long>(cols.size()));
    for (size_t k = 0; k < cols.size(); ++k) as.col(static_cast<long>(k)) = a.col(cols[k]);
    Vector xs;
    if (cols.empty()) {
      if (b.cwiseAbs().maxCoeff() > 1e-9) continue;
      xs.resize(0);
    } else {
      xs = as.colPivHouseholderQr().solve(b);
      if ((as * xs - b).cwiseAbs().maxCoeff() > 1e-9) continue;
    }
    bool ok = true;
    for (long k = 0; k < xs.size(); ++k)
      if (xs(k) < -1e-9) {
        ok = false;
        break;
      }
    if (!ok) continue;
    double value = 0.0;
    for (size_t k = 0; k < cols.size(); ++k) value += c(cols[k]) * xs(static_cast<long>(k));
    if (!best || (sense == LPSense::Maximize ? value > *best : value < *best))
      best = value;
  }
  return best;
}

}  // namespace

TEST_CASE("simplex solves the unit simplex") {
  LPProblem lp;
  lp.sense = LPSense::Maximize;
  lp.c = Vector::Zero(2);
  lp.c(0) = 1.0;
  lp.a.resize(1, 2);
  lp.a << 1, 1;
  lp.b = Vector::Ones(1);
  lp.nonneg = {true, true};
  const LPResult r = solve_lp(lp);
  REQUIRE(r.status == LPStatus::Optimal);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.x(0) == doctest::Approx(1.0));
  CHECK(r.x(1) == doctest::Approx(0.0));
}

TEST_CASE("simplex detects infeasibility") {
  LPProblem lp;
  lp.c = Vector::Zero(1);
  lp.a.resize(1, 1);
  lp.a << 1;
  lp.b = Vector::Constant(1, -1.0);
  lp.nonneg = {true};
  CHECK(solve_lp(lp).status == LPStatus::Infeasible);
}

TEST_CASE("simplex detects unboundedness") {
  LPProblem lp;
  lp.sense = LPSense::Maximize;
  lp.c = Vector::Ones(2);
  lp.a.resize(1, 2);
  lp.a << 1, -1;
  lp.b = Vector::Zero(1);
  lp.nonneg = {true, true};
  CHECK(solve_lp(lp).status == LPStatus::Unbounded);
}

TEST_CASE("free variables round-trip through the split") {
  // minimize |shape|: min y s.t. x + y = 3, x free, y >= 0 has value 0 at x=3
  LPProblem lp;
  lp.c = Vector::Zero(2);
  lp.c(1) = 1.0;
  lp.a.resize(1, 2);
  lp.a << 1, 1;
  lp.b = Vector::Constant(1, 3.0);
  lp.nonneg = {false, true};
  const LPResult r = solve_lp(lp);
  REQUIRE(r.status == LPStatus::Optimal);
  CHECK(r.value == doctest::Approx(0.0));
  CHECK(r.x(0) == doctest::Approx(3.0));

  lp.b(0) = -5.0;  // x must go negative
  const LPResult r2 = solve_lp(lp);
  REQUIRE(r2.status == LPStatus::Optimal);
  CHECK(r2.x(0) == doctest::Approx(-5.0));
}

TEST_CASE("dimension mismatches are rejected") {
  LPProblem lp;
  lp.c = Vector::Zero(2);
  lp.a.resize(1, 3);
  lp.a << 1, 1, 1;
  lp.b = Vector::Ones(1);
  lp.nonneg = {true, true};
  CHECK_THROWS_AS(solve_lp(lp), std::invalid_argument);
}

TEST_CASE("simplex matches basic-solution enumeration on random LPs") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> rows(1, 3), cols(2, 5), coef(-2, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  int optimal_seen = 0, infeasible_seen = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int m0 = rows(rng), n0 = cols(rng);
    Matrix a0(m0, n0);
    for (int i = 0; i < m0; ++i)
      for (int j = 0; j < n0; ++j) a0(i, j) = coef(rng);
    Vector b0(m0);
    if (trial % 2 == 0) {
      Vector x_feas(n0);
      for (int j = 0; j < n0; ++j) x_feas(j) = u(rng);
      b0 = a0 * x_feas;
    } else {
      for (int i = 0; i < m0; ++i) b0(i) = 4.0 * u(rng) - 2.0;
    }

    // bounding row sum x + s = 10 keeps every feasible LP bounded, so the
    // enumeration oracle is decisive
    LPProblem lp;
    lp.a = Matrix::Zero(m0 + 1, n0 + 1);
    lp.a.topLeftCorner(m0, n0) = a0;
    lp.a.row(m0).setOnes();
    lp.b.resize(m0 + 1);
    lp.b.head(m0) = b0;
    lp.b(m0) = 10.0;
    lp.c.resize(n0 + 1);
    for (int j = 0; j < n0; ++j) lp.c(j) = coef(rng);
    lp.c(n0) = 0.0;
    lp.nonneg.assign(static_cast<size_t>(n0 + 1), true);
    lp.sense = trial % 3 == 0 ? LPSense::Maximize : LPSense::Minimize;

    const auto oracle = bfs_best_value(lp.a, lp.b, lp.c, lp.sense);
    const LPResult r = solve_lp(lp);
    CAPTURE(trial);
    if (oracle) {
      REQUIRE(r.status == LPStatus::Optimal);
      CHECK(std::abs(r.value - *oracle) <= 1e-8);
      CHECK((lp.a * r.x - lp.b).cwiseAbs().maxCoeff() <= 1e-9 * 10.0);
      CHECK(std::abs(lp.c.dot(r.x) - r.value) <= 1e-9);
      ++optimal_seen;
    } else {
      CHECK(r.status == LPStatus::Infeasible);
      ++infeasible_seen;
    }
  }
  // the generator must exercise both outcomes
  CHECK(optimal_seen >= 20);
  CHECK(infeasible_seen >= 20);
}
