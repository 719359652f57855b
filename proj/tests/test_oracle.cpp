#include "doctest.h"
#include "test_util.hpp"
#include "tiltcheck/oracle.hpp"

using namespace tiltcheck;

namespace {

OracleConfig fast_config() {
  OracleConfig cfg;
  cfg.n_tilts = 12;
  cfg.n_starts = 4;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  OracleConfig cfg;
  cfg.delta = cfg.gamma;  // violates gamma > delta
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = OracleConfig{};
  cfg.n_starts = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(OracleConfig{}.validate());
}

TEST_CASE("tilted quadratic has the closed-form minimizer") {
  const Problem p = load_fixture("quadratic.nlp");
  const ProblemDerivatives pd(p);
  OracleConfig cfg = fast_config();
  cfg.delta = 0.2;  // allow the 0.1 tilt below
  cfg.gamma = 1.0;

  Vector tilt(2);
  tilt << 0.0, 0.1;
  auto [x, st] = solve_tilted(pd, *p.point, tilt, cfg);
  CHECK(st.converged);
  CHECK(std::abs(x(0)) <= 1e-5);
  CHECK(x(1) == doctest::Approx(0.05).epsilon(1e-3));

  auto [x0, st0] = solve_tilted(pd, *p.point, Vector::Zero(2), cfg);
  CHECK(st0.converged);
  CHECK((x0 - *p.point).norm() <= 1e-6);
}

TEST_CASE("NLP1 absorbs a small x4 tilt one-for-one") {
  const Problem p = load_fixture("nlp1.nlp");
  const ProblemDerivatives pd(p);
  const OracleConfig cfg = fast_config();
  Vector tilt = Vector::Zero(4);
  tilt(3) = 1e-3;
  auto [x, st] = solve_tilted(pd, *p.point, tilt, cfg);
  CHECK(st.converged);
  CHECK(std::abs(x(3) - 1e-3) <= 1e-5);
  CHECK(x.head(3).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("quadratic fixture estimate brackets the exact modulus 1/2") {
  const Problem p = load_fixture("quadratic.nlp");
  const ProblemDerivatives pd(p);
  const OracleReport rep =
      estimate_tilt_modulus(pd, *p.point, OracleConfig{}, 0.5);
  CHECK(rep.lipschitz_estimate >= 0.4);
  CHECK(rep.lipschitz_estimate <= 0.6);
  CHECK(rep.empirical_single_valued);
  CHECK(rep.untilted_matches_base);
  CHECK_FALSE(rep.solver_degraded);
  REQUIRE(rep.agreement.has_value());
  CHECK(*rep.agreement);
}

TEST_CASE("oracle reports are deterministic") {
  const Problem p = load_fixture("quadratic.nlp");
  const ProblemDerivatives pd(p);
  const OracleConfig cfg = fast_config();
  const OracleReport a = estimate_tilt_modulus(pd, *p.point, cfg);
  const OracleReport b = estimate_tilt_modulus(pd, *p.point, cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(a.lipschitz_estimate == b.lipschitz_estimate);
  for (size_t i = 0; i < a.samples.size(); ++i) {
    CHECK((a.samples[i].tilt - b.samples[i].tilt).norm() == 0.0);
    CHECK((a.samples[i].minimizer - b.samples[i].minimizer).norm() == 0.0);
  }
}

TEST_CASE("shrinking the tilt radius does not inflate a stable estimate") {
  const Problem p = load_fixture("quadratic.nlp");
  const ProblemDerivatives pd(p);
  OracleConfig cfg = fast_config();
  cfg.delta = 1e-3;
  const double est1 = estimate_tilt_modulus(pd, *p.point, cfg).lipschitz_estimate;
  cfg.delta = 1e-4;
  const double est2 = estimate_tilt_modulus(pd, *p.point, cfg).lipschitz_estimate;
  CHECK(est2 <= est1 + 0.25 * std::max(0.5, 0.1));
}

TEST_CASE("the untilted sample is always present and anchored at the point") {
  const Problem p = load_fixture("nlp1.nlp");
  const ProblemDerivatives pd(p);
  OracleConfig cfg = fast_config();
  cfg.n_tilts = 3;
  const OracleReport rep = estimate_tilt_modulus(pd, *p.point, cfg);
  REQUIRE(!rep.samples.empty());
  CHECK(rep.samples[0].tilt.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rep.untilted_matches_base);
}
