// Acceptance suite: reproduces the two worked examples end to end and runs
// the cross-cutting property checks. Prints one line per criterion and
// exits nonzero if any of them fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tiltcheck/linalg.hpp"
#include "tiltcheck/lp.hpp"
#include "tiltcheck/multipliers.hpp"
#include "tiltcheck/oracle.hpp"
#include "tiltcheck/report.hpp"
#include "tiltcheck/tilt.hpp"

using namespace tiltcheck;

namespace {

std::string g_fixtures = "fixtures";

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw Failure(msg);
}

Problem fixture(const std::string& name) {
  return load_problem(g_fixtures + "/" + name);
}

struct Prepared {
  Problem p;
  ProblemDerivatives pd;
  StationaryData sd;
  MultiplierPolyhedron poly;
  explicit Prepared(Problem prob)
      : p(std::move(prob)),
        pd(p),
        sd(evaluate_stationary_data(pd, *p.point)),
        poly(build_polyhedron(sd, -sd.obj_grad)) {}
};

Vector to_file_order(const Problem& p, const Vector& internal) {
  Vector out(internal.size());
  for (long i = 0; i < internal.size(); ++i)
    out(p.file_index[static_cast<size_t>(i)] - 1) = internal(i);
  return out;
}

// records produced along the way; criterion 7 round-trips all of them
std::vector<AnalysisRecord> g_records;

// ---------------------------------------------------------------------------
// criterion bodies
// ---------------------------------------------------------------------------

void criterion_1_nlp1_reproduction() {
  const auto t0 = std::chrono::steady_clock::now();

  AnalysisOptions opt;
  opt.sampling.radius = 0.1;  // within the required <= 0.2
  const Problem p = fixture("nlp1.nlp");
  const AnalysisRecord rec = analyze(p, opt);
  g_records.push_back(rec);

  require(rec.stationary, "NLP1 must be stationary");
  require(rec.cq.has_value(), "CQ section missing");
  require(rec.cq->crcq_verdict == "fails-with-witness", "CRCQ should fail");
  require(rec.cq->crcq_witness.has_value(), "CRCQ witness missing");
  const auto& fam = rec.cq->crcq_witness->family;
  const bool has56 =
      std::find(fam.begin(), fam.end(), 5) != fam.end() &&
      std::find(fam.begin(), fam.end(), 6) != fam.end();
  require(has56, "CRCQ witness family must contain {5,6}");
  require(rec.cq->rcrcq_verdict == "holds-sampled",
          "RCRCQ should hold at radius 0.1");
  require(rec.multipliers.has_value() &&
              rec.multipliers->support_union == std::vector<int>{1, 2, 3, 4, 5, 6},
          "support union must be {1,...,6}");

  // critical cone membership: exactly the x4 axis
  const Prepared f{fixture("nlp1.nlp")};
  const SupportUnion su = support_union(f.poly);
  const CriticalCone cone = critical_cone(f.sd, f.poly, su.lambda_tilde);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    Vector v(4);
    for (int j = 0; j < 4; ++j) v(j) = u(rng);
    const bool expected = v.head(3).cwiseAbs().maxCoeff() <= 1e-9;
    require(cone.contains(v) == expected, "cone membership mismatch");
    Vector axis = Vector::Zero(4);
    axis(3) = v(3);
    require(cone.contains(axis), "x4 axis must lie in the cone");
  }

  require(rec.tilt.has_value() && rec.tilt->verdict == "tilt-stable",
          "NLP1 must be tilt-stable");
  require(std::abs(rec.tilt->tilt_bound - 1.0) <= 1e-9,
          "tilt bound must equal 1 within 1e-9");

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  require(secs < 5.0, "runtime exceeded 5 s");
}

void criterion_2_extreme_multipliers() {
  const Prepared f{fixture("nlp1.nlp")};
  const auto verts = enumerate_vertices(f.poly);
  require(verts.size() == 8, "expected exactly 8 extreme multipliers, got " +
                                 std::to_string(verts.size()));

  const std::vector<std::vector<double>> expected = {
      {3.0 / 8, 5.0 / 8, 0, 0, 0, 0, 0},
      {1.0 / 6, 0, 0, 5.0 / 12, 0, 0, 5.0 / 12},
      {1, 0, 0, 0, 5.0 / 4, 0, 0},
      {1, 0, 0, 0, 0, 5.0 / 4, 0},
      {0, 0.5, 0.25, 0, 0, 0, -0.25},
      {0, 0, 1.0 / 8, 3.0 / 8, 0, 0, 0.25},
      {0, 0, 0.5, 0, 0.75, 0, -0.5},
      {0, 0, 0.5, 0, 0, 0.75, -0.5}};
  for (const auto& e : expected) {
    int hits = 0;
    for (const auto& v : verts) {
      const Vector vf = to_file_order(f.p, v);
      double diff = 0.0;
      for (size_t i = 0; i < e.size(); ++i)
        diff = std::max(diff, std::abs(vf(static_cast<long>(i)) - e[i]));
      if (diff <= 1e-8) ++hits;
    }
    require(hits == 1, "a published extreme multiplier was not matched exactly once");
  }

  for (const auto& v : verts) {
    std::vector<int> family;
    for (int i = 0; i < f.p.num_eq; ++i) family.push_back(i);
    for (int i = f.p.num_eq; i < f.p.num_constraints(); ++i)
      if (v(i) > 1e-9) family.push_back(i);
    Matrix rows(static_cast<long>(family.size()), f.p.n);
    for (size_t r = 0; r < family.size(); ++r)
      rows.row(static_cast<long>(r)) = f.sd.con_grads.row(family[r]);
    require(rank(rows) == static_cast<int>(family.size()),
            "vertex support gradients must be linearly independent");
  }
}

void criterion_3_nlp2_reproduction() {
  const AnalysisRecord rec = analyze(fixture("nlp2.nlp"));
  g_records.push_back(rec);
  require(rec.tilt.has_value() && rec.tilt->verdict == "not-tilt-stable",
          "NLP2 must not be tilt-stable");
  require(rec.tilt->failure_direction.has_value(), "failure direction missing");
  const Vector& w = *rec.tilt->failure_direction;
  Vector e4 = Vector::Zero(4);
  e4(3) = 1.0;
  require(std::abs(w.dot(e4)) / w.norm() >= 1.0 - 1e-8,
          "failure direction must be parallel to e4");

  const Prepared f{fixture("nlp2.nlp")};
  const SupportUnion su = support_union(f.poly);
  const double form = w.dot(f.sd.lagrangian_hessian(su.lambda_tilde) * w);
  require(std::abs(form) <= 1e-9, "quadratic form along e4 must vanish");
}

void criterion_4_multiplier_independence() {
  const Prepared f{fixture("nlp1.nlp")};
  const auto verts = enumerate_vertices(f.poly);
  require(verts.size() == 8, "expected 8 vertices");
  const ReducedHessian rh = reduced_hessian(f.sd, f.poly);

  int pairs = 0;
  for (size_t a = 0; a < verts.size(); ++a) {
    const Matrix ha = f.sd.lagrangian_hessian(verts[a]);
    for (size_t b = a + 1; b < verts.size(); ++b) {
      const Matrix hb = f.sd.lagrangian_hessian(verts[b]);
      ++pairs;
      for (long j = 0; j < rh.basis.cols(); ++j) {
        const Vector w = rh.basis.col(j);
        require(std::abs(w.dot(ha * w) - w.dot(hb * w)) <= 1e-8,
                "quadratic forms differ across vertices");
      }
    }
  }
  require(pairs == 28, "expected 28 vertex pairs");

  std::mt19937 rng(777);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int members = 0;
  for (int k = 0; k < 50; ++k) {
    Vector w(4), z(4);
    for (int j = 0; j < 4; ++j) {
      w(j) = u(rng);
      z(j) = u(rng);
    }
    if (k % 2 == 0) w.head(3).setZero();
    if (k % 4 == 0) z(3) = 0.0;
    const bool expected = graphical_derivative_member(f.sd, f.poly, verts[0], w, z);
    if (expected) ++members;
    for (size_t a = 1; a < verts.size(); ++a)
      require(graphical_derivative_member(f.sd, f.poly, verts[a], w, z) == expected,
              "graphical derivative verdict depends on the multiplier");
  }
  require(members > 0, "probe set never hit the graphical derivative");
}

void criterion_5_oracle_agreement() {
  // quadratic fixture: exact bound 1/2
  {
    const auto t0 = std::chrono::steady_clock::now();
    AnalysisOptions opt;
    opt.run_oracle = true;
    const AnalysisRecord rec = analyze(fixture("quadratic.nlp"), opt);
    g_records.push_back(rec);
    require(rec.tilt.has_value() && std::abs(rec.tilt->tilt_bound - 0.5) <= 1e-9,
            "quadratic pointbased bound must be 0.5");
    require(rec.oracle.has_value(), "oracle section missing");
    const double est = rec.oracle->lipschitz_estimate;
    require(est >= 0.4 && est <= 0.6,
            "quadratic oracle estimate " + std::to_string(est) +
                " outside [0.4, 0.6]");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    require(secs < 60.0, "quadratic oracle exceeded 60 s");
  }
  // NLP1: exact bound 1
  {
    const auto t0 = std::chrono::steady_clock::now();
    AnalysisOptions opt;
    opt.run_oracle = true;
    const AnalysisRecord rec = analyze(fixture("nlp1.nlp"), opt);
    g_records.push_back(rec);
    const double est = rec.oracle->lipschitz_estimate;
    require(est >= 0.75 && est <= 1.25,
            "NLP1 oracle estimate " + std::to_string(est) +
                " outside [0.75, 1.25]");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    require(secs < 60.0, "NLP1 oracle exceeded 60 s");
  }
}

void criterion_6_oracle_divergence() {
  const Problem p = fixture("nlp2.nlp");
  const ProblemDerivatives pd(p);
  std::vector<double> estimates;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    OracleConfig cfg;
    cfg.delta = delta;
    estimates.push_back(
        estimate_tilt_modulus(pd, *p.point, cfg).lipschitz_estimate);
  }
  require(estimates[0] < estimates[1] && estimates[1] < estimates[2],
          "estimates must increase as the tilt radius shrinks");
  require(estimates[2] > 5.0 * estimates[0],
          "largest estimate must exceed 5x the smallest");
}

void criterion_7_property_suites() {
  // symbolic derivatives vs central differences on every fixture
  for (const char* name : {"nlp1.nlp", "nlp2.nlp", "quadratic.nlp",
                           "nonstationary.nlp", "degenerate.nlp"}) {
    const Problem p = fixture(name);
    const ProblemDerivatives pd(p);
    const GradCheckResult res = check_derivatives(pd, *p.point, 20, 0.5, 1e-5, 42);
    require(res.max_gradient_rel_err <= 1e-6 && res.max_hessian_rel_err <= 1e-6,
            std::string("derivative check failed on ") + name);
  }

  // simplex vs exhaustive basic-solution enumeration on 100 random LPs
  {
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> rows(1, 3), cols(2, 5), coef(-2, 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const int m0 = rows(rng), n0 = cols(rng);
      Matrix a0(m0, n0);
      for (int i = 0; i < m0; ++i)
        for (int j = 0; j < n0; ++j) a0(i, j) = coef(rng);
      Vector b0(m0);
      if (trial % 2 == 0) {
        Vector xf(n0);
        for (int j = 0; j < n0; ++j) xf(j) = u(rng);
        b0 = a0 * xf;
      } else {
        for (int i = 0; i < m0; ++i) b0(i) = 4.0 * u(rng) - 2.0;
      }
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

      // independent oracle: every basic solution of the bounded system
      std::optional<double> best;
      const long nv = lp.a.cols(), m = lp.a.rows();
      for (long mask = 0; mask < (1L << nv); ++mask) {
        std::vector<long> pick;
        for (long j = 0; j < nv; ++j)
          if (mask & (1L << j)) pick.push_back(j);
        if (static_cast<long>(pick.size()) > m) continue;
        Matrix as(m, static_cast<long>(pick.size()));
        for (size_t k = 0; k < pick.size(); ++k)
          as.col(static_cast<long>(k)) = lp.a.col(pick[k]);
        Vector xs;
        if (pick.empty()) {
          if (lp.b.cwiseAbs().maxCoeff() > 1e-9) continue;
          xs.resize(0);
        } else {
          xs = as.colPivHouseholderQr().solve(lp.b);
          if ((as * xs - lp.b).cwiseAbs().maxCoeff() > 1e-9) continue;
        }
        bool ok = true;
        for (long k = 0; k < xs.size(); ++k)
          if (xs(k) < -1e-9) ok = false;
        if (!ok) continue;
        double value = 0.0;
        for (size_t k = 0; k < pick.size(); ++k)
          value += lp.c(pick[k]) * xs(static_cast<long>(k));
        if (!best || (lp.sense == LPSense::Maximize ? value > *best
                                                    : value < *best))
          best = value;
      }

      const LPResult r = solve_lp(lp);
      if (best) {
        require(r.status == LPStatus::Optimal,
                "simplex disagrees with enumeration on feasibility");
        require(std::abs(r.value - *best) <= 1e-8,
                "simplex value differs from enumeration");
      } else {
        require(r.status == LPStatus::Infeasible,
                "simplex found a solution where enumeration found none");
      }
    }
  }

  // CQ implication diagram on 100 random polynomial problems
  {
    std::mt19937 rng(57);
    std::uniform_int_distribution<int> dim(2, 3), ncons(1, 4), kind(0, 2);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    auto random_poly = [&](int n) {
      ExprPtr e = constant(0.0);
      for (int i = 0; i < n; ++i) e = add(e, mul(constant(coef(rng)), variable(i)));
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          e = add(e, mul(constant(coef(rng)), mul(variable(i), variable(j))));
      return e;
    };
    for (int trial = 0; trial < 100; ++trial) {
      const int n = dim(rng);
      Problem p;
      p.name = "random";
      p.n = n;
      for (int i = 0; i < n; ++i) p.var_names.push_back("x" + std::to_string(i + 1));
      p.objective = random_poly(n);
      std::vector<ExprPtr> eqs, ineqs;
      const int m = ncons(rng);
      for (int c = 0; c < m; ++c) {
        const int k = kind(rng);
        if (k == 0)
          eqs.push_back(random_poly(n));
        else if (k == 1)
          ineqs.push_back(random_poly(n));
        else
          ineqs.push_back(sub(random_poly(n), constant(1.0)));
      }
      if (eqs.empty() && ineqs.empty()) ineqs.push_back(random_poly(n));
      p.num_eq = static_cast<int>(eqs.size());
      p.num_ineq = static_cast<int>(ineqs.size());
      p.constraints = eqs;
      p.constraints.insert(p.constraints.end(), ineqs.begin(), ineqs.end());
      for (int i = 0; i < p.num_constraints(); ++i) p.file_index.push_back(i + 1);
      p.point = Vector::Zero(n);

      const ProblemDerivatives pd(p);
      const StationaryData sd = evaluate_stationary_data(pd, Vector::Zero(n));
      const CQReport rep = run_cq_checks(pd, sd, SamplingParams{});
      if (rep.licq) {
        require(rep.mfcq.holds, "LICQ without MFCQ in the report");
        require(rep.crcq.verdict == RankVerdict::HoldsSampled,
                "LICQ with a failing CRCQ verdict");
      }
      if (rep.crcq.verdict == RankVerdict::HoldsSampled)
        require(rep.rcrcq.verdict == RankVerdict::HoldsSampled,
                "CRCQ holds but RCRCQ fails in the report");
    }
  }

  // serialization round-trip on every record produced by this suite
  require(!g_records.empty(), "no records were produced");
  for (const auto& rec : g_records) {
    const std::string once = serialize(rec);
    require(serialize(parse_record(once)) == once,
            "serialize/parse round-trip changed the record");
  }
}

void criterion_8_gradient_combination() {
  const Prepared f{fixture("nlp1.nlp")};
  const SupportUnion su = support_union(f.poly);
  for (const auto& v : enumerate_vertices(f.poly)) {
    Vector combo = Vector::Zero(f.p.n);
    for (int i : su.indices)
      if (v(i) <= 1e-9)
        combo += su.lambda_tilde(i) * f.sd.con_grads.row(i).transpose();
    for (int i = 0; i < f.p.num_constraints(); ++i)
      if (i < f.p.num_eq || v(i) > 1e-9)
        combo += (su.lambda_tilde(i) - v(i)) * f.sd.con_grads.row(i).transpose();
    require(combo.cwiseAbs().maxCoeff() <= 1e-8,
            "gradient combination does not vanish");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_fixtures = argv[1];

  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"1. Example 4.1 reproduction (CQ lattice, support union, cone, bound 1)",
       criterion_1_nlp1_reproduction},
      {"2. NLP1 extreme multipliers match the published eight",
       criterion_2_extreme_multipliers},
      {"3. Example 4.2 reproduction (unstable along e4)",
       criterion_3_nlp2_reproduction},
      {"4. multiplier independence of forms and graphical derivative",
       criterion_4_multiplier_independence},
      {"5. oracle agreement on the tilt-stable fixtures",
       criterion_5_oracle_agreement},
      {"6. oracle divergence on NLP2 as the tilt radius shrinks",
       criterion_6_oracle_divergence},
      {"7. property suites (derivatives, LP oracle, CQ diagram, round-trip)",
       criterion_7_property_suites},
      {"8. full-support/vertex gradient combinations vanish",
       criterion_8_gradient_combination},
  };

  int failures = 0;
  for (const auto& [name, body] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string error;
    try {
      body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (error.empty()) {
      std::printf("[PASS] %s (%.2fs)\n", name.c_str(), secs);
    } else {
      std::printf("[FAIL] %s (%.2fs): %s\n", name.c_str(), secs, error.c_str());
      ++failures;
    }
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
