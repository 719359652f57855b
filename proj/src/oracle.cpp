#include "tiltcheck/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace tiltcheck {

void OracleConfig::validate() const {
  if (!(gamma > delta && delta > 0.0))
    throw std::invalid_argument("oracle requires gamma > delta > 0");
  if (n_tilts < 1 || n_starts < 1 || penalty_rounds < 1 || max_iters < 1)
    throw std::invalid_argument("oracle counts must be at least 1");
  if (mu0 <= 0.0 || mu_growth <= 1.0)
    throw std::invalid_argument("penalty schedule must grow from a positive mu0");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector project_ball(const Vector& x, const Vector& center, double radius) {
  const Vector d = x - center;
  const double norm = d.norm();
  if (norm <= radius) return x;
  return center + (radius / norm) * d;
}

// Tilted objective with quadratic penalties on the constraint system.
class PenaltyModel {
 public:
  PenaltyModel(const ProblemDerivatives& pd, const Vector& tilt, double mu)
      : pd_(pd), tilt_(tilt), mu_(mu) {}

  double value(const Vector& x) const {
    try {
      double v = pd_.objective_value(x) - tilt_.dot(x);
      for (int i = 0; i < pd_.problem().num_constraints(); ++i) {
        const double q = pd_.constraint_value(i, x);
        const double t = pd_.problem().is_equality(i) ? q : std::max(q, 0.0);
        v += mu_ * t * t;
      }
      return v;
    } catch (const EvalError&) {
      return kInf;
    }
  }

  Vector gradient(const Vector& x) const {
    Vector g = pd_.objective_gradient(x) - tilt_;
    for (int i = 0; i < pd_.problem().num_constraints(); ++i) {
      const double q = pd_.constraint_value(i, x);
      const double t = pd_.problem().is_equality(i) ? q : std::max(q, 0.0);
      if (t != 0.0) g += (2.0 * mu_ * t) * pd_.constraint_gradient(i, x);
    }
    return g;
  }

 private:
  const ProblemDerivatives& pd_;
  Vector tilt_;
  double mu_;
};

double feasibility_violation(const ProblemDerivatives& pd, const Vector& x) {
  double worst = 0.0;
  for (int i = 0; i < pd.problem().num_constraints(); ++i) {
    const double q = pd.constraint_value(i, x);
    worst = std::max(worst, pd.problem().is_equality(i) ? std::abs(q)
                                                        : std::max(q, 0.0));
  }
  return worst;
}

// Projected gradient descent with Barzilai-Borwein steps and a nonmonotone
// Armijo line search, constrained to the ball around `center`.
Vector descend(const PenaltyModel& model, Vector x, const Vector& center,
               double radius, int max_iters, double tol_stat) {
  constexpr double kArmijo = 1e-4;
  constexpr int kMemory = 10;

  x = project_ball(x, center, radius);
  Vector g = model.gradient(x);
  double step = 1.0 / std::max(1.0, g.norm());
  std::vector<double> recent{model.value(x)};

  for (int iter = 0; iter < max_iters; ++iter) {
    if ((x - project_ball(x - g, center, radius)).norm() <= tol_stat) break;

    const double fmax = *std::max_element(recent.begin(), recent.end());
    double t = std::clamp(step, 1e-12, 1e6);
    Vector x_next;
    double f_next = kInf;
    for (int bt = 0; bt < 60; ++bt) {
      x_next = project_ball(x - t * g, center, radius);
      f_next = model.value(x_next);
      if (f_next <= fmax + kArmijo * g.dot(x_next - x)) break;
      t /= 2.0;
    }
    if (!std::isfinite(f_next)) break;

    const Vector s = x_next - x;
    if (s.norm() == 0.0) break;
    const Vector g_next = model.gradient(x_next);
    const Vector y = g_next - g;
    const double sy = s.dot(y);
    step = sy > 0.0 ? s.dot(s) / sy : 2.0 * t;

    x = std::move(x_next);
    g = g_next;
    recent.push_back(f_next);
    if (recent.size() > kMemory) recent.erase(recent.begin());
  }
  return x;
}

std::vector<Vector> multistart_points(const Vector& xbar, const OracleConfig& cfg) {
  std::vector<Vector> starts{xbar};
  std::mt19937_64 rng(cfg.seed + 0x5eedULL);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const int n = static_cast<int>(xbar.size());
  while (static_cast<int>(starts.size()) < cfg.n_starts) {
    Vector u(n);
    for (int j = 0; j < n; ++j) u(j) = sym(rng);
    const double norm = u.norm();
    if (norm > 1.0) u /= norm;
    starts.push_back(xbar + (cfg.gamma / 2.0) * u);
  }
  return starts;
}

}  // namespace

std::pair<Vector, SolveStatus> solve_tilted(const ProblemDerivatives& pd,
                                            const Vector& xbar, const Vector& tilt,
                                            const OracleConfig& cfg) {
  cfg.validate();
  const auto starts = multistart_points(xbar, cfg);

  struct Outcome {
    Vector x;
    double feas, stat, tilted_obj;
    bool converged;
  };
  std::vector<Outcome> outcomes;
  outcomes.reserve(starts.size());

  for (const auto& s : starts) {
    Vector x = s;
    double mu = cfg.mu0;
    for (int round = 0; round < cfg.penalty_rounds; ++round, mu *= cfg.mu_growth)
      x = descend(PenaltyModel(pd, tilt, mu), x, xbar, cfg.gamma, cfg.max_iters,
                  cfg.tol_stat);

    Outcome o;
    o.x = x;
    o.feas = feasibility_violation(pd, x);
    const PenaltyModel final_model(pd, tilt, mu / cfg.mu_growth);
    o.stat = (x - project_ball(x - final_model.gradient(x), xbar, cfg.gamma)).norm();
    o.converged = o.feas <= cfg.tol_feas && o.stat <= cfg.tol_stat;
    try {
      o.tilted_obj = pd.objective_value(x) - tilt.dot(x);
    } catch (const EvalError&) {
      o.tilted_obj = kInf;
    }
    outcomes.push_back(std::move(o));
  }

  // Best outcome: lowest tilted objective among feasible points, falling
  // back to the least-infeasible point when nothing reached feasibility.
  const Outcome* best = nullptr;
  for (const auto& o : outcomes) {
    if (best == nullptr) {
      best = &o;
      continue;
    }
    const bool o_feas = o.feas <= cfg.tol_feas, b_feas = best->feas <= cfg.tol_feas;
    if (o_feas != b_feas) {
      if (o_feas) best = &o;
    } else if (o_feas ? o.tilted_obj < best->tilted_obj : o.feas < best->feas) {
      best = &o;
    }
  }

  double diameter = 0.0;
  int n_conv = 0;
  for (const auto& o : outcomes)
    if (o.converged) ++n_conv;
  for (size_t i = 0; i < outcomes.size(); ++i)
    for (size_t j = i + 1; j < outcomes.size(); ++j) {
      const bool both = outcomes[i].converged && outcomes[j].converged;
      if (n_conv >= 2 ? both : true)
        diameter = std::max(diameter, (outcomes[i].x - outcomes[j].x).norm());
    }

  SolveStatus st;
  st.converged = best->converged;
  st.feas_residual = best->feas;
  st.stat_residual = best->stat;
  st.cluster_diameter = diameter;
  return {best->x, st};
}

OracleReport estimate_tilt_modulus(const ProblemDerivatives& pd, const Vector& xbar,
                                   const OracleConfig& cfg,
                                   std::optional<double> reference_bound) {
  cfg.validate();
  const int n = static_cast<int>(xbar.size());

  // Tilt set: the origin, the signed axis tilts, then seeded directions.
  std::vector<Vector> tilts{Vector::Zero(n)};
  for (int j = 0; j < n && static_cast<int>(tilts.size()) < cfg.n_tilts; ++j)
    for (double sign : {1.0, -1.0}) {
      if (static_cast<int>(tilts.size()) >= cfg.n_tilts) break;
      Vector v = Vector::Zero(n);
      v(j) = sign * cfg.delta;
      tilts.push_back(v);
    }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(tilts.size()) < cfg.n_tilts) {
    Vector v(n);
    for (int j = 0; j < n; ++j) v(j) = gauss(rng);
    v *= cfg.delta * (0.3 + 0.7 * unit(rng)) / v.norm();
    tilts.push_back(v);
  }

  OracleReport rep;
  rep.reference_bound = reference_bound;
  rep.empirical_single_valued = true;
  for (const auto& v : tilts) {
    auto [x, st] = solve_tilted(pd, xbar, v, cfg);
    if (!st.converged) rep.solver_degraded = true;
    if (st.cluster_diameter > cfg.tol_cluster) rep.empirical_single_valued = false;
    rep.samples.push_back(TiltSample{v, std::move(x), st});
  }
  rep.untilted_matches_base = (rep.samples[0].minimizer - xbar).norm() <= 1e-5;

  for (size_t i = 0; i < rep.samples.size(); ++i)
    for (size_t j = i + 1; j < rep.samples.size(); ++j) {
      const double dv = (rep.samples[i].tilt - rep.samples[j].tilt).norm();
      if (dv < cfg.delta / 10.0) continue;
      const double dm = (rep.samples[i].minimizer - rep.samples[j].minimizer).norm();
      rep.lipschitz_estimate = std::max(rep.lipschitz_estimate, dm / dv);
    }

  if (reference_bound)
    rep.agreement = std::abs(rep.lipschitz_estimate - *reference_bound) <=
                    0.25 * std::max(*reference_bound, 0.1);
  return rep;
}

}  // namespace tiltcheck
