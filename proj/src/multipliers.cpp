#include "tiltcheck/multipliers.hpp"

#include <algorithm>
#include <cmath>

namespace tiltcheck {

namespace {

// The polyhedron's variables are the equality multipliers plus the active
// inequality multipliers; inactive components are identically zero.
std::vector<int> live_indices(const MultiplierPolyhedron& poly) {
  std::vector<int> live;
  live.reserve(static_cast<size_t>(poly.num_eq) + poly.active_ineq.size());
  for (int i = 0; i < poly.num_eq; ++i) live.push_back(i);
  live.insert(live.end(), poly.active_ineq.begin(), poly.active_ineq.end());
  return live;
}

LPProblem base_lp(const MultiplierPolyhedron& poly, const std::vector<int>& live) {
  const long nv = static_cast<long>(live.size());
  LPProblem lp;
  lp.c = Vector::Zero(nv);
  lp.a.resize(poly.dimension(), nv);
  for (long k = 0; k < nv; ++k)
    lp.a.col(k) = poly.jacobian.row(live[static_cast<size_t>(k)]).transpose();
  lp.b = poly.target;
  lp.nonneg.assign(static_cast<size_t>(nv), false);
  for (long k = 0; k < nv; ++k)
    lp.nonneg[static_cast<size_t>(k)] = live[static_cast<size_t>(k)] >= poly.num_eq;
  return lp;
}

Vector expand(const MultiplierPolyhedron& poly, const std::vector<int>& live,
              const Vector& live_values) {
  Vector full = Vector::Zero(poly.num_constraints());
  for (size_t k = 0; k < live.size(); ++k) full(live[k]) = live_values(static_cast<long>(k));
  return full;
}

void require_nonempty(const MultiplierPolyhedron& poly) {
  if (!poly.nonempty)
    throw std::invalid_argument("the multiplier polyhedron is empty");
}

}  // namespace

MultiplierPolyhedron build_polyhedron(const StationaryData& sd, const Vector& target) {
  if (target.size() != sd.n())
    throw std::invalid_argument("target dimension does not match the problem");
  MultiplierPolyhedron poly;
  poly.jacobian = sd.con_grads;
  poly.target = target;
  poly.num_eq = sd.num_eq;
  poly.active_ineq = sd.active_ineq;

  const auto live = live_indices(poly);
  const LPResult feas = solve_lp(base_lp(poly, live));
  poly.nonempty = feas.status == LPStatus::Optimal;
  if (poly.nonempty) poly.feasible_point = expand(poly, live, feas.x);
  return poly;
}

bool is_stationary(const MultiplierPolyhedron& poly) { return poly.nonempty; }

bool contains(const MultiplierPolyhedron& poly, const Vector& lambda, double tol) {
  if (lambda.size() != poly.num_constraints()) return false;
  const double scale = std::max(1.0, poly.target.cwiseAbs().maxCoeff());
  if ((poly.jacobian.transpose() * lambda - poly.target).cwiseAbs().maxCoeff() >
      tol * scale)
    return false;
  for (int i = poly.num_eq; i < poly.num_constraints(); ++i) {
    const bool active = std::binary_search(poly.active_ineq.begin(),
                                           poly.active_ineq.end(), i);
    if (active ? lambda(i) < -tol : std::abs(lambda(i)) > tol) return false;
  }
  return true;
}

SupportUnion support_union(const MultiplierPolyhedron& poly, double tol_pos) {
  require_nonempty(poly);
  const auto live = live_indices(poly);
  const long nv = static_cast<long>(live.size());

  SupportUnion result;
  std::vector<Vector> maximizers;
  for (size_t k = 0; k < live.size(); ++k) {
    const int idx = live[k];
    if (idx < poly.num_eq) continue;
    // max lambda_idx over the polyhedron, capped by lambda_idx <= 1 so the
    // LP stays bounded; the cap does not change positivity of the supremum.
    LPProblem lp = base_lp(poly, live);
    lp.sense = LPSense::Maximize;
    lp.c(static_cast<long>(k)) = 1.0;
    const long rows = lp.a.rows();
    lp.a.conservativeResize(rows + 1, nv + 1);
    lp.a.row(rows).setZero();
    lp.a.col(nv).setZero();
    lp.a(rows, static_cast<long>(k)) = 1.0;
    lp.a(rows, nv) = 1.0;  // slack of the cap
    lp.b.conservativeResize(rows + 1);
    lp.b(rows) = 1.0;
    lp.c.conservativeResize(nv + 1);
    lp.c(nv) = 0.0;
    lp.nonneg.push_back(true);

    const LPResult r = solve_lp(lp);
    if (r.status != LPStatus::Optimal)
      throw std::runtime_error("support LP did not solve on a nonempty polyhedron");
    if (r.value > tol_pos) {
      result.indices.push_back(idx);
      maximizers.push_back(expand(poly, live, r.x.head(nv)));
    }
  }

  if (maximizers.empty()) {
    result.lambda_tilde = poly.feasible_point;
  } else {
    Vector avg = Vector::Zero(poly.num_constraints());
    for (const auto& m : maximizers) avg += m;
    result.lambda_tilde = avg / static_cast<double>(maximizers.size());
  }
  return result;
}

std::optional<Vector> bounded_multiplier(const MultiplierPolyhedron& poly,
                                         double gamma) {
  require_nonempty(poly);
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be positive");
  const auto live = live_indices(poly);

  // l1-norm minimization: split each equality multiplier into a difference
  // of nonnegative parts; active inequality multipliers are already >= 0.
  LPProblem lp;
  long nv = 0;
  std::vector<long> pos(live.size()), negc(live.size(), -1);
  for (size_t k = 0; k < live.size(); ++k) {
    pos[k] = nv++;
    if (live[k] < poly.num_eq) negc[k] = nv++;
  }
  lp.a.resize(poly.dimension(), nv);
  for (size_t k = 0; k < live.size(); ++k) {
    const Vector g = poly.jacobian.row(live[k]).transpose();
    lp.a.col(pos[k]) = g;
    if (negc[k] >= 0) lp.a.col(negc[k]) = -g;
  }
  lp.b = poly.target;
  lp.c = Vector::Ones(nv);
  lp.nonneg.assign(static_cast<size_t>(nv), true);

  const LPResult r = solve_lp(lp);
  if (r.status != LPStatus::Optimal)
    throw std::runtime_error("l1 minimization LP did not solve");
  Vector live_values(static_cast<long>(live.size()));
  for (size_t k = 0; k < live.size(); ++k) {
    double v = r.x(pos[k]);
    if (negc[k] >= 0) v -= r.x(negc[k]);
    live_values(static_cast<long>(k)) = v;
  }
  const Vector lambda = expand(poly, live, live_values);
  if (lambda.norm() <= gamma * poly.target.norm() + 1e-12) return lambda;
  return std::nullopt;
}

std::vector<Vector> enumerate_vertices(const MultiplierPolyhedron& poly,
                                       int max_constraints, double tol_rank) {
  require_nonempty(poly);
  if (poly.num_constraints() > max_constraints)
    throw GuardError("vertex enumeration guard exceeded: " +
                     std::to_string(poly.num_constraints()) + " constraints > " +
                     std::to_string(max_constraints));

  // Extreme points exist only when the free block is pointed.
  std::vector<int> eq_idx;
  for (int i = 0; i < poly.num_eq; ++i) eq_idx.push_back(i);
  Matrix eq_rows(poly.num_eq, poly.dimension());
  for (int i = 0; i < poly.num_eq; ++i) eq_rows.row(i) = poly.jacobian.row(i);
  if (poly.num_eq > 0 && rank(eq_rows, tol_rank) < poly.num_eq) return {};

  const auto& act = poly.active_ineq;
  const size_t na = act.size();
  const double scale = std::max(1.0, poly.target.cwiseAbs().maxCoeff());
  std::vector<Vector> vertices;

  for (size_t mask = 0; mask < (size_t{1} << na); ++mask) {
    std::vector<int> support = eq_idx;
    for (size_t j = 0; j < na; ++j)
      if (mask & (size_t{1} << j)) support.push_back(act[j]);
    const long k = static_cast<long>(support.size());
    if (k > poly.dimension()) continue;

    Matrix cols(poly.dimension(), k);
    for (long c = 0; c < k; ++c)
      cols.col(c) = poly.jacobian.row(support[static_cast<size_t>(c)]).transpose();
    if (k > 0 && rank(cols, tol_rank) < k) continue;

    Vector sol;
    if (k == 0) {
      if (poly.target.cwiseAbs().maxCoeff() > 1e-9 * scale) continue;
      sol.resize(0);
    } else {
      sol = cols.colPivHouseholderQr().solve(poly.target);
      if ((cols * sol - poly.target).cwiseAbs().maxCoeff() > 1e-9 * scale) continue;
    }

    bool nonneg_ok = true;
    Vector full = Vector::Zero(poly.num_constraints());
    for (long c = 0; c < k; ++c) {
      const int idx = support[static_cast<size_t>(c)];
      double v = sol(c);
      if (idx >= poly.num_eq) {
        if (v < -1e-9) {
          nonneg_ok = false;
          break;
        }
        v = std::max(v, 0.0);
      }
      full(idx) = v;
    }
    if (!nonneg_ok) continue;

    bool duplicate = false;
    for (const auto& w : vertices)
      if ((w - full).cwiseAbs().maxCoeff() <= 1e-8) {
        duplicate = true;
        break;
      }
    if (!duplicate) vertices.push_back(std::move(full));
  }

  std::sort(vertices.begin(), vertices.end(), [](const Vector& a, const Vector& b) {
    for (long i = 0; i < a.size(); ++i)
      if (a(i) != b(i)) return a(i) < b(i);
    return false;
  });
  return vertices;
}

DirectionalMultipliers directional_multipliers(const MultiplierPolyhedron& poly,
                                               const StationaryData& sd,
                                               const Vector& v,
                                               int max_constraints) {
  require_nonempty(poly);
  const auto live = live_indices(poly);
  LPProblem lp = base_lp(poly, live);
  lp.sense = LPSense::Maximize;
  Vector coef(static_cast<long>(live.size()));
  for (size_t k = 0; k < live.size(); ++k)
    coef(static_cast<long>(k)) = v.dot(sd.con_hess[static_cast<size_t>(live[k])] * v);
  lp.c = coef;

  DirectionalMultipliers out;
  const LPResult r = solve_lp(lp);
  out.status = r.status;
  if (r.status != LPStatus::Optimal) return out;
  out.value = r.value;
  out.maximizer = expand(poly, live, r.x);

  if (poly.num_constraints() <= max_constraints) {
    const double scale = 1.0 + std::abs(out.value);
    for (auto& vert : enumerate_vertices(poly, max_constraints)) {
      double obj = 0.0;
      for (size_t k = 0; k < live.size(); ++k)
        obj += coef(static_cast<long>(k)) * vert(live[k]);
      if (obj >= out.value - 1e-8 * scale) out.face_vertices.push_back(vert);
    }
  }
  return out;
}

}  // namespace tiltcheck
