#include "tiltcheck/tilt.hpp"

#include <algorithm>
#include <cmath>

#include "tiltcheck/linalg.hpp"
#include "tiltcheck/lp.hpp"

namespace tiltcheck {

bool CriticalCone::contains(const Vector& v, double tol) const {
  const double vnorm = v.norm();
  for (long r = 0; r < eq_rows.rows(); ++r) {
    const double scale = std::max(1.0, eq_rows.row(r).norm() * vnorm);
    if (std::abs(eq_rows.row(r).dot(v)) > tol * scale) return false;
  }
  for (long r = 0; r < ineq_rows.rows(); ++r) {
    const double scale = std::max(1.0, ineq_rows.row(r).norm() * vnorm);
    if (ineq_rows.row(r).dot(v) > tol * scale) return false;
  }
  return true;
}

CriticalCone critical_cone(const StationaryData& sd,
                           const MultiplierPolyhedron& poly, const Vector& lambda,
                           double tol_pos) {
  if (!contains(poly, lambda))
    throw std::invalid_argument("lambda is not a member of the multiplier set");

  CriticalCone cone;
  cone.base_multiplier = lambda;
  for (int i = 0; i < sd.num_eq; ++i) cone.eq_indices.push_back(i);
  for (int i : sd.active_ineq) {
    if (lambda(i) > tol_pos)
      cone.eq_indices.push_back(i);
    else
      cone.ineq_indices.push_back(i);
  }
  std::sort(cone.eq_indices.begin(), cone.eq_indices.end());

  cone.eq_rows.resize(static_cast<long>(cone.eq_indices.size()), sd.n());
  for (size_t r = 0; r < cone.eq_indices.size(); ++r)
    cone.eq_rows.row(static_cast<long>(r)) = sd.con_grads.row(cone.eq_indices[r]);
  cone.ineq_rows.resize(static_cast<long>(cone.ineq_indices.size()), sd.n());
  for (size_t r = 0; r < cone.ineq_indices.size(); ++r)
    cone.ineq_rows.row(static_cast<long>(r)) = sd.con_grads.row(cone.ineq_indices[r]);
  return cone;
}

bool graphical_derivative_member(const StationaryData& sd,
                                 const MultiplierPolyhedron& poly,
                                 const Vector& lambda, const Vector& w,
                                 const Vector& z) {
  const CriticalCone cone = critical_cone(sd, poly, lambda);
  if (!cone.contains(w)) return false;  // N_K(w) is empty off the cone

  const Matrix q_hess = sd.lagrangian_hessian(lambda) - sd.obj_hess;
  const Vector residual = z - q_hess * w;
  // Normal-cone generators: equality rows free, inequality rows active at w
  // enter with nonnegative coefficients, strictly negative rows are absent.
  std::vector<int> free_rows = cone.eq_indices, cone_rows;
  const double wnorm = w.norm();
  for (size_t r = 0; r < cone.ineq_indices.size(); ++r) {
    const double g_dot_w = cone.ineq_rows.row(static_cast<long>(r)).dot(w);
    const double scale =
        std::max(1.0, cone.ineq_rows.row(static_cast<long>(r)).norm() * wnorm);
    if (std::abs(g_dot_w) <= 1e-9 * scale)
      cone_rows.push_back(cone.ineq_indices[r]);
  }

  const long nv = static_cast<long>(free_rows.size() + cone_rows.size());
  LPProblem lp;
  lp.c = Vector::Zero(nv);
  lp.a.resize(sd.n(), nv);
  lp.nonneg.assign(static_cast<size_t>(nv), false);
  long col = 0;
  for (int i : free_rows) lp.a.col(col++) = sd.con_grads.row(i).transpose();
  for (int i : cone_rows) {
    lp.a.col(col) = sd.con_grads.row(i).transpose();
    lp.nonneg[static_cast<size_t>(col)] = true;
    ++col;
  }
  // Scale so the phase-1 infeasibility threshold acts relative to ||z||.
  const double scale = std::max(1.0, residual.cwiseAbs().maxCoeff());
  lp.b = residual / scale;
  return solve_lp(lp).status == LPStatus::Optimal;
}

ReducedHessian reduced_hessian(const StationaryData& sd,
                               const MultiplierPolyhedron& poly, double tol_rank,
                               double tol_pos) {
  const SupportUnion su = support_union(poly, tol_pos);

  ReducedHessian out;
  out.support_union = su.indices;
  out.lambda_used = su.lambda_tilde;

  std::vector<int> rows_idx;
  for (int i = 0; i < sd.num_eq; ++i) rows_idx.push_back(i);
  rows_idx.insert(rows_idx.end(), su.indices.begin(), su.indices.end());
  Matrix rows(static_cast<long>(rows_idx.size()), sd.n());
  for (size_t r = 0; r < rows_idx.size(); ++r)
    rows.row(static_cast<long>(r)) = sd.con_grads.row(rows_idx[r]);

  out.basis = null_space_orthonormal(rows, tol_rank);
  const Matrix h = sd.lagrangian_hessian(su.lambda_tilde);
  Matrix hr = out.basis.transpose() * h * out.basis;
  out.h = (hr + hr.transpose()) / 2.0;
  return out;
}

TiltReport tilt_verdict(const StationaryData& sd, const MultiplierPolyhedron& poly,
                        const CQReport& cq, double tol_pos, double tol_rank,
                        int max_vertex_constraints) {
  if (!poly.nonempty)
    throw std::invalid_argument("tilt verdict requires a stationary point");

  TiltReport rep;
  rep.stationary = true;
  rep.cq_grade = cq.rcrcq.verdict;

  const ReducedHessian rh = reduced_hessian(sd, poly, tol_rank, tol_pos);
  rep.reduced_hessian = rh.h;
  rep.subspace_basis = rh.basis;
  rep.lambda_used = rh.lambda_used;

  // Theorem-level invariant: the quadratic form on the subspace is the same
  // for every multiplier. Verified across extreme points when enumeration
  // is feasible.
  if (poly.num_constraints() <= max_vertex_constraints && rh.basis.cols() > 0) {
    const auto vertices = enumerate_vertices(poly, max_vertex_constraints, tol_rank);
    bool ok = !vertices.empty();
    for (size_t a = 0; a < vertices.size() && ok; ++a) {
      const Matrix ha = sd.lagrangian_hessian(vertices[a]);
      for (size_t b = a + 1; b < vertices.size() && ok; ++b) {
        const Matrix hb = sd.lagrangian_hessian(vertices[b]);
        for (long j = 0; j < rh.basis.cols(); ++j) {
          const Vector w = rh.basis.col(j);
          if (std::abs(w.dot(ha * w) - w.dot(hb * w)) > 1e-8) {
            ok = false;
            break;
          }
        }
      }
    }
    rep.multiplier_independence_verified = ok;
    if (!ok && cq.rcrcq.verdict == RankVerdict::HoldsSampled)
      rep.note = "multiplier-dependent quadratic form detected on the subspace";
  }

  const bool rcrcq_ok = cq.rcrcq.verdict == RankVerdict::HoldsSampled;

  if (rh.basis.cols() == 0) {
    // Trivial subspace: only w = 0 qualifies, 0/0 reads as 0.
    rep.verdict = rcrcq_ok ? TiltVerdict::TiltStable : TiltVerdict::Inconclusive;
    rep.tilt_bound = 0.0;
    if (!rcrcq_ok) rep.note = "RCRCQ not established; spectrum is diagnostic only";
    return rep;
  }

  const auto [lam_min, evec] = sym_eig_min(rh.h);
  rep.min_eigenvalue = lam_min;

  if (!rcrcq_ok) {
    rep.verdict = TiltVerdict::Inconclusive;
    rep.note = "RCRCQ not established; spectrum is diagnostic only";
    return rep;
  }

  if (lam_min > tol_pos) {
    rep.verdict = TiltVerdict::TiltStable;
    rep.tilt_bound = 1.0 / lam_min;
  } else {
    rep.verdict = TiltVerdict::NotTiltStable;
    rep.marginal = lam_min >= -tol_pos;
    Vector dir = rh.basis * evec;
    rep.failure_direction = dir / dir.norm();
  }
  return rep;
}

}  // namespace tiltcheck
