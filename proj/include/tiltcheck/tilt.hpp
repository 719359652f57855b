#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tiltcheck/cq.hpp"
#include "tiltcheck/multipliers.hpp"
#include "tiltcheck/problem.hpp"

namespace tiltcheck {

/// Critical cone K(x, x*) represented through a multiplier lambda:
/// equalities on E union I+(lambda), inequalities on the remaining active
/// indices. The represented set does not depend on the chosen lambda.
struct CriticalCone {
  std::vector<int> eq_indices;    // internal
  std::vector<int> ineq_indices;  // internal
  Matrix eq_rows, ineq_rows;
  Vector base_multiplier;

  bool contains(const Vector& v, double tol = 1e-9) const;
};

CriticalCone critical_cone(const StationaryData& sd,
                           const MultiplierPolyhedron& poly, const Vector& lambda,
                           double tol_pos = 1e-9);

/// Membership of z in the graphical derivative of the normal-cone map at
/// (x, x*) applied to w, via the representation
///   DN(w) = hess<lambda, q>(x) w + N_K(w),
/// decided by an LP feasibility problem over the normal-cone generators.
bool graphical_derivative_member(const StationaryData& sd,
                                 const MultiplierPolyhedron& poly,
                                 const Vector& lambda, const Vector& w,
                                 const Vector& z);

struct ReducedHessian {
  Matrix h;                        // basis' * lagrangian_hessian * basis
  Matrix basis;                    // orthonormal columns spanning the subspace
  Vector lambda_used;              // full-support member from support_union
  std::vector<int> support_union;  // internal inequality indices
};

/// Reduced Lagrangian Hessian on { w : <grad q_i(x), w> = 0, i in E u I+ }.
ReducedHessian reduced_hessian(const StationaryData& sd,
                               const MultiplierPolyhedron& poly,
                               double tol_rank = 1e-8, double tol_pos = 1e-9);

enum class TiltVerdict { TiltStable, NotTiltStable, Inconclusive };

struct TiltReport {
  bool stationary = false;
  TiltVerdict verdict = TiltVerdict::Inconclusive;
  double tilt_bound = 0.0;  // meaningful iff verdict == TiltStable
  Matrix reduced_hessian;
  Matrix subspace_basis;
  Vector lambda_used;
  std::optional<double> min_eigenvalue;  // absent for a trivial subspace
  std::optional<Vector> failure_direction;
  bool marginal = false;  // min eigenvalue within tolerance of zero
  bool multiplier_independence_verified = false;
  RankVerdict cq_grade = RankVerdict::FailsWithWitness;
  std::string note;
};

/// Pointbased verdict: positive definiteness of the reduced Lagrangian
/// Hessian decides tilt stability under RCRCQ, with exact bound
/// 1 / lambda_min (bound 0 on a trivial subspace). Without a sampled RCRCQ
/// the verdict is inconclusive and the spectrum is reported as diagnostics.
TiltReport tilt_verdict(const StationaryData& sd, const MultiplierPolyhedron& poly,
                        const CQReport& cq, double tol_pos = 1e-9,
                        double tol_rank = 1e-8, int max_vertex_constraints = 12);

}  // namespace tiltcheck
