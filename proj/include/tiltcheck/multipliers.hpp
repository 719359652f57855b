#pragma once

#include <optional>
#include <vector>

#include "tiltcheck/lp.hpp"
#include "tiltcheck/problem.hpp"

namespace tiltcheck {

/// Polyhedron of Lagrange multipliers associated with (x, x*):
///   { lambda : sum_i lambda_i grad q_i(x) = x*,
///     lambda_i >= 0 for active inequalities,
///     lambda_i  = 0 for inactive inequalities }.
/// Indices and multiplier components use the internal (equality-first)
/// ordering of the owning Problem.
struct MultiplierPolyhedron {
  Matrix jacobian;              // rows grad q_i(x), internal order
  Vector target;                // x*
  int num_eq = 0;
  std::vector<int> active_ineq;
  bool nonempty = false;
  Vector feasible_point;        // some member when nonempty

  int num_constraints() const { return static_cast<int>(jacobian.rows()); }
  int dimension() const { return static_cast<int>(jacobian.cols()); }
};

struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

MultiplierPolyhedron build_polyhedron(const StationaryData& sd, const Vector& target);

/// True iff the polyhedron built with x* = -grad(objective) is nonempty.
bool is_stationary(const MultiplierPolyhedron& poly);

/// Membership test within tolerance.
bool contains(const MultiplierPolyhedron& poly, const Vector& lambda,
              double tol = 1e-8);

struct SupportUnion {
  std::vector<int> indices;  // internal inequality indices, sorted
  Vector lambda_tilde;       // member whose positive support is exactly `indices`
};

/// The union of positive supports over the polyhedron, one LP per active
/// index, plus a realizing member obtained by averaging the maximizers.
SupportUnion support_union(const MultiplierPolyhedron& poly, double tol_pos = 1e-9);

/// A member of minimal l1 norm if it satisfies ||lambda|| <= gamma ||x*||,
/// otherwise nullopt.
std::optional<Vector> bounded_multiplier(const MultiplierPolyhedron& poly,
                                         double gamma);

/// All extreme points, by enumeration of candidate supports E union J over
/// J subset of the active inequalities with linearly independent gradient
/// families. Guarded by the total constraint count.
std::vector<Vector> enumerate_vertices(const MultiplierPolyhedron& poly,
                                       int max_constraints = 12,
                                       double tol_rank = 1e-8);

struct DirectionalMultipliers {
  LPStatus status = LPStatus::Infeasible;
  double value = 0.0;
  Vector maximizer;
  std::vector<Vector> face_vertices;  // empty when enumeration was skipped
};

/// argmax over the polyhedron of sum_i lambda_i <v, hess q_i(x) v>; returns
/// the optimal value, one maximizer, and the vertices of the optimal face.
DirectionalMultipliers directional_multipliers(const MultiplierPolyhedron& poly,
                                               const StationaryData& sd,
                                               const Vector& v,
                                               int max_constraints = 12);

}  // namespace tiltcheck
