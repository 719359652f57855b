#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "tiltcheck/expr.hpp"

namespace tiltcheck {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(int line_, int column_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ", column " +
                           std::to_string(column_) + ": " + msg),
        line(line_),
        column(column_) {}
};

/// A nonlinear program
///   minimize objective(x)  s.t.  q_i(x) = 0 (i in E),  q_i(x) <= 0 (i in I).
///
/// Constraints are stored with the equality block first (internal indices
/// 0..num_eq-1), inequalities after.  `file_index` maps an internal index to
/// the 1-based position of the constraint in the source file, which is the
/// indexing used in every user-facing report.
struct Problem {
  std::string name;
  int n = 0;
  std::vector<std::string> var_names;
  ExprPtr objective;
  std::vector<ExprPtr> constraints;
  int num_eq = 0;
  int num_ineq = 0;
  std::vector<int> file_index;
  std::optional<Vector> point;

  int num_constraints() const { return num_eq + num_ineq; }
  bool is_equality(int i) const { return i < num_eq; }
  /// Internal index of the constraint at 1-based file position `pos`.
  int internal_index(int pos) const;
};

Problem parse_problem(const std::string& text, const std::string& name = "");
Problem load_problem(const std::string& path);

/// Prints a problem back in the input grammar; parse(to_text(p)) reproduces
/// the same problem and to_text is a fixed point of parse-then-print.
std::string to_text(const Problem& p);

/// Symbolic gradients and Hessians of the objective and every constraint,
/// built once and evaluated at arbitrary points.
class ProblemDerivatives {
 public:
  explicit ProblemDerivatives(const Problem& p);

  const Problem& problem() const { return *problem_; }

  double objective_value(const Vector& x) const;
  Vector objective_gradient(const Vector& x) const;
  Matrix objective_hessian(const Vector& x) const;
  double constraint_value(int i, const Vector& x) const;
  Vector constraint_gradient(int i, const Vector& x) const;
  Matrix constraint_hessian(int i, const Vector& x) const;

  /// Rows are the gradients of the given internal constraint indices at x.
  Matrix gradient_rows(const std::vector<int>& indices, const Vector& x) const;

 private:
  struct Derivs {
    ExprPtr value;
    std::vector<ExprPtr> grad;          // size n
    std::vector<std::vector<ExprPtr>> hess;  // upper triangle, hess[j][k-j]
  };
  Vector eval_grad(const Derivs& d, const Vector& x) const;
  Matrix eval_hess(const Derivs& d, const Vector& x) const;

  const Problem* problem_;
  int n_;
  Derivs objective_;
  std::vector<Derivs> constraints_;
};

struct InfeasiblePointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// First- and second-order data of a problem at a feasible point.
struct StationaryData {
  Vector x;
  int num_eq = 0;
  int num_ineq = 0;
  Vector obj_grad;
  Matrix obj_hess;
  Vector con_vals;                 // internal order
  Matrix con_grads;                // rows are gradients, internal order
  std::vector<Matrix> con_hess;    // internal order
  std::vector<int> active_ineq;    // internal indices, sorted

  int n() const { return static_cast<int>(x.size()); }
  int num_constraints() const { return num_eq + num_ineq; }
  bool is_active(int i) const;
  /// E followed by the active inequality indices, sorted.
  std::vector<int> active_set() const;
  /// Hessian of the Lagrangian at x for the multiplier `lambda` (internal
  /// order, length num_constraints).
  Matrix lagrangian_hessian(const Vector& lambda) const;
};

StationaryData evaluate_stationary_data(const ProblemDerivatives& pd,
                                        const Vector& x,
                                        double tol_active = 1e-8,
                                        double tol_feas = 1e-8);
StationaryData evaluate_stationary_data(const Problem& p, const Vector& x,
                                        double tol_active = 1e-8,
                                        double tol_feas = 1e-8);

struct GradCheckResult {
  double max_gradient_rel_err = 0.0;
  double max_hessian_rel_err = 0.0;
};

/// Central finite differences of the objective and constraint values
/// against the symbolic gradients, and of the symbolic gradients against
/// the symbolic Hessians, at seeded random points around `center`.
GradCheckResult check_derivatives(const ProblemDerivatives& pd,
                                  const Vector& center, int n_points = 20,
                                  double radius = 0.5, double step = 1e-5,
                                  uint64_t seed = 0);

}  // namespace tiltcheck
