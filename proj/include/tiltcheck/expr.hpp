#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>

namespace tiltcheck {

enum class ExprKind {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // integer exponent only
  Neg,
  Sin,
  Cos,
  Exp,
  Log
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. Always build through the factory functions
/// below; they fold constants and apply the 0/1 identities, so a stored
/// tree is already simplified.
class Expr {
 public:
  ExprKind kind;
  double value = 0.0;  // Constant payload
  int var = -1;        // Variable payload
  int exponent = 0;    // Pow payload
  ExprPtr a, b;        // operands; b is null for unary nodes

  bool is_constant(double v) const {
    return kind == ExprKind::Constant && value == v;
  }
};

/// Thrown when evaluation leaves the domain (division by zero, log of a
/// non-positive value) or produces a non-finite number.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExprPtr constant(double v);
ExprPtr variable(int index);
ExprPtr add(ExprPtr x, ExprPtr y);
ExprPtr sub(ExprPtr x, ExprPtr y);
ExprPtr mul(ExprPtr x, ExprPtr y);
ExprPtr div(ExprPtr x, ExprPtr y);
ExprPtr pow(ExprPtr base, int exponent);
ExprPtr neg(ExprPtr x);
ExprPtr sin(ExprPtr x);
ExprPtr cos(ExprPtr x);
ExprPtr exp(ExprPtr x);
ExprPtr log(ExprPtr x);

double evaluate(const Expr& e, std::span<const double> x);

/// Exact symbolic partial derivative with respect to variable `var_index`.
/// Total on any valid tree; repeated application yields Hessians.
ExprPtr differentiate(const ExprPtr& e, int var_index);

/// Largest variable index referenced, or -1 for a constant expression.
int max_var_index(const Expr& e);

/// Renders the expression in the problem-file grammar; parsing the result
/// reproduces the same tree.
std::string to_string(const Expr& e, std::span<const std::string> var_names);

/// Shortest decimal that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace tiltcheck
