#include "tiltcheck/expr.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>

namespace tiltcheck {

namespace {

ExprPtr make(ExprKind kind, ExprPtr a = nullptr, ExprPtr b = nullptr) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

bool is_const(const ExprPtr& e) { return e->kind == ExprKind::Constant; }

double evaluate_pow_positive(double base, int k) {
  double r = 1.0;
  double p = base;
  for (; k > 0; k >>= 1) {
    if (k & 1) r *= p;
    p *= p;
  }
  return r;
}

}  // namespace

ExprPtr constant(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Constant;
  e->value = v;
  return e;
}

ExprPtr variable(int index) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Variable;
  e->var = index;
  return e;
}

ExprPtr add(ExprPtr x, ExprPtr y) {
  if (is_const(x) && is_const(y)) return constant(x->value + y->value);
  if (x->is_constant(0.0)) return y;
  if (y->is_constant(0.0)) return x;
  return make(ExprKind::Add, std::move(x), std::move(y));
}

ExprPtr sub(ExprPtr x, ExprPtr y) {
  if (is_const(x) && is_const(y)) return constant(x->value - y->value);
  if (y->is_constant(0.0)) return x;
  if (x->is_constant(0.0)) return neg(std::move(y));
  return make(ExprKind::Sub, std::move(x), std::move(y));
}

ExprPtr mul(ExprPtr x, ExprPtr y) {
  if (is_const(x) && is_const(y)) return constant(x->value * y->value);
  if (x->is_constant(0.0) || y->is_constant(0.0)) return constant(0.0);
  if (x->is_constant(1.0)) return y;
  if (y->is_constant(1.0)) return x;
  if (x->is_constant(-1.0)) return neg(std::move(y));
  if (y->is_constant(-1.0)) return neg(std::move(x));
  return make(ExprKind::Mul, std::move(x), std::move(y));
}

ExprPtr div(ExprPtr x, ExprPtr y) {
  if (is_const(x) && is_const(y) && y->value != 0.0)
    return constant(x->value / y->value);
  if (x->is_constant(0.0)) return constant(0.0);
  if (y->is_constant(1.0)) return x;
  return make(ExprKind::Div, std::move(x), std::move(y));
}

ExprPtr pow(ExprPtr base, int exponent) {
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return base;
  if (is_const(base)) return constant(std::pow(base->value, exponent));
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Pow;
  e->exponent = exponent;
  e->a = std::move(base);
  return e;
}

ExprPtr neg(ExprPtr x) {
  if (is_const(x)) return constant(-x->value);
  if (x->kind == ExprKind::Neg) return x->a;
  return make(ExprKind::Neg, std::move(x));
}

ExprPtr sin(ExprPtr x) {
  if (is_const(x)) return constant(std::sin(x->value));
  return make(ExprKind::Sin, std::move(x));
}

ExprPtr cos(ExprPtr x) {
  if (is_const(x)) return constant(std::cos(x->value));
  return make(ExprKind::Cos, std::move(x));
}

ExprPtr exp(ExprPtr x) {
  if (is_const(x)) return constant(std::exp(x->value));
  return make(ExprKind::Exp, std::move(x));
}

ExprPtr log(ExprPtr x) {
  if (is_const(x) && x->value > 0.0) return constant(std::log(x->value));
  return make(ExprKind::Log, std::move(x));
}

double evaluate(const Expr& e, std::span<const double> x) {
  switch (e.kind) {
    case ExprKind::Constant:
      return e.value;
    case ExprKind::Variable:
      return x[static_cast<size_t>(e.var)];
    case ExprKind::Add:
      return evaluate(*e.a, x) + evaluate(*e.b, x);
    case ExprKind::Sub:
      return evaluate(*e.a, x) - evaluate(*e.b, x);
    case ExprKind::Mul:
      return evaluate(*e.a, x) * evaluate(*e.b, x);
    case ExprKind::Div: {
      const double den = evaluate(*e.b, x);
      if (den == 0.0) throw EvalError("division by zero");
      return evaluate(*e.a, x) / den;
    }
    case ExprKind::Pow: {
      const double base = evaluate(*e.a, x);
      int k = e.exponent;
      if (k < 0) {
        if (base == 0.0) throw EvalError("zero raised to a negative power");
        return 1.0 / evaluate_pow_positive(base, -k);
      }
      return evaluate_pow_positive(base, k);
    }
    case ExprKind::Neg:
      return -evaluate(*e.a, x);
    case ExprKind::Sin:
      return std::sin(evaluate(*e.a, x));
    case ExprKind::Cos:
      return std::cos(evaluate(*e.a, x));
    case ExprKind::Exp: {
      const double v = std::exp(evaluate(*e.a, x));
      if (!std::isfinite(v)) throw EvalError("exp overflow");
      return v;
    }
    case ExprKind::Log: {
      const double arg = evaluate(*e.a, x);
      if (arg <= 0.0) throw EvalError("log of a non-positive value");
      return std::log(arg);
    }
  }
  throw EvalError("corrupt expression node");
}

ExprPtr differentiate(const ExprPtr& e, int var_index) {
  switch (e->kind) {
    case ExprKind::Constant:
      return constant(0.0);
    case ExprKind::Variable:
      return constant(e->var == var_index ? 1.0 : 0.0);
    case ExprKind::Add:
      return add(differentiate(e->a, var_index), differentiate(e->b, var_index));
    case ExprKind::Sub:
      return sub(differentiate(e->a, var_index), differentiate(e->b, var_index));
    case ExprKind::Mul:
      return add(mul(differentiate(e->a, var_index), e->b),
                 mul(e->a, differentiate(e->b, var_index)));
    case ExprKind::Div:
      // (a/b)' = (a'b - ab') / b^2
      return div(sub(mul(differentiate(e->a, var_index), e->b),
                     mul(e->a, differentiate(e->b, var_index))),
                 pow(e->b, 2));
    case ExprKind::Pow:
      // (a^k)' = k a^(k-1) a'
      return mul(mul(constant(e->exponent), pow(e->a, e->exponent - 1)),
                 differentiate(e->a, var_index));
    case ExprKind::Neg:
      return neg(differentiate(e->a, var_index));
    case ExprKind::Sin:
      return mul(cos(e->a), differentiate(e->a, var_index));
    case ExprKind::Cos:
      return neg(mul(sin(e->a), differentiate(e->a, var_index)));
    case ExprKind::Exp:
      return mul(exp(e->a), differentiate(e->a, var_index));
    case ExprKind::Log:
      return div(differentiate(e->a, var_index), e->a);
  }
  throw std::logic_error("corrupt expression node");
}

int max_var_index(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Constant:
      return -1;
    case ExprKind::Variable:
      return e.var;
    default: {
      int m = e.a ? max_var_index(*e.a) : -1;
      if (e.b) m = std::max(m, max_var_index(*e.b));
      return m;
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

// Precedence levels used by the printer; mirrors the parser grammar
// (^ binds tighter than unary -, which binds tighter than * /, then + -).
int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
      return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
      return 2;
    case ExprKind::Neg:
      return 3;
    case ExprKind::Pow:
      return 4;
    case ExprKind::Constant:
      return e.value < 0.0 ? 3 : 5;  // negative literals print a leading '-'
    default:
      return 5;
  }
}

void print(const Expr& e, std::span<const std::string> names, std::string& out);

void print_child(const Expr& child, int min_prec,
                 std::span<const std::string> names, std::string& out) {
  const bool parens = precedence(child) < min_prec;
  if (parens) out += '(';
  print(child, names, out);
  if (parens) out += ')';
}

void print(const Expr& e, std::span<const std::string> names, std::string& out) {
  switch (e.kind) {
    case ExprKind::Constant:
      out += format_double(e.value);
      return;
    case ExprKind::Variable:
      out += names[static_cast<size_t>(e.var)];
      return;
    case ExprKind::Add:
      print_child(*e.a, 1, names, out);
      out += " + ";
      print_child(*e.b, 2, names, out);
      return;
    case ExprKind::Sub:
      print_child(*e.a, 1, names, out);
      out += " - ";
      print_child(*e.b, 2, names, out);
      return;
    case ExprKind::Mul:
      print_child(*e.a, 2, names, out);
      out += "*";
      print_child(*e.b, 3, names, out);
      return;
    case ExprKind::Div:
      print_child(*e.a, 2, names, out);
      out += "/";
      print_child(*e.b, 3, names, out);
      return;
    case ExprKind::Neg:
      out += '-';
      print_child(*e.a, 3, names, out);
      return;
    case ExprKind::Pow:
      print_child(*e.a, 5, names, out);
      out += '^';
      out += std::to_string(e.exponent);
      return;
    case ExprKind::Sin:
      out += "sin(";
      print(*e.a, names, out);
      out += ')';
      return;
    case ExprKind::Cos:
      out += "cos(";
      print(*e.a, names, out);
      out += ')';
      return;
    case ExprKind::Exp:
      out += "exp(";
      print(*e.a, names, out);
      out += ')';
      return;
    case ExprKind::Log:
      out += "log(";
      print(*e.a, names, out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e, std::span<const std::string> var_names) {
  std::string out;
  print(e, var_names, out);
  return out;
}

}  // namespace tiltcheck
