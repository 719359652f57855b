#include "tiltcheck/problem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

namespace tiltcheck {

namespace {

struct Token {
  enum Type { Ident, Number, Plus, Minus, Star, Slash, Caret, LParen, RParen, Le, Eq, End };
  Type type;
  std::string text;
  double num = 0.0;
  int line = 0;
  int col = 0;
};

std::vector<Token> tokenize_line(const std::string& s, int line_no) {
  std::vector<Token> toks;
  size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.line = line_no;
    t.col = static_cast<int>(i) + 1;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.type = Token::Ident;
      t.text = s.substr(i, j - i);
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < s.size() &&
                std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      const char* begin = s.c_str() + i;
      char* end = nullptr;
      t.type = Token::Number;
      t.num = std::strtod(begin, &end);
      if (end == begin) throw ParseError(line_no, t.col, "malformed number");
      t.text = s.substr(i, static_cast<size_t>(end - begin));
      i += static_cast<size_t>(end - begin);
    } else if (c == '<' && i + 1 < s.size() && s[i + 1] == '=') {
      t.type = Token::Le;
      t.text = "<=";
      i += 2;
    } else {
      switch (c) {
        case '+': t.type = Token::Plus; break;
        case '-': t.type = Token::Minus; break;
        case '*': t.type = Token::Star; break;
        case '/': t.type = Token::Slash; break;
        case '^': t.type = Token::Caret; break;
        case '(': t.type = Token::LParen; break;
        case ')': t.type = Token::RParen; break;
        case '=': t.type = Token::Eq; break;
        default:
          throw ParseError(line_no, t.col,
                           std::string("unexpected character '") + c + "'");
      }
      t.text = std::string(1, c);
      ++i;
    }
    toks.push_back(std::move(t));
  }
  Token end;
  end.type = Token::End;
  end.line = line_no;
  end.col = static_cast<int>(s.size()) + 1;
  toks.push_back(end);
  return toks;
}

class ExprParser {
 public:
  ExprParser(const std::vector<Token>& toks, size_t pos,
             const std::vector<std::string>& var_names)
      : toks_(toks), pos_(pos), vars_(var_names) {}

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    while (peek().type == Token::Plus || peek().type == Token::Minus) {
      const bool plus = peek().type == Token::Plus;
      ++pos_;
      ExprPtr rhs = parse_term();
      e = plus ? add(e, rhs) : sub(e, rhs);
    }
    return e;
  }

  size_t pos() const { return pos_; }

 private:
  const Token& peek() const { return toks_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(peek().line, peek().col, msg);
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_unary();
    while (peek().type == Token::Star || peek().type == Token::Slash) {
      const bool star = peek().type == Token::Star;
      ++pos_;
      ExprPtr rhs = parse_unary();
      e = star ? mul(e, rhs) : div(e, rhs);
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (peek().type == Token::Minus) {
      ++pos_;
      return neg(parse_unary());
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    while (peek().type == Token::Caret) {
      ++pos_;
      if (peek().type != Token::Number) fail("expected an integer exponent after '^'");
      const double v = peek().num;
      const int k = static_cast<int>(v);
      if (v != static_cast<double>(k) || k < 0)
        fail("exponent must be a nonnegative integer");
      ++pos_;
      base = pow(base, k);
    }
    return base;
  }

  ExprPtr parse_atom() {
    const Token& t = peek();
    if (t.type == Token::Number) {
      ++pos_;
      return constant(t.num);
    }
    if (t.type == Token::LParen) {
      ++pos_;
      ExprPtr e = parse_expr();
      if (peek().type != Token::RParen) fail("expected ')'");
      ++pos_;
      return e;
    }
    if (t.type == Token::Ident) {
      const std::string& name = t.text;
      if (name == "sin" || name == "cos" || name == "exp" || name == "log") {
        ++pos_;
        if (peek().type != Token::LParen) fail("expected '(' after '" + name + "'");
        ++pos_;
        ExprPtr arg = parse_expr();
        if (peek().type != Token::RParen) fail("expected ')'");
        ++pos_;
        if (name == "sin") return sin(arg);
        if (name == "cos") return cos(arg);
        if (name == "exp") return exp(arg);
        return log(arg);
      }
      auto it = std::find(vars_.begin(), vars_.end(), name);
      if (it == vars_.end())
        throw ParseError(t.line, t.col, "unknown identifier '" + name + "'");
      ++pos_;
      return variable(static_cast<int>(it - vars_.begin()));
    }
    fail("expected a number, variable, or '('");
  }

  const std::vector<Token>& toks_;
  size_t pos_;
  const std::vector<std::string>& vars_;
};

bool is_valid_ident(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return s != "sin" && s != "cos" && s != "exp" && s != "log";
}

}  // namespace

int Problem::internal_index(int pos) const {
  for (size_t i = 0; i < file_index.size(); ++i)
    if (file_index[i] == pos) return static_cast<int>(i);
  throw std::out_of_range("no constraint at file position " + std::to_string(pos));
}

Problem parse_problem(const std::string& text, const std::string& name) {
  Problem p;
  p.name = name;

  std::vector<ExprPtr> eqs, ineqs;
  std::vector<int> eq_pos, ineq_pos;
  bool saw_var = false, saw_min = false, saw_point = false;
  int last_line = 0;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    last_line = line_no;
    auto toks = tokenize_line(raw, line_no);
    if (toks.front().type == Token::End) continue;  // blank or comment
    const Token& head = toks.front();
    if (head.type != Token::Ident)
      throw ParseError(head.line, head.col,
                       "expected a directive (var/min/st/eq/point)");
    const std::string& kw = head.text;

    if (kw == "var") {
      if (saw_var) throw ParseError(head.line, head.col, "duplicate 'var' line");
      for (size_t i = 1; i + 1 < toks.size(); ++i) {
        if (toks[i].type != Token::Ident || !is_valid_ident(toks[i].text))
          throw ParseError(toks[i].line, toks[i].col, "expected a variable name");
        if (std::find(p.var_names.begin(), p.var_names.end(), toks[i].text) !=
            p.var_names.end())
          throw ParseError(toks[i].line, toks[i].col,
                           "duplicate variable '" + toks[i].text + "'");
        p.var_names.push_back(toks[i].text);
      }
      if (p.var_names.empty())
        throw ParseError(head.line, head.col, "'var' declares no variables");
      saw_var = true;
      continue;
    }

    if (!saw_var)
      throw ParseError(head.line, head.col,
                       "'var' must be the first non-comment line");

    if (kw == "min") {
      if (saw_min) throw ParseError(head.line, head.col, "duplicate 'min' line");
      ExprParser ep(toks, 1, p.var_names);
      p.objective = ep.parse_expr();
      if (toks[ep.pos()].type != Token::End)
        throw ParseError(toks[ep.pos()].line, toks[ep.pos()].col,
                         "unexpected trailing input after objective");
      saw_min = true;
    } else if (kw == "st" || kw == "eq") {
      ExprParser ep(toks, 1, p.var_names);
      ExprPtr e = ep.parse_expr();
      size_t pos = ep.pos();
      const Token::Type rel = kw == "st" ? Token::Le : Token::Eq;
      if (toks[pos].type != rel)
        throw ParseError(toks[pos].line, toks[pos].col,
                         kw == "st" ? "expected '<= 0'" : "expected '= 0'");
      ++pos;
      if (toks[pos].type != Token::Number || toks[pos].num != 0.0)
        throw ParseError(toks[pos].line, toks[pos].col, "right-hand side must be 0");
      ++pos;
      if (toks[pos].type != Token::End)
        throw ParseError(toks[pos].line, toks[pos].col, "unexpected trailing input");
      const int file_pos = static_cast<int>(eqs.size() + ineqs.size()) + 1;
      if (kw == "eq") {
        eqs.push_back(e);
        eq_pos.push_back(file_pos);
      } else {
        ineqs.push_back(e);
        ineq_pos.push_back(file_pos);
      }
    } else if (kw == "point") {
      if (saw_point) throw ParseError(head.line, head.col, "duplicate 'point' line");
      std::vector<double> vals;
      size_t i = 1;
      while (toks[i].type != Token::End) {
        double sign = 1.0;
        if (toks[i].type == Token::Minus) {
          sign = -1.0;
          ++i;
        }
        if (toks[i].type != Token::Number)
          throw ParseError(toks[i].line, toks[i].col, "expected a number");
        vals.push_back(sign * toks[i].num);
        ++i;
      }
      if (vals.size() != p.var_names.size())
        throw ParseError(head.line, head.col,
                         "'point' has " + std::to_string(vals.size()) +
                             " entries for " + std::to_string(p.var_names.size()) +
                             " variables");
      p.point = Eigen::Map<const Vector>(vals.data(), static_cast<long>(vals.size()));
      saw_point = true;
    } else {
      throw ParseError(head.line, head.col, "unknown directive '" + kw + "'");
    }
  }

  if (!saw_var) throw ParseError(last_line, 1, "missing 'var' line");
  if (!saw_min) throw ParseError(last_line, 1, "missing 'min' line");
  if (eqs.empty() && ineqs.empty())
    throw ParseError(last_line, 1, "problem has no constraints (E \xE2\x88\xAA I empty)");

  p.n = static_cast<int>(p.var_names.size());
  p.num_eq = static_cast<int>(eqs.size());
  p.num_ineq = static_cast<int>(ineqs.size());
  p.constraints = std::move(eqs);
  p.constraints.insert(p.constraints.end(), ineqs.begin(), ineqs.end());
  p.file_index = std::move(eq_pos);
  p.file_index.insert(p.file_index.end(), ineq_pos.begin(), ineq_pos.end());

  for (const auto& c : p.constraints)
    if (max_var_index(*c) >= p.n)
      throw std::logic_error("constraint references an undeclared variable");
  return p;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos)
    stem = stem.substr(0, dot);
  return parse_problem(buf.str(), stem);
}

std::string to_text(const Problem& p) {
  std::string out = "var";
  for (const auto& v : p.var_names) out += " " + v;
  out += "\nmin " + to_string(*p.objective, p.var_names) + "\n";
  for (int pos = 1; pos <= p.num_constraints(); ++pos) {
    const int i = p.internal_index(pos);
    if (p.is_equality(i))
      out += "eq " + to_string(*p.constraints[i], p.var_names) + " = 0\n";
    else
      out += "st " + to_string(*p.constraints[i], p.var_names) + " <= 0\n";
  }
  if (p.point) {
    out += "point";
    for (long j = 0; j < p.point->size(); ++j)
      out += " " + format_double((*p.point)(j));
    out += "\n";
  }
  return out;
}

ProblemDerivatives::ProblemDerivatives(const Problem& p)
    : problem_(&p), n_(p.n) {
  auto build = [this](const ExprPtr& f) {
    Derivs d;
    d.value = f;
    d.grad.reserve(static_cast<size_t>(n_));
    for (int j = 0; j < n_; ++j) d.grad.push_back(differentiate(f, j));
    d.hess.resize(static_cast<size_t>(n_));
    for (int j = 0; j < n_; ++j)
      for (int k = j; k < n_; ++k)
        d.hess[static_cast<size_t>(j)].push_back(differentiate(d.grad[static_cast<size_t>(j)], k));
    return d;
  };
  objective_ = build(p.objective);
  constraints_.reserve(p.constraints.size());
  for (const auto& c : p.constraints) constraints_.push_back(build(c));
}

namespace {
std::span<const double> as_span(const Vector& x) {
  return {x.data(), static_cast<size_t>(x.size())};
}
}  // namespace

Vector ProblemDerivatives::eval_grad(const Derivs& d, const Vector& x) const {
  Vector g(n_);
  for (int j = 0; j < n_; ++j) g(j) = evaluate(*d.grad[static_cast<size_t>(j)], as_span(x));
  return g;
}

Matrix ProblemDerivatives::eval_hess(const Derivs& d, const Vector& x) const {
  Matrix h(n_, n_);
  for (int j = 0; j < n_; ++j)
    for (int k = j; k < n_; ++k) {
      const double v =
          evaluate(*d.hess[static_cast<size_t>(j)][static_cast<size_t>(k - j)], as_span(x));
      h(j, k) = v;
      h(k, j) = v;
    }
  return h;
}

double ProblemDerivatives::objective_value(const Vector& x) const {
  return evaluate(*objective_.value, as_span(x));
}
Vector ProblemDerivatives::objective_gradient(const Vector& x) const {
  return eval_grad(objective_, x);
}
Matrix ProblemDerivatives::objective_hessian(const Vector& x) const {
  return eval_hess(objective_, x);
}
double ProblemDerivatives::constraint_value(int i, const Vector& x) const {
  return evaluate(*constraints_[static_cast<size_t>(i)].value, as_span(x));
}
Vector ProblemDerivatives::constraint_gradient(int i, const Vector& x) const {
  return eval_grad(constraints_[static_cast<size_t>(i)], x);
}
Matrix ProblemDerivatives::constraint_hessian(int i, const Vector& x) const {
  return eval_hess(constraints_[static_cast<size_t>(i)], x);
}

Matrix ProblemDerivatives::gradient_rows(const std::vector<int>& indices,
                                         const Vector& x) const {
  Matrix m(static_cast<long>(indices.size()), n_);
  for (size_t r = 0; r < indices.size(); ++r)
    m.row(static_cast<long>(r)) = constraint_gradient(indices[r], x).transpose();
  return m;
}

bool StationaryData::is_active(int i) const {
  return std::binary_search(active_ineq.begin(), active_ineq.end(), i);
}

std::vector<int> StationaryData::active_set() const {
  std::vector<int> s;
  s.reserve(static_cast<size_t>(num_eq) + active_ineq.size());
  for (int i = 0; i < num_eq; ++i) s.push_back(i);
  s.insert(s.end(), active_ineq.begin(), active_ineq.end());
  return s;
}

Matrix StationaryData::lagrangian_hessian(const Vector& lambda) const {
  Matrix h = obj_hess;
  for (int i = 0; i < num_constraints(); ++i)
    if (lambda(i) != 0.0) h += lambda(i) * con_hess[static_cast<size_t>(i)];
  return h;
}

StationaryData evaluate_stationary_data(const ProblemDerivatives& pd,
                                        const Vector& x, double tol_active,
                                        double tol_feas) {
  const Problem& p = pd.problem();
  if (x.size() != p.n)
    throw std::invalid_argument("point dimension does not match the problem");

  StationaryData sd;
  sd.x = x;
  sd.num_eq = p.num_eq;
  sd.num_ineq = p.num_ineq;
  const int ell = p.num_constraints();
  sd.con_vals.resize(ell);
  sd.con_grads.resize(ell, p.n);
  sd.con_hess.reserve(static_cast<size_t>(ell));

  double worst = 0.0;
  int worst_idx = -1;
  for (int i = 0; i < ell; ++i) {
    const double v = pd.constraint_value(i, x);
    sd.con_vals(i) = v;
    const double viol = p.is_equality(i) ? std::abs(v) : std::max(v, 0.0);
    if (viol > worst) {
      worst = viol;
      worst_idx = i;
    }
  }
  if (worst > tol_feas)
    throw InfeasiblePointError(
        "point is infeasible: constraint " +
        std::to_string(p.file_index[static_cast<size_t>(worst_idx)]) +
        " violated by " + format_double(worst));

  sd.obj_grad = pd.objective_gradient(x);
  sd.obj_hess = pd.objective_hessian(x);
  for (int i = 0; i < ell; ++i) {
    sd.con_grads.row(i) = pd.constraint_gradient(i, x).transpose();
    sd.con_hess.push_back(pd.constraint_hessian(i, x));
    if (!p.is_equality(i) && std::abs(sd.con_vals(i)) <= tol_active)
      sd.active_ineq.push_back(i);
  }
  return sd;
}

StationaryData evaluate_stationary_data(const Problem& p, const Vector& x,
                                        double tol_active, double tol_feas) {
  return evaluate_stationary_data(ProblemDerivatives(p), x, tol_active, tol_feas);
}

GradCheckResult check_derivatives(const ProblemDerivatives& pd,
                                  const Vector& center, int n_points,
                                  double radius, double step, uint64_t seed) {
  const Problem& p = pd.problem();
  const int n = p.n;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-radius, radius);

  GradCheckResult res;
  auto rel = [](double ad, double fd) { return std::abs(ad - fd) / std::max(1.0, std::abs(ad)); };

  // Per function: symbolic gradient vs central differences of the value,
  // symbolic Hessian columns vs central differences of the gradient.
  auto check_at = [&](const Vector& x) {
    const int n_funcs = 1 + p.num_constraints();
    for (int f = 0; f < n_funcs; ++f) {
      auto value = [&](const Vector& y) {
        return f == 0 ? pd.objective_value(y) : pd.constraint_value(f - 1, y);
      };
      auto grad = [&](const Vector& y) {
        return f == 0 ? pd.objective_gradient(y) : pd.constraint_gradient(f - 1, y);
      };
      const Vector g = grad(x);
      const Matrix h = f == 0 ? pd.objective_hessian(x) : pd.constraint_hessian(f - 1, x);
      for (int j = 0; j < n; ++j) {
        Vector xp = x, xm = x;
        xp(j) += step;
        xm(j) -= step;
        const double fd = (value(xp) - value(xm)) / (2.0 * step);
        res.max_gradient_rel_err = std::max(res.max_gradient_rel_err, rel(g(j), fd));
        const Vector hd = (grad(xp) - grad(xm)) / (2.0 * step);
        for (int i = 0; i < n; ++i)
          res.max_hessian_rel_err = std::max(res.max_hessian_rel_err, rel(h(i, j), hd(i)));
      }
    }
  };

  int done = 0, attempts = 0;
  while (done < n_points && attempts < 100 * n_points) {
    ++attempts;
    Vector x = center;
    for (int j = 0; j < n; ++j) x(j) += sym(rng);
    try {
      check_at(x);
      ++done;
    } catch (const EvalError&) {
      // point left the expression domain; draw another
    }
  }
  if (done < n_points)
    throw EvalError("could not find enough in-domain sample points");
  return res;
}

}  // namespace tiltcheck
