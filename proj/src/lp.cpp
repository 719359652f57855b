#include "tiltcheck/lp.hpp"

#include <cmath>
#include <stdexcept>

namespace tiltcheck {

namespace {

constexpr double kEps = 1e-9;
constexpr long kMaxIters = 200000;

// Dense tableau simplex over the split (all-nonnegative) variables.
class Tableau {
 public:
  Tableau(const Matrix& a, const Vector& b, long num_structural)
      : m_(a.rows()), ns_(num_structural), row_active_(m_, true), basis_(m_) {
    // layout: structural columns, artificial columns, rhs
    t_.setZero(m_ + 1, ns_ + m_ + 1);
    t_.topLeftCorner(m_, ns_) = a;
    t_.col(ns_ + m_).head(m_) = b;
    for (long r = 0; r < m_; ++r) {
      if (t_(r, ns_ + m_) < 0.0) t_.row(r) = -t_.row(r);
      t_(r, ns_ + r) = 1.0;
      basis_[static_cast<size_t>(r)] = ns_ + r;
    }
  }

  // Phase 1: minimize the sum of artificials. Returns the attained sum.
  double phase1() {
    t_.row(m_).setZero();
    for (long r = 0; r < m_; ++r) {
      t_.row(m_).head(ns_) -= t_.row(r).head(ns_);
      t_(m_, ns_ + m_) -= t_(r, ns_ + m_);
    }
    run();
    const double art_sum = -t_(m_, ns_ + m_);
    if (art_sum <= 1e-8) drive_out_artificials();
    return art_sum;
  }

  // Phase 2 for min-form structural costs. Returns false when unbounded.
  bool phase2(const Vector& cost) {
    t_.row(m_).setZero();
    t_.row(m_).head(ns_) = cost.transpose();
    for (long r = 0; r < m_; ++r) {
      if (!row_active_[static_cast<size_t>(r)]) continue;
      const long bc = basis_[static_cast<size_t>(r)];
      if (bc < ns_ && cost(bc) != 0.0) t_.row(m_) -= cost(bc) * t_.row(r);
    }
    return run();
  }

  Vector structural_solution() const {
    Vector x = Vector::Zero(ns_);
    for (long r = 0; r < m_; ++r) {
      if (!row_active_[static_cast<size_t>(r)]) continue;
      const long bc = basis_[static_cast<size_t>(r)];
      if (bc < ns_) x(bc) = t_(r, ns_ + m_);
    }
    return x;
  }

 private:
  // Bland's rule: lowest eligible entering index, lowest basis index on
  // ratio ties. Only structural columns may enter.
  bool run() {
    for (long iter = 0; iter < kMaxIters; ++iter) {
      long enter = -1;
      for (long j = 0; j < ns_; ++j)
        if (t_(m_, j) < -kEps) {
          enter = j;
          break;
        }
      if (enter < 0) return true;

      long leave = -1;
      double best_ratio = 0.0;
      for (long r = 0; r < m_; ++r) {
        if (!row_active_[static_cast<size_t>(r)]) continue;
        const double coef = t_(r, enter);
        if (coef <= kEps) continue;
        const double ratio = t_(r, ns_ + m_) / coef;
        if (leave < 0 || ratio < best_ratio - kEps ||
            (ratio < best_ratio + kEps &&
             basis_[static_cast<size_t>(r)] < basis_[static_cast<size_t>(leave)]))
          leave = r, best_ratio = ratio;
      }
      if (leave < 0) return false;  // unbounded direction
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex iteration limit exceeded");
  }

  void pivot(long r, long c) {
    t_.row(r) /= t_(r, c);
    for (long i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<size_t>(r)] = c;
  }

  // Pivot zero-valued basic artificials onto structural columns; rows that
  // admit no pivot are linearly dependent and get deactivated.
  void drive_out_artificials() {
    for (long r = 0; r < m_; ++r) {
      if (basis_[static_cast<size_t>(r)] < ns_) continue;
      long col = -1;
      for (long j = 0; j < ns_; ++j)
        if (std::abs(t_(r, j)) > kEps) {
          col = j;
          break;
        }
      if (col >= 0)
        pivot(r, col);
      else
        row_active_[static_cast<size_t>(r)] = false;
    }
  }

  long m_, ns_;
  Matrix t_;
  std::vector<bool> row_active_;
  std::vector<long> basis_;
};

}  // namespace

LPResult solve_lp(const LPProblem& lp) {
  const long nv = lp.c.size();
  if (lp.a.cols() != nv || lp.a.rows() != lp.b.size() ||
      static_cast<long>(lp.nonneg.size()) != nv)
    throw std::invalid_argument("solve_lp: dimension mismatch");
  for (long i = 0; i < lp.b.size(); ++i)
    if (!std::isfinite(lp.b(i)))
      throw std::invalid_argument("solve_lp: right-hand side must be finite");

  // Split free variables into positive and negative parts.
  long ns = 0;
  std::vector<long> pos_col(static_cast<size_t>(nv)), neg_col(static_cast<size_t>(nv), -1);
  for (long i = 0; i < nv; ++i) {
    pos_col[static_cast<size_t>(i)] = ns++;
    if (!lp.nonneg[static_cast<size_t>(i)]) neg_col[static_cast<size_t>(i)] = ns++;
  }
  Matrix a_split(lp.a.rows(), ns);
  Vector c_split = Vector::Zero(ns);
  const double sense = lp.sense == LPSense::Maximize ? -1.0 : 1.0;
  for (long i = 0; i < nv; ++i) {
    a_split.col(pos_col[static_cast<size_t>(i)]) = lp.a.col(i);
    c_split(pos_col[static_cast<size_t>(i)]) = sense * lp.c(i);
    if (neg_col[static_cast<size_t>(i)] >= 0) {
      a_split.col(neg_col[static_cast<size_t>(i)]) = -lp.a.col(i);
      c_split(neg_col[static_cast<size_t>(i)]) = -sense * lp.c(i);
    }
  }

  // Scale rows to unit max-abs for tolerance uniformity.
  Vector b_scaled = lp.b;
  for (long r = 0; r < a_split.rows(); ++r) {
    const double s = std::max(a_split.row(r).cwiseAbs().maxCoeff(), std::abs(b_scaled(r)));
    if (s > 0.0) {
      a_split.row(r) /= s;
      b_scaled(r) /= s;
    }
  }

  Tableau tab(a_split, b_scaled, ns);
  LPResult res;
  if (tab.phase1() > 1e-8) {
    res.status = LPStatus::Infeasible;
    return res;
  }
  if (!tab.phase2(c_split)) {
    res.status = LPStatus::Unbounded;
    return res;
  }

  const Vector y = tab.structural_solution();
  res.x.resize(nv);
  for (long i = 0; i < nv; ++i) {
    double v = y(pos_col[static_cast<size_t>(i)]);
    if (neg_col[static_cast<size_t>(i)] >= 0) v -= y(neg_col[static_cast<size_t>(i)]);
    res.x(i) = v;
  }
  res.status = LPStatus::Optimal;
  res.value = lp.c.dot(res.x);
  return res;
}

}  // namespace tiltcheck
