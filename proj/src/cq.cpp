#include "tiltcheck/cq.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tiltcheck/linalg.hpp"
#include "tiltcheck/lp.hpp"

namespace tiltcheck {

namespace {

std::vector<int> first_primes(int count) {
  std::vector<int> primes;
  for (int c = 2; static_cast<int>(primes.size()) < count; ++c) {
    bool prime = true;
    for (int p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double halton(long index, int base) {
  double f = 1.0, r = 0.0;
  for (long i = index; i > 0; i /= base) {
    f /= base;
    r += f * static_cast<double>(i % base);
  }
  return r;
}

// Deterministic sample sequence in the closed ball around `center`,
// alternating randomly-shifted Halton points with uniform draws. Taking a
// longer prefix never changes the earlier points, so enlarging `count`
// only adds evidence.
std::vector<Vector> sample_ball(const Vector& center, double radius, int count,
                                uint64_t seed) {
  const int n = static_cast<int>(center.size());
  const auto bases = first_primes(n);
  std::mt19937_64 shift_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector shift(n);
  for (int j = 0; j < n; ++j) shift(j) = unit(shift_rng);
  std::mt19937_64 draw_rng(seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<Vector> samples;
  samples.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vector u(n);
    if (k % 2 == 0) {
      const long idx = k / 2 + 1;
      for (int j = 0; j < n; ++j) {
        double h = halton(idx, bases[static_cast<size_t>(j)]) + shift(j);
        u(j) = h - std::floor(h);
      }
    } else {
      for (int j = 0; j < n; ++j) u(j) = unit(draw_rng);
    }
    Vector y = 2.0 * u - Vector::Ones(n);
    const double norm = y.norm();
    if (norm > 1.0) y /= norm;
    samples.push_back(center + radius * y);
  }
  return samples;
}

int normalized_rank(Matrix rows, double tol_rank) {
  for (long r = 0; r < rows.rows(); ++r) {
    const double norm = rows.row(r).norm();
    if (norm > 0.0) rows.row(r) /= norm;
  }
  return rank(rows, tol_rank);
}

// Subsets of `universe` ordered by size then lexicographically.
std::vector<std::vector<int>> subsets_by_size(const std::vector<int>& universe) {
  const int n = static_cast<int>(universe.size());
  std::vector<std::vector<int>> out;
  for (int s = 1; s <= n; ++s) {
    std::vector<int> pick(static_cast<size_t>(s));
    for (int i = 0; i < s; ++i) pick[static_cast<size_t>(i)] = i;
    while (true) {
      std::vector<int> subset(static_cast<size_t>(s));
      for (int i = 0; i < s; ++i) subset[static_cast<size_t>(i)] = universe[static_cast<size_t>(pick[static_cast<size_t>(i)])];
      out.push_back(std::move(subset));
      int i = s - 1;
      while (i >= 0 && pick[static_cast<size_t>(i)] == n - s + i) --i;
      if (i < 0) break;
      ++pick[static_cast<size_t>(i)];
      for (int j = i + 1; j < s; ++j) pick[static_cast<size_t>(j)] = pick[static_cast<size_t>(j - 1)] + 1;
    }
  }
  return out;
}

}  // namespace

bool check_licq(const StationaryData& sd, double tol_rank) {
  const auto active = sd.active_set();
  if (active.empty()) return true;
  Matrix rows(static_cast<long>(active.size()), sd.n());
  for (size_t r = 0; r < active.size(); ++r)
    rows.row(static_cast<long>(r)) = sd.con_grads.row(active[r]);
  return rank(rows, tol_rank) == static_cast<int>(active.size());
}

MfcqResult check_mfcq(const StationaryData& sd, double tol_pos, double tol_rank) {
  MfcqResult out;
  const int n = sd.n();

  if (sd.num_eq > 0) {
    Matrix eq_rows = sd.con_grads.topRows(sd.num_eq);
    if (rank(eq_rows, tol_rank) < sd.num_eq) return out;  // holds = false
  }

  // max t  s.t. <g_i, v> = 0 (i in E), <g_i, v> + t <= 0 (i active),
  //             |v_j| <= 1, t <= 1.
  const auto& act = sd.active_ineq;
  const long na = static_cast<long>(act.size());
  const long nv = n + 1 + na + 2 * n + 1;  // v, t, ineq slacks, box slacks, cap slack
  const long m = sd.num_eq + na + 2 * n + 1;
  LPProblem lp;
  lp.sense = LPSense::Maximize;
  lp.c = Vector::Zero(nv);
  lp.c(n) = 1.0;  // t
  lp.a = Matrix::Zero(m, nv);
  lp.b = Vector::Zero(m);
  lp.nonneg.assign(static_cast<size_t>(nv), true);
  for (int j = 0; j <= n; ++j) lp.nonneg[static_cast<size_t>(j)] = false;  // v and t free

  long row = 0;
  for (int i = 0; i < sd.num_eq; ++i, ++row)
    lp.a.row(row).head(n) = sd.con_grads.row(i);
  for (long k = 0; k < na; ++k, ++row) {
    lp.a.row(row).head(n) = sd.con_grads.row(act[static_cast<size_t>(k)]);
    lp.a(row, n) = 1.0;
    lp.a(row, n + 1 + k) = 1.0;
  }
  for (int j = 0; j < n; ++j) {
    lp.a(row, j) = 1.0;
    lp.a(row, n + 1 + na + 2 * j) = 1.0;
    lp.b(row) = 1.0;
    ++row;
    lp.a(row, j) = -1.0;
    lp.a(row, n + 1 + na + 2 * j + 1) = 1.0;
    lp.b(row) = 1.0;
    ++row;
  }
  lp.a(row, n) = 1.0;
  lp.a(row, nv - 1) = 1.0;
  lp.b(row) = 1.0;

  const LPResult r = solve_lp(lp);
  if (r.status != LPStatus::Optimal)
    throw std::runtime_error("MFCQ certificate LP failed to solve");
  out.margin = r.value;
  out.direction = r.x.head(n);
  out.holds = r.value > tol_pos;
  return out;
}

RankConstancyResult check_rank_constancy(const ProblemDerivatives& pd,
                                         const StationaryData& sd,
                                         const std::vector<std::vector<int>>& families,
                                         const SamplingParams& sp) {
  if (sp.radius <= 0.0) throw std::invalid_argument("sampling radius must be positive");
  if (sp.count < 2) throw std::invalid_argument("sample count must be at least 2");
  const auto samples = sample_ball(sd.x, sp.radius, sp.count, sp.seed);

  RankConstancyResult res;
  for (const auto& family : families) {
    Matrix base_rows(static_cast<long>(family.size()), sd.n());
    for (size_t r = 0; r < family.size(); ++r)
      base_rows.row(static_cast<long>(r)) = sd.con_grads.row(family[r]);
    const int base_rank = normalized_rank(base_rows, sp.tol_rank);
    for (const auto& x : samples) {
      const int rk = normalized_rank(pd.gradient_rows(family, x), sp.tol_rank);
      if (rk != base_rank) {
        res.verdict = RankVerdict::FailsWithWitness;
        RankWitness w;
        w.family = family;
        w.point_a = sd.x;
        w.rank_a = base_rank;
        w.point_b = x;
        w.rank_b = rk;
        res.witness = std::move(w);
        return res;
      }
    }
  }
  return res;
}

RankConstancyResult check_crcq(const ProblemDerivatives& pd, const StationaryData& sd,
                               const SamplingParams& sp, int max_active) {
  if (static_cast<int>(sd.active_ineq.size()) > max_active)
    throw GuardError("CRCQ subset guard exceeded: " +
                     std::to_string(sd.active_ineq.size()) +
                     " active inequalities > " + std::to_string(max_active));
  const auto active = sd.active_set();
  if (static_cast<int>(active.size()) > 20)
    throw GuardError("CRCQ subset guard exceeded: 2^" +
                     std::to_string(active.size()) + " families");
  return check_rank_constancy(pd, sd, subsets_by_size(active), sp);
}

RankConstancyResult check_rcrcq(const ProblemDerivatives& pd, const StationaryData& sd,
                                const SamplingParams& sp, int max_active) {
  if (static_cast<int>(sd.active_ineq.size()) > max_active)
    throw GuardError("RCRCQ subset guard exceeded: " +
                     std::to_string(sd.active_ineq.size()) +
                     " active inequalities > " + std::to_string(max_active));
  std::vector<int> eq_block;
  for (int i = 0; i < sd.num_eq; ++i) eq_block.push_back(i);
  std::vector<std::vector<int>> families;
  if (!eq_block.empty()) families.push_back(eq_block);  // J = empty set
  for (auto& j_subset : subsets_by_size(sd.active_ineq)) {
    std::vector<int> family = eq_block;
    family.insert(family.end(), j_subset.begin(), j_subset.end());
    families.push_back(std::move(family));
  }
  return check_rank_constancy(pd, sd, families, sp);
}

bool check_2regular(const StationaryData& sd, const std::vector<int>& indices,
                    const Vector& v, double tol_rank) {
  const int n = sd.n();
  const long s = static_cast<long>(indices.size());
  if (s == 0) return true;
  Matrix g(s, n), hv(s, n);
  for (long r = 0; r < s; ++r) {
    const int i = indices[static_cast<size_t>(r)];
    g.row(r) = sd.con_grads.row(i);
    hv.row(r) = (sd.con_hess[static_cast<size_t>(i)] * v).transpose();
  }
  Matrix stacked = Matrix::Zero(2 * s, 2 * n);
  stacked.topLeftCorner(s, n) = g;
  stacked.topRightCorner(s, n) = hv;
  stacked.bottomRightCorner(s, n) = g;
  return rank(stacked, tol_rank) == static_cast<int>(s) + rank(g, tol_rank);
}

CQReport run_cq_checks(const ProblemDerivatives& pd, const StationaryData& sd,
                       const SamplingParams& sp, int max_active, double tol_pos) {
  CQReport rep;
  rep.sampling = sp;
  rep.licq = check_licq(sd, sp.tol_rank);
  rep.mfcq = check_mfcq(sd, tol_pos, sp.tol_rank);
  if (rep.licq && !rep.mfcq.holds) {
    // LICQ proves MFCQ; the LP margin was only numerically marginal.
    rep.mfcq.holds = true;
    rep.mfcq_upgraded_by_licq = true;
  }
  rep.crcq = check_crcq(pd, sd, sp, max_active);
  if (rep.licq && rep.crcq.verdict == RankVerdict::FailsWithWitness) {
    // LICQ proves CRCQ on some neighborhood; a rank change inside the
    // sampled radius does not contradict it.
    rep.crcq = RankConstancyResult{};
    rep.crcq_upgraded_by_licq = true;
  }
  rep.rcrcq = check_rcrcq(pd, sd, sp, max_active);
  if (rep.crcq.verdict == RankVerdict::HoldsSampled &&
      rep.rcrcq.verdict == RankVerdict::FailsWithWitness)
    rep.rcrcq = RankConstancyResult{};  // RCRCQ families are CRCQ families
  rep.mscq_implied = rep.rcrcq.verdict == RankVerdict::HoldsSampled;
  return rep;
}

}  // namespace tiltcheck
