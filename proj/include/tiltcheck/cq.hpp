#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tiltcheck/multipliers.hpp"
#include "tiltcheck/problem.hpp"

namespace tiltcheck {

struct SamplingParams {
  double radius = 1e-2;
  int count = 64;
  uint64_t seed = 0;
  double tol_rank = 1e-8;
};

enum class RankVerdict { HoldsSampled, FailsWithWitness };

struct RankWitness {
  std::vector<int> family;  // internal constraint indices
  Vector point_a, point_b;
  int rank_a = 0, rank_b = 0;
};

struct RankConstancyResult {
  RankVerdict verdict = RankVerdict::HoldsSampled;
  std::optional<RankWitness> witness;
};

struct MfcqResult {
  bool holds = false;
  Vector direction;  // certificate when holds
  double margin = 0.0;
};

/// Verdicts for the constraint-qualification lattice at the base point.
/// Sampled verdicts are evidence over a finite point set, not proofs;
/// exact LICQ (when it holds) upgrades the weaker conditions it implies.
struct CQReport {
  bool licq = false;
  MfcqResult mfcq;
  bool mfcq_upgraded_by_licq = false;
  RankConstancyResult crcq, rcrcq;
  bool crcq_upgraded_by_licq = false;
  bool mscq_implied = false;  // RCRCQ (or LICQ) gives MSCQ near the point
  SamplingParams sampling;
};

bool check_licq(const StationaryData& sd, double tol_rank = 1e-8);

/// LP certificate: maximal strict-decrease margin over the active
/// inequality gradients within the unit box, subject to orthogonality to
/// the equality gradients (which must be linearly independent).
MfcqResult check_mfcq(const StationaryData& sd, double tol_pos = 1e-9,
                      double tol_rank = 1e-8);

/// Compares the rank of each gradient family at the base point against its
/// rank at `count` sample points in the closed ball of the given radius
/// (alternating scrambled Halton and seeded uniform draws, so a larger
/// count extends the sample sequence rather than replacing it).
RankConstancyResult check_rank_constancy(const ProblemDerivatives& pd,
                                         const StationaryData& sd,
                                         const std::vector<std::vector<int>>& families,
                                         const SamplingParams& sp);

RankConstancyResult check_crcq(const ProblemDerivatives& pd, const StationaryData& sd,
                               const SamplingParams& sp, int max_active = 16);
RankConstancyResult check_rcrcq(const ProblemDerivatives& pd, const StationaryData& sd,
                                const SamplingParams& sp, int max_active = 16);

/// 2-regularity of (q_i)_{i in indices} at the base point in direction v:
/// surjectivity of u -> grad g u + [hess g v, w] over the kernel of grad g.
bool check_2regular(const StationaryData& sd, const std::vector<int>& indices,
                    const Vector& v, double tol_rank = 1e-8);

CQReport run_cq_checks(const ProblemDerivatives& pd, const StationaryData& sd,
                       const SamplingParams& sp, int max_active = 16,
                       double tol_pos = 1e-9);

}  // namespace tiltcheck
