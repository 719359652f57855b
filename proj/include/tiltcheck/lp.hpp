#pragma once

#include <vector>

#include "tiltcheck/linalg.hpp"

namespace tiltcheck {

enum class LPSense { Minimize, Maximize };
enum class LPStatus { Optimal, Infeasible, Unbounded };

/// Linear program in equality form over variables that are either
/// nonnegative or free:
///   optimize c'x  s.t.  a x = b,  x_i >= 0 where nonneg[i].
struct LPProblem {
  LPSense sense = LPSense::Minimize;
  Vector c;
  Matrix a;
  Vector b;
  std::vector<bool> nonneg;  // size c.size(); false marks a free variable
};

struct LPResult {
  LPStatus status = LPStatus::Infeasible;
  double value = 0.0;
  Vector x;
};

/// Two-phase primal simplex with Bland's rule (terminating on any input).
/// Throws std::invalid_argument on dimension mismatch.
LPResult solve_lp(const LPProblem& lp);

}  // namespace tiltcheck
