#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tiltcheck/problem.hpp"

namespace tiltcheck {

/// Configuration of the tilt-perturbation oracle: localized problems
///   argmin { objective(x) - <v, x> : x feasible, ||x - xbar|| <= gamma }
/// solved by quadratic penalty plus projected gradient descent, multistarted.
struct OracleConfig {
  double gamma = 0.05;   // localization radius
  double delta = 1e-3;   // largest sampled tilt norm
  int n_tilts = 24;
  int n_starts = 8;
  double mu0 = 10.0;
  double mu_growth = 10.0;
  int penalty_rounds = 6;
  double tol_feas = 1e-6;
  double tol_stat = 1e-6;
  double tol_cluster = 1e-4;
  int max_iters = 2000;  // per descent round
  uint64_t seed = 0;

  void validate() const;
};

struct SolveStatus {
  bool converged = false;
  double feas_residual = 0.0;
  double stat_residual = 0.0;
  double cluster_diameter = 0.0;  // spread of the multistart minimizers
};

struct TiltSample {
  Vector tilt;
  Vector minimizer;
  SolveStatus status;
};

/// Empirical evidence about the localized argmin map, independent of the
/// second-order theory. Lipschitz ratios only use tilt pairs separated by
/// at least delta/10 to keep solver noise out of the quotient.
struct OracleReport {
  std::vector<TiltSample> samples;
  bool empirical_single_valued = false;
  bool untilted_matches_base = false;  // minimizer at v = 0 equals xbar (1e-5)
  double lipschitz_estimate = 0.0;
  bool solver_degraded = false;
  std::optional<double> reference_bound;
  std::optional<bool> agreement;  // |estimate - bound| <= 0.25 max(bound, 0.1)
};

std::pair<Vector, SolveStatus> solve_tilted(const ProblemDerivatives& pd,
                                            const Vector& xbar, const Vector& tilt,
                                            const OracleConfig& cfg);

OracleReport estimate_tilt_modulus(const ProblemDerivatives& pd, const Vector& xbar,
                                   const OracleConfig& cfg,
                                   std::optional<double> reference_bound = {});

}  // namespace tiltcheck
