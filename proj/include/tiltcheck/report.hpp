#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tiltcheck/cq.hpp"
#include "tiltcheck/multipliers.hpp"
#include "tiltcheck/oracle.hpp"
#include "tiltcheck/problem.hpp"
#include "tiltcheck/tilt.hpp"

namespace tiltcheck {

struct AnalysisOptions {
  double tol_feas = 1e-8;
  double tol_active = 1e-8;
  double tol_pos = 1e-9;
  SamplingParams sampling;          // CQ neighborhood sampling + tol_rank
  int max_active = 16;              // CQ subset guard
  int max_vertex_constraints = 12;  // vertex enumeration guard
  double multiplier_gamma = 1e3;    // norm bound for bounded_multiplier
  bool run_oracle = false;
  OracleConfig oracle;
};

// Record sections use 1-based file indices for constraints, and multiplier
// vectors are permuted into the file order of the source problem.

struct WitnessSection {
  std::vector<int> family;
  Vector point_a, point_b;
  int rank_a = 0, rank_b = 0;
};

struct CQSection {
  bool licq = false;
  bool mfcq = false;
  Vector mfcq_direction;
  double mfcq_margin = 0.0;
  bool mfcq_upgraded_by_licq = false;
  std::string crcq_verdict;
  std::optional<WitnessSection> crcq_witness;
  bool crcq_upgraded_by_licq = false;
  std::string rcrcq_verdict;
  std::optional<WitnessSection> rcrcq_witness;
  bool mscq_implied = false;
};

struct MultiplierSection {
  bool nonempty = false;
  std::vector<int> support_union;
  Vector lambda_tilde;
  bool vertices_enumerated = false;
  std::vector<Vector> vertices;
  bool bounded_found = false;
  std::optional<Vector> bounded_multiplier;
};

struct TiltSection {
  std::string verdict;
  double tilt_bound = 0.0;
  std::optional<double> min_eigenvalue;
  bool marginal = false;
  Matrix reduced_hessian;
  Matrix subspace_basis;
  Vector lambda_used;
  std::optional<Vector> failure_direction;
  bool multiplier_independence_verified = false;
  std::string cq_grade;
  std::string note;
};

struct OracleSampleSection {
  Vector tilt, minimizer;
  bool converged = false;
  double feas_residual = 0.0, stat_residual = 0.0, cluster_diameter = 0.0;
};

struct OracleSection {
  std::vector<OracleSampleSection> samples;
  bool single_valued = false;
  bool untilted_matches_base = false;
  bool degraded = false;
  double lipschitz_estimate = 0.0;
  std::optional<double> reference_bound;
  std::optional<bool> agreement;
};

/// Machine-readable result of the full analysis pipeline. Every verdict is
/// reproducible from the problem plus the echoed options.
struct AnalysisRecord {
  std::string tool_name;
  std::string tool_version;
  std::string problem_name;
  int n = 0, num_eq = 0, num_ineq = 0;
  Vector point;
  AnalysisOptions options;
  bool stationary = false;
  std::optional<CQSection> cq;
  std::optional<MultiplierSection> multipliers;
  std::optional<TiltSection> tilt;
  std::optional<OracleSection> oracle;
};

/// model -> cq -> multipliers -> tilt (-> oracle when requested); stops
/// after the multiplier stage when the point is not stationary.
AnalysisRecord analyze(const Problem& p, const AnalysisOptions& options = {});

std::string serialize(const AnalysisRecord& r);
AnalysisRecord parse_record(const std::string& text);

/// Human-readable multi-line summary of a record.
std::string summarize(const AnalysisRecord& r);

const char* to_string(TiltVerdict v);
const char* to_string(RankVerdict v);

}  // namespace tiltcheck
