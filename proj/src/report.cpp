#include "tiltcheck/report.hpp"

#include <cstdio>

#include "json.hpp"
#include "tiltcheck/version.hpp"

namespace tiltcheck {

using json = nlohmann::ordered_json;

const char* to_string(TiltVerdict v) {
  switch (v) {
    case TiltVerdict::TiltStable: return "tilt-stable";
    case TiltVerdict::NotTiltStable: return "not-tilt-stable";
    case TiltVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

const char* to_string(RankVerdict v) {
  return v == RankVerdict::HoldsSampled ? "holds-sampled" : "fails-with-witness";
}

namespace {

Vector to_file_order(const Vector& internal, const Problem& p) {
  Vector out(internal.size());
  for (long i = 0; i < internal.size(); ++i)
    out(p.file_index[static_cast<size_t>(i)] - 1) = internal(i);
  return out;
}

std::vector<int> to_file_indices(const std::vector<int>& internal, const Problem& p) {
  std::vector<int> out;
  out.reserve(internal.size());
  for (int i : internal) out.push_back(p.file_index[static_cast<size_t>(i)]);
  std::sort(out.begin(), out.end());
  return out;
}

WitnessSection make_witness(const RankWitness& w, const Problem& p) {
  WitnessSection s;
  s.family = to_file_indices(w.family, p);
  s.point_a = w.point_a;
  s.point_b = w.point_b;
  s.rank_a = w.rank_a;
  s.rank_b = w.rank_b;
  return s;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vec_parse(const json& a) {
  Vector v(static_cast<long>(a.size()));
  for (size_t i = 0; i < a.size(); ++i) v(static_cast<long>(i)) = a[i].get<double>();
  return v;
}

json mat_json(const Matrix& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix mat_parse(const json& rows) {
  const long nr = static_cast<long>(rows.size());
  const long nc = nr > 0 ? static_cast<long>(rows[0].size()) : 0;
  Matrix m(nr, nc);
  for (long r = 0; r < nr; ++r)
    for (long c = 0; c < nc; ++c) m(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
  return m;
}

json witness_json(const WitnessSection& w) {
  json j;
  j["family"] = w.family;
  j["point_a"] = vec_json(w.point_a);
  j["rank_a"] = w.rank_a;
  j["point_b"] = vec_json(w.point_b);
  j["rank_b"] = w.rank_b;
  return j;
}

WitnessSection witness_parse(const json& j) {
  WitnessSection w;
  w.family = j.at("family").get<std::vector<int>>();
  w.point_a = vec_parse(j.at("point_a"));
  w.rank_a = j.at("rank_a").get<int>();
  w.point_b = vec_parse(j.at("point_b"));
  w.rank_b = j.at("rank_b").get<int>();
  return w;
}

json options_json(const AnalysisOptions& o) {
  json j;
  j["tol_feas"] = o.tol_feas;
  j["tol_active"] = o.tol_active;
  j["tol_pos"] = o.tol_pos;
  j["tol_rank"] = o.sampling.tol_rank;
  j["cq_radius"] = o.sampling.radius;
  j["cq_samples"] = o.sampling.count;
  j["cq_seed"] = o.sampling.seed;
  j["max_active"] = o.max_active;
  j["max_vertex_constraints"] = o.max_vertex_constraints;
  j["multiplier_gamma"] = o.multiplier_gamma;
  j["run_oracle"] = o.run_oracle;
  json oj;
  oj["gamma"] = o.oracle.gamma;
  oj["delta"] = o.oracle.delta;
  oj["n_tilts"] = o.oracle.n_tilts;
  oj["n_starts"] = o.oracle.n_starts;
  oj["mu0"] = o.oracle.mu0;
  oj["mu_growth"] = o.oracle.mu_growth;
  oj["penalty_rounds"] = o.oracle.penalty_rounds;
  oj["tol_feas"] = o.oracle.tol_feas;
  oj["tol_stat"] = o.oracle.tol_stat;
  oj["tol_cluster"] = o.oracle.tol_cluster;
  oj["max_iters"] = o.oracle.max_iters;
  oj["seed"] = o.oracle.seed;
  j["oracle"] = std::move(oj);
  return j;
}

AnalysisOptions options_parse(const json& j) {
  AnalysisOptions o;
  o.tol_feas = j.at("tol_feas").get<double>();
  o.tol_active = j.at("tol_active").get<double>();
  o.tol_pos = j.at("tol_pos").get<double>();
  o.sampling.tol_rank = j.at("tol_rank").get<double>();
  o.sampling.radius = j.at("cq_radius").get<double>();
  o.sampling.count = j.at("cq_samples").get<int>();
  o.sampling.seed = j.at("cq_seed").get<uint64_t>();
  o.max_active = j.at("max_active").get<int>();
  o.max_vertex_constraints = j.at("max_vertex_constraints").get<int>();
  o.multiplier_gamma = j.at("multiplier_gamma").get<double>();
  o.run_oracle = j.at("run_oracle").get<bool>();
  const json& oj = j.at("oracle");
  o.oracle.gamma = oj.at("gamma").get<double>();
  o.oracle.delta = oj.at("delta").get<double>();
  o.oracle.n_tilts = oj.at("n_tilts").get<int>();
  o.oracle.n_starts = oj.at("n_starts").get<int>();
  o.oracle.mu0 = oj.at("mu0").get<double>();
  o.oracle.mu_growth = oj.at("mu_growth").get<double>();
  o.oracle.penalty_rounds = oj.at("penalty_rounds").get<int>();
  o.oracle.tol_feas = oj.at("tol_feas").get<double>();
  o.oracle.tol_stat = oj.at("tol_stat").get<double>();
  o.oracle.tol_cluster = oj.at("tol_cluster").get<double>();
  o.oracle.max_iters = oj.at("max_iters").get<int>();
  o.oracle.seed = oj.at("seed").get<uint64_t>();
  return o;
}

}  // namespace

AnalysisRecord analyze(const Problem& p, const AnalysisOptions& options) {
  if (!p.point)
    throw std::invalid_argument("problem has no 'point' declaration");

  AnalysisRecord rec;
  rec.tool_name = kToolName;
  rec.tool_version = kToolVersion;
  rec.problem_name = p.name;
  rec.n = p.n;
  rec.num_eq = p.num_eq;
  rec.num_ineq = p.num_ineq;
  rec.point = *p.point;
  rec.options = options;

  const ProblemDerivatives pd(p);
  const StationaryData sd =
      evaluate_stationary_data(pd, *p.point, options.tol_active, options.tol_feas);

  const CQReport cqr = run_cq_checks(pd, sd, options.sampling, options.max_active,
                                     options.tol_pos);
  CQSection cs;
  cs.licq = cqr.licq;
  cs.mfcq = cqr.mfcq.holds;
  cs.mfcq_direction = cqr.mfcq.direction;
  cs.mfcq_margin = cqr.mfcq.margin;
  cs.mfcq_upgraded_by_licq = cqr.mfcq_upgraded_by_licq;
  cs.crcq_verdict = to_string(cqr.crcq.verdict);
  if (cqr.crcq.witness) cs.crcq_witness = make_witness(*cqr.crcq.witness, p);
  cs.crcq_upgraded_by_licq = cqr.crcq_upgraded_by_licq;
  cs.rcrcq_verdict = to_string(cqr.rcrcq.verdict);
  if (cqr.rcrcq.witness) cs.rcrcq_witness = make_witness(*cqr.rcrcq.witness, p);
  cs.mscq_implied = cqr.mscq_implied;
  rec.cq = std::move(cs);

  const MultiplierPolyhedron poly = build_polyhedron(sd, -sd.obj_grad);
  rec.stationary = poly.nonempty;
  MultiplierSection ms;
  ms.nonempty = poly.nonempty;
  if (poly.nonempty) {
    const SupportUnion su = support_union(poly, options.tol_pos);
    ms.support_union = to_file_indices(su.indices, p);
    ms.lambda_tilde = to_file_order(su.lambda_tilde, p);
    if (poly.num_constraints() <= options.max_vertex_constraints) {
      ms.vertices_enumerated = true;
      for (const auto& v :
           enumerate_vertices(poly, options.max_vertex_constraints,
                              options.sampling.tol_rank))
        ms.vertices.push_back(to_file_order(v, p));
    }
    if (auto bm = bounded_multiplier(poly, options.multiplier_gamma)) {
      ms.bounded_found = true;
      ms.bounded_multiplier = to_file_order(*bm, p);
    }
  }
  rec.multipliers = std::move(ms);

  if (poly.nonempty) {
    const TiltReport tr =
        tilt_verdict(sd, poly, cqr, options.tol_pos, options.sampling.tol_rank,
                     options.max_vertex_constraints);
    TiltSection ts;
    ts.verdict = to_string(tr.verdict);
    ts.tilt_bound = tr.tilt_bound;
    ts.min_eigenvalue = tr.min_eigenvalue;
    ts.marginal = tr.marginal;
    ts.reduced_hessian = tr.reduced_hessian;
    ts.subspace_basis = tr.subspace_basis;
    ts.lambda_used = to_file_order(tr.lambda_used, p);
    if (tr.failure_direction) ts.failure_direction = *tr.failure_direction;
    ts.multiplier_independence_verified = tr.multiplier_independence_verified;
    ts.cq_grade = to_string(tr.cq_grade);
    ts.note = tr.note;
    rec.tilt = std::move(ts);
  }

  if (options.run_oracle) {
    std::optional<double> ref;
    if (rec.tilt && rec.tilt->verdict == std::string("tilt-stable"))
      ref = rec.tilt->tilt_bound;
    const OracleReport orep =
        estimate_tilt_modulus(pd, *p.point, options.oracle, ref);
    OracleSection os;
    for (const auto& s : orep.samples) {
      OracleSampleSection ss;
      ss.tilt = s.tilt;
      ss.minimizer = s.minimizer;
      ss.converged = s.status.converged;
      ss.feas_residual = s.status.feas_residual;
      ss.stat_residual = s.status.stat_residual;
      ss.cluster_diameter = s.status.cluster_diameter;
      os.samples.push_back(std::move(ss));
    }
    os.single_valued = orep.empirical_single_valued;
    os.untilted_matches_base = orep.untilted_matches_base;
    os.degraded = orep.solver_degraded;
    os.lipschitz_estimate = orep.lipschitz_estimate;
    os.reference_bound = orep.reference_bound;
    os.agreement = orep.agreement;
    rec.oracle = std::move(os);
  }
  return rec;
}

std::string serialize(const AnalysisRecord& r) {
  json j;
  j["tool"] = {{"name", r.tool_name}, {"version", r.tool_version}};
  j["problem"] = {{"name", r.problem_name},
                  {"n", r.n},
                  {"equalities", r.num_eq},
                  {"inequalities", r.num_ineq}};
  j["point"] = vec_json(r.point);
  j["options"] = options_json(r.options);
  j["stationary"] = r.stationary;

  if (r.cq) {
    const CQSection& c = *r.cq;
    json cj;
    cj["licq"] = c.licq;
    cj["mfcq"] = {{"holds", c.mfcq},
                  {"direction", vec_json(c.mfcq_direction)},
                  {"margin", c.mfcq_margin},
                  {"upgraded_by_licq", c.mfcq_upgraded_by_licq}};
    json crcq;
    crcq["verdict"] = c.crcq_verdict;
    if (c.crcq_witness) crcq["witness"] = witness_json(*c.crcq_witness);
    crcq["upgraded_by_licq"] = c.crcq_upgraded_by_licq;
    cj["crcq"] = std::move(crcq);
    json rcrcq;
    rcrcq["verdict"] = c.rcrcq_verdict;
    if (c.rcrcq_witness) rcrcq["witness"] = witness_json(*c.rcrcq_witness);
    cj["rcrcq"] = std::move(rcrcq);
    cj["mscq_implied"] = c.mscq_implied;
    j["cq"] = std::move(cj);
  }

  if (r.multipliers) {
    const MultiplierSection& m = *r.multipliers;
    json mj;
    mj["nonempty"] = m.nonempty;
    if (m.nonempty) {
      mj["support_union"] = m.support_union;
      mj["lambda_tilde"] = vec_json(m.lambda_tilde);
      mj["vertices_enumerated"] = m.vertices_enumerated;
      if (m.vertices_enumerated) {
        mj["vertex_count"] = m.vertices.size();
        json vs = json::array();
        for (const auto& v : m.vertices) vs.push_back(vec_json(v));
        mj["vertices"] = std::move(vs);
      }
      mj["bounded_multiplier_found"] = m.bounded_found;
      if (m.bounded_multiplier)
        mj["bounded_multiplier"] = vec_json(*m.bounded_multiplier);
    }
    j["multipliers"] = std::move(mj);
  }

  if (r.tilt) {
    const TiltSection& t = *r.tilt;
    json tj;
    tj["verdict"] = t.verdict;
    tj["tilt_bound"] = t.tilt_bound;
    if (t.min_eigenvalue) tj["min_eigenvalue"] = *t.min_eigenvalue;
    tj["marginal"] = t.marginal;
    tj["reduced_hessian"] = mat_json(t.reduced_hessian);
    tj["subspace_basis"] = mat_json(t.subspace_basis);
    tj["lambda_used"] = vec_json(t.lambda_used);
    if (t.failure_direction) tj["failure_direction"] = vec_json(*t.failure_direction);
    tj["multiplier_independence_verified"] = t.multiplier_independence_verified;
    tj["cq_grade"] = t.cq_grade;
    if (!t.note.empty()) tj["note"] = t.note;
    j["tilt"] = std::move(tj);
  }

  if (r.oracle) {
    const OracleSection& o = *r.oracle;
    json oj;
    oj["empirical"] = true;
    oj["lipschitz_estimate"] = o.lipschitz_estimate;
    oj["single_valued"] = o.single_valued;
    oj["untilted_matches_base"] = o.untilted_matches_base;
    oj["degraded"] = o.degraded;
    if (o.reference_bound) oj["reference_bound"] = *o.reference_bound;
    if (o.agreement) oj["agreement"] = *o.agreement;
    json samples = json::array();
    for (const auto& s : o.samples) {
      json sj;
      sj["tilt"] = vec_json(s.tilt);
      sj["minimizer"] = vec_json(s.minimizer);
      sj["converged"] = s.converged;
      sj["feas_residual"] = s.feas_residual;
      sj["stat_residual"] = s.stat_residual;
      sj["cluster_diameter"] = s.cluster_diameter;
      samples.push_back(std::move(sj));
    }
    oj["samples"] = std::move(samples);
    j["oracle"] = std::move(oj);
  }

  return j.dump(2) + "\n";
}

AnalysisRecord parse_record(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("malformed record: ") + e.what());
  }

  AnalysisRecord r;
  r.tool_name = j.at("tool").at("name").get<std::string>();
  r.tool_version = j.at("tool").at("version").get<std::string>();
  r.problem_name = j.at("problem").at("name").get<std::string>();
  r.n = j.at("problem").at("n").get<int>();
  r.num_eq = j.at("problem").at("equalities").get<int>();
  r.num_ineq = j.at("problem").at("inequalities").get<int>();
  r.point = vec_parse(j.at("point"));
  r.options = options_parse(j.at("options"));
  r.stationary = j.at("stationary").get<bool>();

  if (j.contains("cq")) {
    const json& cj = j.at("cq");
    CQSection c;
    c.licq = cj.at("licq").get<bool>();
    c.mfcq = cj.at("mfcq").at("holds").get<bool>();
    c.mfcq_direction = vec_parse(cj.at("mfcq").at("direction"));
    c.mfcq_margin = cj.at("mfcq").at("margin").get<double>();
    c.mfcq_upgraded_by_licq = cj.at("mfcq").at("upgraded_by_licq").get<bool>();
    c.crcq_verdict = cj.at("crcq").at("verdict").get<std::string>();
    if (cj.at("crcq").contains("witness"))
      c.crcq_witness = witness_parse(cj.at("crcq").at("witness"));
    c.crcq_upgraded_by_licq = cj.at("crcq").at("upgraded_by_licq").get<bool>();
    c.rcrcq_verdict = cj.at("rcrcq").at("verdict").get<std::string>();
    if (cj.at("rcrcq").contains("witness"))
      c.rcrcq_witness = witness_parse(cj.at("rcrcq").at("witness"));
    c.mscq_implied = cj.at("mscq_implied").get<bool>();
    r.cq = std::move(c);
  }

  if (j.contains("multipliers")) {
    const json& mj = j.at("multipliers");
    MultiplierSection m;
    m.nonempty = mj.at("nonempty").get<bool>();
    if (m.nonempty) {
      m.support_union = mj.at("support_union").get<std::vector<int>>();
      m.lambda_tilde = vec_parse(mj.at("lambda_tilde"));
      m.vertices_enumerated = mj.at("vertices_enumerated").get<bool>();
      if (m.vertices_enumerated)
        for (const auto& v : mj.at("vertices")) m.vertices.push_back(vec_parse(v));
      m.bounded_found = mj.at("bounded_multiplier_found").get<bool>();
      if (mj.contains("bounded_multiplier"))
        m.bounded_multiplier = vec_parse(mj.at("bounded_multiplier"));
    }
    r.multipliers = std::move(m);
  }

  if (j.contains("tilt")) {
    const json& tj = j.at("tilt");
    TiltSection t;
    t.verdict = tj.at("verdict").get<std::string>();
    t.tilt_bound = tj.at("tilt_bound").get<double>();
    if (tj.contains("min_eigenvalue"))
      t.min_eigenvalue = tj.at("min_eigenvalue").get<double>();
    t.marginal = tj.at("marginal").get<bool>();
    t.reduced_hessian = mat_parse(tj.at("reduced_hessian"));
    t.subspace_basis = mat_parse(tj.at("subspace_basis"));
    t.lambda_used = vec_parse(tj.at("lambda_used"));
    if (tj.contains("failure_direction"))
      t.failure_direction = vec_parse(tj.at("failure_direction"));
    t.multiplier_independence_verified =
        tj.at("multiplier_independence_verified").get<bool>();
    t.cq_grade = tj.at("cq_grade").get<std::string>();
    if (tj.contains("note")) t.note = tj.at("note").get<std::string>();
    r.tilt = std::move(t);
  }

  if (j.contains("oracle")) {
    const json& oj = j.at("oracle");
    OracleSection o;
    o.lipschitz_estimate = oj.at("lipschitz_estimate").get<double>();
    o.single_valued = oj.at("single_valued").get<bool>();
    o.untilted_matches_base = oj.at("untilted_matches_base").get<bool>();
    o.degraded = oj.at("degraded").get<bool>();
    if (oj.contains("reference_bound"))
      o.reference_bound = oj.at("reference_bound").get<double>();
    if (oj.contains("agreement")) o.agreement = oj.at("agreement").get<bool>();
    for (const auto& sj : oj.at("samples")) {
      OracleSampleSection s;
      s.tilt = vec_parse(sj.at("tilt"));
      s.minimizer = vec_parse(sj.at("minimizer"));
      s.converged = sj.at("converged").get<bool>();
      s.feas_residual = sj.at("feas_residual").get<double>();
      s.stat_residual = sj.at("stat_residual").get<double>();
      s.cluster_diameter = sj.at("cluster_diameter").get<double>();
      o.samples.push_back(std::move(s));
    }
    r.oracle = std::move(o);
  }
  return r;
}

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string index_set(const std::vector<int>& s) {
  std::string out = "{";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "}";
}

std::string vec_brief(const Vector& v) {
  std::string out = "(";
  for (long i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt("%g", v(i));
  }
  return out + ")";
}

}  // namespace

std::string summarize(const AnalysisRecord& r) {
  std::string out;
  out += r.tool_name + " " + r.tool_version + "\n";
  out += "problem " + r.problem_name + ": n=" + std::to_string(r.n) +
         ", equalities=" + std::to_string(r.num_eq) +
         ", inequalities=" + std::to_string(r.num_ineq) + "\n";
  out += "point " + vec_brief(r.point) + ": feasible, " +
         (r.stationary ? "stationary" : "not stationary") + "\n";

  if (r.cq) {
    const CQSection& c = *r.cq;
    out += "constraint qualifications:\n";
    out += std::string("  LICQ:  ") + (c.licq ? "yes" : "no") + "\n";
    out += std::string("  MFCQ:  ") + (c.mfcq ? "yes" : "no");
    if (c.mfcq) out += "  (certificate direction " + vec_brief(c.mfcq_direction) +
                       ", margin " + fmt("%g", c.mfcq_margin) + ")";
    if (c.mfcq_upgraded_by_licq) out += "  [implied by LICQ]";
    out += "\n";
    out += "  CRCQ:  " + c.crcq_verdict;
    if (c.crcq_witness)
      out += "  family " + index_set(c.crcq_witness->family) + ": rank " +
             std::to_string(c.crcq_witness->rank_a) + " at the point vs rank " +
             std::to_string(c.crcq_witness->rank_b) + " at a sampled point";
    if (c.crcq_upgraded_by_licq) out += "  [implied by LICQ]";
    out += "\n";
    out += "  RCRCQ: " + c.rcrcq_verdict;
    if (c.rcrcq_witness)
      out += "  family " + index_set(c.rcrcq_witness->family);
    out += "\n";
    out += std::string("  MSCQ:  ") +
           (c.mscq_implied ? "implied by RCRCQ near the point" : "not established") +
           "\n";
  }

  if (r.multipliers && r.multipliers->nonempty) {
    const MultiplierSection& m = *r.multipliers;
    out += "multipliers: nonempty; I+ = " + index_set(m.support_union);
    if (m.vertices_enumerated)
      out += "; " + std::to_string(m.vertices.size()) + " extreme points";
    out += "\n";
  } else if (r.multipliers) {
    out += "multipliers: empty (point is not stationary)\n";
  }

  if (r.tilt) {
    const TiltSection& t = *r.tilt;
    if (t.verdict == "tilt-stable") {
      out += "tilt analysis: tilt-stable, bound " + fmt("%.6f", t.tilt_bound);
      if (t.min_eigenvalue)
        out += "  (min reduced-Hessian eigenvalue " + fmt("%g", *t.min_eigenvalue) + ")";
    } else if (t.verdict == "not-tilt-stable") {
      out += "tilt analysis: not tilt-stable";
      if (t.failure_direction)
        out += ", failure direction " + vec_brief(*t.failure_direction);
      if (t.marginal) out += "  [marginal: min eigenvalue within tolerance of 0]";
    } else {
      out += "tilt analysis: inconclusive";
      if (!t.note.empty()) out += " (" + t.note + ")";
    }
    out += "\n";
  }

  if (r.oracle) {
    const OracleSection& o = *r.oracle;
    out += "oracle (empirical): Lipschitz estimate " + fmt("%g", o.lipschitz_estimate) +
           ", single-valued " + (o.single_valued ? "yes" : "no") +
           ", untilted minimizer matches point " +
           (o.untilted_matches_base ? "yes" : "no");
    if (o.agreement)
      out += std::string(", agreement with pointbased bound ") +
             (*o.agreement ? "yes" : "no");
    if (o.degraded) out += "  [degraded: some solves did not converge]";
    out += "\n";
  }
  return out;
}

}  // namespace tiltcheck
