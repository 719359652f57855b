#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tiltcheck/report.hpp"
#include "tiltcheck/version.hpp"

namespace {

using namespace tiltcheck;

struct CliOptions {
  std::string input;
  std::string format = "text";
  std::string output;  // empty = stdout
  AnalysisOptions analysis;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("input", opt.input, "problem file (.nlp)")->required();
  cmd->add_option("--radius", opt.analysis.sampling.radius,
                  "CQ sampling radius around the candidate point");
  cmd->add_option("--samples", opt.analysis.sampling.count,
                  "number of CQ sample points");
  cmd->add_option("--tol-rank", opt.analysis.sampling.tol_rank,
                  "relative rank tolerance");
  cmd->add_option("--tol-active", opt.analysis.tol_active,
                  "activity tolerance for inequality constraints");
  cmd->add_option("--gamma", opt.analysis.oracle.gamma,
                  "oracle localization radius");
  cmd->add_option("--delta", opt.analysis.oracle.delta,
                  "oracle maximum tilt norm");
  cmd->add_option("--max-active", opt.analysis.max_active,
                  "guard on the number of active inequalities in CQ subset "
                  "enumeration");
  cmd->add_option("--max-vertices", opt.analysis.max_vertex_constraints,
                  "guard on the constraint count for vertex enumeration");
  cmd->add_option("--format", opt.format, "output format")
      ->check(CLI::IsMember({"text", "structured"}));
  cmd->add_option("--output,-o", opt.output,
                  "write the report to a file instead of standard output");
  auto* seed = cmd->add_option_function<uint64_t>(
      "--seed",
      [&opt](uint64_t s) {
        opt.analysis.sampling.seed = s;
        opt.analysis.oracle.seed = s;
      },
      "seed for CQ sampling and the oracle");
  seed->default_str("0");
}

void emit(const CliOptions& opt, const std::string& text) {
  if (opt.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opt.output);
  if (!out) throw std::runtime_error("cannot write to " + opt.output);
  out << text;
}

std::string config_echo(const AnalysisOptions& a) {
  std::string s = "config:";
  auto kv = [&s](const std::string& k, const std::string& v) { s += " " + k + "=" + v; };
  kv("tol_feas", format_double(a.tol_feas));
  kv("tol_active", format_double(a.tol_active));
  kv("tol_rank", format_double(a.sampling.tol_rank));
  kv("tol_pos", format_double(a.tol_pos));
  kv("cq_radius", format_double(a.sampling.radius));
  kv("cq_samples", std::to_string(a.sampling.count));
  kv("seed", std::to_string(a.sampling.seed));
  kv("max_active", std::to_string(a.max_active));
  kv("max_vertices", std::to_string(a.max_vertex_constraints));
  kv("multiplier_gamma", format_double(a.multiplier_gamma));
  if (a.run_oracle) {
    kv("oracle_gamma", format_double(a.oracle.gamma));
    kv("oracle_delta", format_double(a.oracle.delta));
    kv("oracle_tilts", std::to_string(a.oracle.n_tilts));
    kv("oracle_starts", std::to_string(a.oracle.n_starts));
  }
  return s + "\n";
}

int exit_code_for(const AnalysisRecord& rec) {
  if (!rec.tilt) return 2;  // no verdict (not stationary)
  if (rec.tilt->verdict == "inconclusive") return 2;
  return 0;
}

int run_analyze(const CliOptions& opt) {
  const Problem p = load_problem(opt.input);
  const AnalysisRecord rec = analyze(p, opt.analysis);
  if (opt.format == "structured")
    emit(opt, serialize(rec));
  else
    emit(opt, summarize(rec) + config_echo(opt.analysis));
  return exit_code_for(rec);
}

int run_cq(const CliOptions& opt) {
  const Problem p = load_problem(opt.input);
  AnalysisOptions a = opt.analysis;
  a.run_oracle = false;
  const AnalysisRecord rec = analyze(p, a);
  if (opt.format == "structured") {
    emit(opt, serialize(rec));
  } else {
    std::string text = summarize(rec);
    // keep only the CQ block plus the heading lines
    emit(opt, text.substr(0, text.find("multipliers:")) + config_echo(a));
  }
  return 0;
}

int run_vertices(const CliOptions& opt) {
  const Problem p = load_problem(opt.input);
  if (!p.point) throw std::invalid_argument("problem has no 'point' declaration");
  const ProblemDerivatives pd(p);
  const StationaryData sd =
      evaluate_stationary_data(pd, *p.point, opt.analysis.tol_active,
                               opt.analysis.tol_feas);
  const MultiplierPolyhedron poly = build_polyhedron(sd, -sd.obj_grad);
  if (!poly.nonempty) {
    emit(opt, "multiplier set is empty (point is not stationary)\n");
    return 2;
  }
  const auto vertices = enumerate_vertices(poly, opt.analysis.max_vertex_constraints,
                                           opt.analysis.sampling.tol_rank);
  std::string out = std::to_string(vertices.size()) + " extreme multipliers\n";
  for (const auto& v : vertices) {
    Vector file_order(v.size());
    for (long i = 0; i < v.size(); ++i)
      file_order(p.file_index[static_cast<size_t>(i)] - 1) = v(i);
    out += "(";
    for (long i = 0; i < file_order.size(); ++i) {
      if (i) out += ", ";
      out += format_double(file_order(i));
    }
    out += ")\n";
  }
  emit(opt, out);
  return 0;
}

int run_oracle(const CliOptions& opt) {
  const Problem p = load_problem(opt.input);
  AnalysisOptions a = opt.analysis;
  a.run_oracle = true;
  const AnalysisRecord rec = analyze(p, a);
  if (opt.format == "structured") {
    emit(opt, serialize(rec));
  } else {
    emit(opt, summarize(rec) + config_echo(a));
  }
  return exit_code_for(rec);
}

int run_check_grad(const CliOptions& opt) {
  const Problem p = load_problem(opt.input);
  const ProblemDerivatives pd(p);
  const Vector center = p.point ? *p.point : Vector::Zero(p.n);
  const GradCheckResult res =
      check_derivatives(pd, center, 20, 0.5, 1e-5, opt.analysis.sampling.seed);
  std::string out =
      "max relative gradient error: " + format_double(res.max_gradient_rel_err) +
      "\nmax relative Hessian error:  " + format_double(res.max_hessian_rel_err) +
      "\n";
  const bool ok = res.max_gradient_rel_err < 1e-6 && res.max_hessian_rel_err < 1e-6;
  out += ok ? "derivatives agree with finite differences\n"
            : "derivative mismatch beyond tolerance\n";
  emit(opt, out);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolName) +
               " - tilt stability analysis of nonlinear programs"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CliOptions opt;
  bool with_oracle = false;

  auto* analyze_cmd = app.add_subcommand(
      "analyze", "run the full pipeline: stationarity, CQs, multipliers, tilt");
  add_common_flags(analyze_cmd, opt);
  analyze_cmd->add_flag("--oracle", with_oracle,
                        "also run the tilt-perturbation oracle");

  auto* cq_cmd = app.add_subcommand("cq", "constraint-qualification report only");
  add_common_flags(cq_cmd, opt);

  auto* vert_cmd =
      app.add_subcommand("vertices", "enumerate the extreme Lagrange multipliers");
  add_common_flags(vert_cmd, opt);

  auto* oracle_cmd = app.add_subcommand(
      "oracle", "brute-force tilt-perturbation study of the argmin map");
  add_common_flags(oracle_cmd, opt);

  auto* grad_cmd = app.add_subcommand(
      "check-grad", "compare symbolic derivatives against finite differences");
  add_common_flags(grad_cmd, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // flag errors exit 1; --help/--version exit 0
  }
  opt.analysis.run_oracle = with_oracle;

  try {
    if (analyze_cmd->parsed()) return run_analyze(opt);
    if (cq_cmd->parsed()) return run_cq(opt);
    if (vert_cmd->parsed()) return run_vertices(opt);
    if (oracle_cmd->parsed()) return run_oracle(opt);
    if (grad_cmd->parsed()) return run_check_grad(opt);
  } catch (const tiltcheck::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
