#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tiltcheck/multipliers.hpp"
#include "tiltcheck/report.hpp"
#include "tiltcheck/version.hpp"

namespace py = pybind11;
using namespace tiltcheck;

namespace {

AnalysisOptions options_from_kwargs(double tol_active, double tol_rank,
                                    double cq_radius, int cq_samples,
                                    uint64_t seed, bool oracle, double gamma,
                                    double delta) {
  AnalysisOptions opt;
  opt.tol_active = tol_active;
  opt.sampling.tol_rank = tol_rank;
  opt.sampling.radius = cq_radius;
  opt.sampling.count = cq_samples;
  opt.sampling.seed = seed;
  opt.run_oracle = oracle;
  opt.oracle.gamma = gamma;
  opt.oracle.delta = delta;
  opt.oracle.seed = seed;
  return opt;
}

// analysis records cross into python as plain dicts via the JSON layer
py::dict record_to_dict(const AnalysisRecord& rec) {
  py::module_ json = py::module_::import("json");
  return json.attr("loads")(serialize(rec));
}

std::vector<std::vector<double>> vertices_file_order(const Problem& p) {
  if (!p.point) throw std::invalid_argument("problem has no 'point' declaration");
  const ProblemDerivatives pd(p);
  const StationaryData sd = evaluate_stationary_data(pd, *p.point);
  const MultiplierPolyhedron poly = build_polyhedron(sd, -sd.obj_grad);
  if (!poly.nonempty) return {};
  std::vector<std::vector<double>> out;
  for (const auto& v : enumerate_vertices(poly)) {
    std::vector<double> row(static_cast<size_t>(v.size()));
    for (long i = 0; i < v.size(); ++i)
      row[static_cast<size_t>(p.file_index[static_cast<size_t>(i)]) - 1] = v(i);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "tilt stability analysis of nonlinear programs";
  m.attr("__version__") = kToolVersion;

  py::class_<Problem>(m, "Problem")
      .def_readonly("name", &Problem::name)
      .def_readonly("n", &Problem::n)
      .def_readonly("num_equalities", &Problem::num_eq)
      .def_readonly("num_inequalities", &Problem::num_ineq)
      .def_readonly("var_names", &Problem::var_names)
      .def_property_readonly("point",
                             [](const Problem& p) -> py::object {
                               if (!p.point) return py::none();
                               py::list out;
                               for (long i = 0; i < p.point->size(); ++i)
                                 out.append((*p.point)(i));
                               return out;
                             })
      .def("to_text", [](const Problem& p) { return to_text(p); })
      .def("__repr__", [](const Problem& p) {
        return "<Problem " + p.name + ": n=" + std::to_string(p.n) + ", " +
               std::to_string(p.num_eq) + " eq, " + std::to_string(p.num_ineq) +
               " ineq>";
      });

  m.def("parse_problem", &parse_problem, py::arg("text"), py::arg("name") = "",
        "Parse a problem description in the .nlp grammar.");
  m.def("load_problem", &load_problem, py::arg("path"),
        "Load a problem file from disk.");

  m.def(
      "analyze",
      [](const Problem& p, double tol_active, double tol_rank, double cq_radius,
         int cq_samples, uint64_t seed, bool oracle, double gamma, double delta) {
        return record_to_dict(
            analyze(p, options_from_kwargs(tol_active, tol_rank, cq_radius,
                                           cq_samples, seed, oracle, gamma,
                                           delta)));
      },
      py::arg("problem"), py::arg("tol_active") = 1e-8,
      py::arg("tol_rank") = 1e-8, py::arg("cq_radius") = 1e-2,
      py::arg("cq_samples") = 64, py::arg("seed") = 0,
      py::arg("oracle") = false, py::arg("gamma") = 0.05,
      py::arg("delta") = 1e-3,
      "Run the full pipeline and return the analysis record as a dict.");

  m.def("analyze_json",
        [](const Problem& p) { return serialize(analyze(p)); },
        py::arg("problem"),
        "Run the pipeline with defaults and return the raw JSON record.");

  m.def("enumerate_vertices", &vertices_file_order, py::arg("problem"),
        "Extreme points of the multiplier set, components in file order.");

  m.def(
      "check_gradients",
      [](const Problem& p, int n_points, uint64_t seed) {
        const ProblemDerivatives pd(p);
        const Vector center = p.point ? *p.point : Vector::Zero(p.n);
        const GradCheckResult r = check_derivatives(pd, center, n_points, 0.5,
                                                    1e-5, seed);
        return py::make_tuple(r.max_gradient_rel_err, r.max_hessian_rel_err);
      },
      py::arg("problem"), py::arg("n_points") = 20, py::arg("seed") = 0,
      "Max relative gradient/Hessian error against finite differences.");
}
