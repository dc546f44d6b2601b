#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ocplens/commands.hpp"

namespace py = pybind11;
using namespace ocplens;

namespace {

SolverConfig overrides(std::optional<double> grad_tol, std::optional<int> max_iters) {
  SolverOverrides o;
  o.grad_tol = grad_tol;
  o.max_iters = max_iters;
  return o.apply();
}

LearningProblem make_problem(const std::vector<Matrix>& coefficients, const Matrix& initial, double margin,
                             bool per_component) {
  LearningProblem p;
  p.horizon = static_cast<int>(initial.rows()) - 1;
  p.components = static_cast<int>(initial.cols());
  p.initial = initial;
  p.margin = margin;
  p.per_component_normalization = per_component;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    p.samples.push_back({"sample-" + std::to_string(j), DirectionalCorrection(), coefficients[j]});
  }
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ocplens core bindings";

  // Translators registered later are tried first: most derived last.
  py::register_exception<Error>(m, "OcplensError", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<InterfaceError>(m, "InterfaceError", PyExc_ValueError);

  py::list names;
  for (auto id : kAllComponents) names.append(std::string(component_name(id)));
  m.attr("COMPONENTS") = py::tuple(names);

  py::class_<UnicycleModel>(m, "UnicycleModel")
      .def(py::init<double>(), py::arg("dt"))
      .def_property_readonly("dt", &UnicycleModel::dt)
      .def("step", [](const UnicycleModel& model, const Vector& x, const Vector& u) { return step(model, x, u); },
           py::arg("x"), py::arg("u"))
      .def("rollout",
           [](const UnicycleModel& model, const Vector& x0, const Matrix& inputs) {
             std::vector<Vector> us;
             for (int k = 0; k < inputs.rows(); ++k) us.push_back(inputs.row(k).transpose());
             const Plan p = rollout(model, x0, us);
             Matrix X(static_cast<int>(p.states.size()), model.state_dim());
             for (std::size_t k = 0; k < p.states.size(); ++k) X.row(static_cast<int>(k)) = p.states[k].transpose();
             return X;
           },
           py::arg("x0"), py::arg("inputs"), "States (N+1) x 7 for inputs N x 2.");

  m.def("scenario_hash", [](const std::string& text) { return scenario_hash(parse_scenario(text)); },
        py::arg("scenario"));

  m.def("solve",
        [](const std::string& scenario, std::optional<double> grad_tol, std::optional<int> max_iters) {
          const Scenario s = parse_scenario(scenario);
          const SolverConfig cfg = overrides(grad_tol, max_iters);
          py::gil_scoped_release release;
          return dump_plan(solve_scenario(s, cfg));
        },
        py::arg("scenario"), py::arg("grad_tol") = py::none(), py::arg("max_iters") = py::none(),
        "Plan document for the scenario's open-loop OCP.");

  m.def("simulate",
        [](const std::string& scenario, std::optional<double> grad_tol, std::optional<int> max_iters) {
          const Scenario s = parse_scenario(scenario);
          const SolverConfig cfg = overrides(grad_tol, max_iters);
          py::gil_scoped_release release;
          return dump_trace(simulate_scenario(s, cfg));
        },
        py::arg("scenario"), py::arg("grad_tol") = py::none(), py::arg("max_iters") = py::none());

  m.def("analyze",
        [](const std::string& scenario, const std::string& artifact, const std::string& correction) {
          const Scenario s = parse_scenario(scenario);
          const CorrectionFile c = parse_correction(correction);
          const Json art = parse_json(artifact);
          const bool is_trace = art.is_object() && art.value("version", "") == kTraceVersion;
          py::gil_scoped_release release;
          const ReportDocument r = is_trace ? analyze_trace(s, trace_from_json(art), c)
                                            : analyze_plan(s, plan_from_json(art), c, SolverConfig{});
          return dump_report(r);
        },
        py::arg("scenario"), py::arg("artifact"), py::arg("correction"),
        "Report document for a plan (stage-indexed) or trace (cycle-indexed) correction.");

  m.def("learn",
        [](const std::string& scenario, const std::string& requirements) {
          const Scenario s = parse_scenario(scenario);
          const RequirementsFile r = parse_requirements(requirements);
          py::gil_scoped_release release;
          return dump_weights(learn_scenario(s, r, SolverConfig{}));
        },
        py::arg("scenario"), py::arg("requirements"));

  m.def("ranking_table", [](const std::string& report) { return ranking_table(parse_report(report)); },
        py::arg("report"));

  m.def("hinge_objective",
        [](const std::vector<Matrix>& coefficients, const Matrix& initial, const Matrix& w, double margin) {
          return hinge_objective(make_problem(coefficients, initial, margin, false), w);
        },
        py::arg("coefficients"), py::arg("initial"), py::arg("weights"), py::arg("margin") = 1e-3);

  m.def("solve_weight_lp",
        [](const std::vector<Matrix>& coefficients, const Matrix& initial, double margin,
           const std::string& method, bool per_component_normalization) {
          const LearningProblem p = make_problem(coefficients, initial, margin, per_component_normalization);
          WeightSolveOptions opts;
          opts.method = parse_weight_solver(method);
          const WeightSolveResult r = solve_weight_lp(p, opts);
          return py::make_tuple(r.weights, r.objective, r.optimal);
        },
        py::arg("coefficients"), py::arg("initial"), py::arg("margin") = 1e-3, py::arg("method") = "simplex",
        py::arg("per_component_normalization") = false,
        "Returns (weights, objective, optimal) for the hinge weight-learning problem.");
}
