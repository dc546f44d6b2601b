#include "ocplens/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace ocplens {

namespace {

std::vector<std::string> component_names() {
  std::vector<std::string> out;
  for (auto id : kAllComponents) out.emplace_back(component_name(id));
  return out;
}

void require_hash(const Scenario& s, const std::string& artifact_hash, const char* what) {
  const std::string h = scenario_hash(s);
  if (artifact_hash != h) {
    throw InterfaceError("hash_mismatch", std::string(what) + " was produced from scenario " +
                                              artifact_hash.substr(0, 12) + ", not " + h.substr(0, 12));
  }
}

DirectionalCorrection build_correction(const CorrectionFile& c, AnalysisMode expected, int horizon) {
  if (c.annotations.empty()) throw InterfaceError("empty_correction", "empty correction");
  if (c.mode != expected) {
    throw InterfaceError("mode_mismatch", expected == AnalysisMode::kOpenLoop
                                              ? "a plan needs a stage-indexed correction"
                                              : "a trace needs a cycle-indexed correction");
  }
  try {
    return DirectionalCorrection::from_annotations(horizon, c.annotations);
  } catch (const InputError& e) {
    throw InterfaceError("invalid_input", std::string("correction: ") + e.what());
  }
}

std::vector<int> component_columns(const std::vector<std::string>& names) {
  std::vector<int> out;
  for (const auto& n : names) out.push_back(static_cast<int>(parse_component_id(n)));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

SolverConfig SolverOverrides::apply(SolverConfig base) const {
  if (grad_tol) base.grad_tol = *grad_tol;
  if (max_iters) base.max_iters = *max_iters;
  try {
    base.validate();
  } catch (const InputError& e) {
    throw InterfaceError("invalid_input", std::string("solver: ") + e.what());
  }
  return base;
}

PlanDocument solve_scenario(const Scenario& s, const SolverConfig& cfg, const std::optional<Matrix>& weights) {
  const UnicycleModel model = s.model();
  const PlannerCostModel costs(s.open_loop_context());
  const WeightSchedule w = weights ? WeightSchedule(*weights) : s.weight_schedule();
  if (w.horizon() != s.horizon || w.num_components() != kNumComponents) {
    throw InterfaceError("invalid_input", "weights: expected " + std::to_string(s.horizon + 1) + " x " +
                                              std::to_string(kNumComponents) + " entries");
  }
  const SolveResult res = solve(model, s.initial_state, costs, w, cfg);
  const ObjectiveBreakdown ob = assemble_objective(costs, res.plan, w);
  PlanDocument d;
  d.scenario_hash = scenario_hash(s);
  d.plan = res.plan;
  d.weights = w.matrix();
  d.components = component_names();
  d.objective = ob.total;
  d.weighted_values = ob.weighted_values;
  d.diagnostics = {res.converged, res.iterations, res.grad_inf_norm, res.message};
  return d;
}

Matrix scaled_weights(const Scenario& s, const std::map<std::string, double>& multipliers) {
  Matrix W = s.weight_schedule().matrix();
  for (const auto& [name, m] : multipliers) {
    int r = 0;
    try {
      r = static_cast<int>(parse_component_id(name));
    } catch (const InputError&) {
      throw InterfaceError("invalid_input", "multipliers." + name + ": unknown component");
    }
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw InterfaceError("invalid_input", "multipliers." + name + ": must be finite and nonnegative");
    }
    W.col(r) *= m;
  }
  return W;
}

TraceDocument simulate_scenario(const Scenario& s, const SolverConfig& cfg) {
  const UnicycleModel model = s.model();
  MpcConfig mpc;
  mpc.duration = s.mpc_duration.value_or(30);
  mpc.solver = cfg;
  const WeightSchedule w = s.weight_schedule();
  TraceDocument d;
  d.scenario_hash = scenario_hash(s);
  d.weights = w.matrix();
  d.trace = run_mpc(model, s.initial_state, s.base_context(), w, s.lead_agent, mpc);
  return d;
}

ReportDocument analyze_plan(const Scenario& s, const PlanDocument& plan, const CorrectionFile& correction,
                            const SolverConfig& cfg) {
  require_hash(s, plan.scenario_hash, "plan");
  const DirectionalCorrection a = build_correction(correction, AnalysisMode::kOpenLoop, plan.plan.horizon());
  const UnicycleModel model = s.model();
  const PlannerCostModel costs(s.open_loop_context());
  ReportDocument d;
  d.scenario_hash = plan.scenario_hash;
  d.annotations = correction.annotations;
  d.report = score_open_loop(model, plan.plan, costs, WeightSchedule(plan.weights), a,
                             plan.diagnostics.grad_inf_norm);
  d.optimality_bound = d.report.correction_l1 * d.report.sensitivity_inf_norm * cfg.grad_tol;
  return d;
}

ReportDocument analyze_trace(const Scenario& s, const TraceDocument& trace, const CorrectionFile& correction) {
  require_hash(s, trace.scenario_hash, "trace");
  const DirectionalCorrection a = build_correction(correction, AnalysisMode::kClosedLoop, trace.trace.duration());
  MpcTrace t = trace.trace;
  const CostContext base = s.base_context();
  for (auto& c : t.cycles) {
    auto lead = c.context.lead;
    c.context = base;
    c.context.lead = lead;
  }
  ReportDocument d;
  d.scenario_hash = trace.scenario_hash;
  d.annotations = correction.annotations;
  d.report = score_closed_loop(s.model(), t, WeightSchedule(trace.weights), a);
  return d;
}

WeightsDocument learn_scenario(const Scenario& s, const RequirementsFile& req, const SolverConfig& cfg) {
  const UnicycleModel model = s.model();
  LearnerConfig lc;
  lc.max_iterations = req.learner.max_iterations;
  lc.margin = req.learner.margin;
  lc.per_component_normalization = req.learner.per_component_normalization;
  lc.solver.method = req.learner.solver;
  lc.initial_weights = uniform_initial_weights(s.horizon, component_columns(req.learner.components));

  const bool closed = req.requirements.headway_tolerance.has_value();
  if (closed && (req.requirements.speed || req.requirements.path)) {
    throw InterfaceError("invalid_input", "requirements: headway cannot be combined with speed/path bands");
  }
  LearningResult res;
  if (closed) {
    if (!s.lead_agent) throw InterfaceError("invalid_input", "lead_agent: headway requirements need a lead agent");
    MpcConfig mpc;
    mpc.duration = s.mpc_duration.value_or(30);
    mpc.solver = cfg;
    res = run_algorithm1_closed_loop(model, s.initial_state, s.base_context(), *s.lead_agent, mpc,
                                     req.requirements, lc);
  } else {
    res = run_algorithm1_open_loop(model, s.initial_state, s.open_loop_context(), req.requirements, cfg, lc);
  }
  WeightsDocument d;
  d.scenario_hash = scenario_hash(s);
  d.components = component_names();
  d.weights = res.weights.matrix();
  d.converged = res.converged;
  d.message = res.message;
  d.history = res.history;
  return d;
}

std::string ranking_table(const ReportDocument& report) {
  const ConsistencyReport& r = report.report;
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-4s %-22s %16s %16s\n", "rank", "component", "consistency", "cost");
  out << line;
  for (std::size_t i = 0; i < r.ranking.size(); ++i) {
    const int c = r.ranking[i];
    std::snprintf(line, sizeof line, "%-4zu %-22s %16.6e %16.6e\n", i + 1, r.components[c].c_str(), r.totals[c],
                  r.cost_magnitudes.col(c).sum());
    out << line;
  }
  return out.str();
}

}  // namespace ocplens
