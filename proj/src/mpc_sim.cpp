#include "ocplens/mpc_sim.hpp"

#include <algorithm>
#include <cmath>

#include "ocplens/errors.hpp"

namespace ocplens {

void LeadAgentSpec::validate() const {
  if (!std::isfinite(initial_arc_offset)) throw InputError("lead initial_arc_offset must be finite");
  if (!(truth_speed >= 0.0) || !std::isfinite(truth_speed)) {
    throw InputError("lead truth_speed must be finite and nonnegative");
  }
  if (!std::isfinite(fault_rate)) throw InputError("lead fault_rate must be finite");
  if (fault_onset_stage < 0) throw InputError("lead fault_onset_stage must be nonnegative");
  if (fault_first < 0) throw InputError("lead fault window must start at a nonnegative cycle");
}

PredictionModel::PredictionModel(LeadAgentSpec spec,
                                 std::shared_ptr<const ReferencePath> path,
                                 double dt, int horizon)
    : spec_(spec), path_(std::move(path)), dt_(dt), horizon_(horizon) {
  spec_.validate();
  if (!path_) throw InputError("prediction model needs a reference path");
  if (!(dt > 0.0) || horizon < 1) throw InputError("prediction model needs dt > 0 and N >= 1");
}

LeadAgentPrediction PredictionModel::predict(int cycle, double current_arc) const {
  const bool faulty = spec_.faulty(cycle);
  LeadAgentPrediction out;
  out.arc_lengths.reserve(horizon_ + 1);
  out.speeds.reserve(horizon_ + 1);
  out.positions.reserve(horizon_ + 1);
  double s = current_arc;
  for (int k = 0; k <= horizon_; ++k) {
    double v = spec_.truth_speed;
    if (faulty && k >= spec_.fault_onset_stage) {
      v = std::max(spec_.truth_speed + spec_.fault_rate * (k - spec_.fault_onset_stage) * dt_, 0.0);
    }
    out.arc_lengths.push_back(s);
    out.speeds.push_back(v);
    out.positions.push_back(path_->point_at(s));
    s += v * dt_;
  }
  return out;
}

std::vector<Vector> shift_warm_start(const Plan& previous) {
  const int n = previous.horizon();
  if (n < 1) throw InputError("cannot shift an empty plan");
  std::vector<Vector> out(previous.inputs.begin() + 1, previous.inputs.end());
  out.push_back(previous.inputs.back());
  return out;
}

MpcTrace run_mpc(const SystemModel& model, const Vector& x_init,
                 const CostContext& base_context, const WeightSchedule& weights,
                 const std::optional<LeadAgentSpec>& lead, const MpcConfig& cfg) {
  if (cfg.duration < 1) throw InputError("MPC duration T must be at least 1");
  cfg.solver.validate();
  const int horizon = weights.horizon();
  base_context.validate(horizon);

  std::optional<PredictionModel> predictor;
  double lead_arc = 0.0;
  if (lead) {
    predictor.emplace(*lead, base_context.path, model.dt(), horizon);
    const Point2 p0(x_init[unicycle::kX], x_init[unicycle::kY]);
    lead_arc = base_context.path->project(p0).arc_length + lead->initial_arc_offset;
  }

  MpcTrace trace;
  trace.closed_loop_states.push_back(x_init);
  if (lead) {
    trace.lead_arc.push_back(lead_arc);
    trace.lead_speed.push_back(lead->truth_speed);
  }

  Vector x = x_init;
  std::optional<std::vector<Vector>> warm;
  for (int t = 0; t < cfg.duration; ++t) {
    CycleRecord record;
    record.context = base_context;
    if (predictor) record.context.lead = predictor->predict(t, lead_arc);
    try {
      const PlannerCostModel costs(record.context);
      SolveResult res = solve(model, x, costs, weights, cfg.solver, warm);
      record.plan = std::move(res.plan);
      record.solver_iterations = res.iterations;
      record.converged = res.converged;
      record.grad_inf_norm = res.grad_inf_norm;
      const Vector u0 = record.plan.inputs.front();
      const Vector next = step(model, x, u0);
      warm = shift_warm_start(record.plan);
      trace.cycles.push_back(std::move(record));
      trace.executed_inputs.push_back(u0);
      trace.closed_loop_states.push_back(next);
      x = next;
    } catch (const Error& e) {
      trace.complete = false;
      trace.failure = "cycle " + std::to_string(t) + ": " + e.what();
      break;
    }
    if (lead) {
      lead_arc += lead->truth_speed * model.dt();
      trace.lead_arc.push_back(lead_arc);
      trace.lead_speed.push_back(lead->truth_speed);
    }
  }
  return trace;
}

}  // namespace ocplens
