#include "ocplens/consistency.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include "ocplens/errors.hpp"

namespace ocplens {

namespace {

constexpr std::array<std::string_view, 9> kDimensionNames = {
    "X", "Y", "THETA", "V", "OMEGA", "A", "ALPHA", "J", "ETA"};

constexpr double kMinProbeStep = 1e-12;

void check_correction(const DirectionalCorrection& a, int horizon, int n_x, int n_u) {
  if (a.is_zero()) throw InputError("empty correction");
  if (a.state_dim() != n_x || a.input_dim() != n_u || a.horizon() != horizon ||
      a.a_x().size() != static_cast<Eigen::Index>(horizon + 1) * n_x) {
    throw InputError("correction shape does not match the trajectory");
  }
}

Vector stage_input(const Plan& plan, int k, int n_u) {
  return k < plan.horizon() ? plan.inputs[k] : Vector::Zero(n_u);
}

}  // namespace

std::string_view dimension_name(PlanDimension d) {
  return kDimensionNames[static_cast<int>(d)];
}

PlanDimension parse_dimension(std::string_view name) {
  for (std::size_t i = 0; i < kDimensionNames.size(); ++i) {
    if (kDimensionNames[i] == name) return static_cast<PlanDimension>(i);
  }
  throw InputError("unknown plan dimension '" + std::string(name) + "'");
}

std::string_view mode_name(AnalysisMode m) {
  return m == AnalysisMode::kOpenLoop ? "open-loop" : "closed-loop";
}

AnalysisMode parse_mode(std::string_view name) {
  if (name == "open-loop") return AnalysisMode::kOpenLoop;
  if (name == "closed-loop") return AnalysisMode::kClosedLoop;
  throw InputError("unknown analysis mode '" + std::string(name) + "'");
}

DirectionalCorrection::DirectionalCorrection(Vector a_x, Vector a_u, int n_x, int n_u)
    : a_x_(std::move(a_x)), a_u_(std::move(a_u)), n_x_(n_x), n_u_(n_u) {
  if (n_x < 1 || n_u < 1 || a_x_.size() % n_x != 0 || a_u_.size() % n_u != 0 ||
      a_x_.size() / n_x != a_u_.size() / n_u + 1) {
    throw InputError("correction vectors have inconsistent sizes");
  }
  if (!a_x_.allFinite() || !a_u_.allFinite()) throw InputError("correction is not finite");
}

DirectionalCorrection DirectionalCorrection::from_annotations(
    int horizon, std::vector<Annotation> annotations) {
  using namespace unicycle;
  if (horizon < 1) throw InputError("correction horizon must be at least 1");
  if (annotations.empty()) throw InputError("empty correction");
  Vector a_x = Vector::Zero(static_cast<Eigen::Index>(horizon + 1) * kStateDim);
  Vector a_u = Vector::Zero(static_cast<Eigen::Index>(horizon) * kInputDim);
  std::set<std::pair<int, int>> seen;
  for (const auto& ann : annotations) {
    const int dim = static_cast<int>(ann.dimension);
    if (!seen.emplace(ann.stage, dim).second) {
      throw InputError("duplicate annotation at stage " + std::to_string(ann.stage) + " on " +
                       std::string(dimension_name(ann.dimension)));
    }
    if (!std::isfinite(ann.value) || ann.value == 0.0) {
      throw InputError("annotation value must be finite and nonzero");
    }
    if (is_input_dimension(ann.dimension)) {
      if (ann.stage < 0 || ann.stage >= horizon) {
        throw InputError("input annotation stage " + std::to_string(ann.stage) + " out of range");
      }
      a_u[ann.stage * kInputDim + (dim - kStateDim)] = ann.value;
    } else {
      if (ann.stage < 0 || ann.stage > horizon) {
        throw InputError("annotation stage " + std::to_string(ann.stage) + " out of range");
      }
      a_x[ann.stage * kStateDim + dim] = ann.value;
    }
  }
  DirectionalCorrection out(std::move(a_x), std::move(a_u), kStateDim, kInputDim);
  out.annotations_ = std::move(annotations);
  return out;
}

Vector DirectionalCorrection::stacked() const {
  Vector out(a_x_.size() + a_u_.size());
  out << a_x_, a_u_;
  return out;
}

DirectionalCorrection DirectionalCorrection::scaled(double alpha) const {
  DirectionalCorrection out(alpha * a_x_, alpha * a_u_, n_x_, n_u_);
  out.annotations_ = annotations_;
  for (auto& ann : out.annotations_) ann.value *= alpha;
  return out;
}

void finalize_report(ConsistencyReport& report) {
  report.totals = report.scores.colwise().sum().transpose();
  report.ranking.resize(report.totals.size());
  std::iota(report.ranking.begin(), report.ranking.end(), 0);
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [&](int i, int j) { return report.totals[i] < report.totals[j]; });
}

ConsistencyReport score_open_loop(const SystemModel& model, const Plan& plan,
                                  const CostModel& costs, const WeightSchedule& weights,
                                  const DirectionalCorrection& correction,
                                  double solver_grad_norm) {
  const int horizon = plan.horizon();
  const int n_x = model.state_dim();
  const int n_u = model.input_dim();
  const int R = costs.num_components();
  check_correction(correction, horizon, n_x, n_u);
  if (weights.horizon() != horizon || weights.num_components() != R) {
    throw InputError("weight schedule shape does not match plan/cost model");
  }

  std::vector<int> active;
  for (int r = 0; r < R; ++r) {
    if (!weights.matrix().col(r).isZero(0.0)) active.push_back(r);
  }
  const SensitivityMatrix F = build_F(linearize(model, plan), n_x, n_u);

  ConsistencyReport report;
  report.mode = AnalysisMode::kOpenLoop;
  for (int r = 0; r < R; ++r) report.components.push_back(costs.component_name(r));
  // 0 - w c rather than -(w c) keeps zero-weight entries at +0.
  report.scores = Matrix::Zero(horizon + 1, R) -
                  weights.matrix().cwiseProduct(
                      open_loop_coefficients(F, plan, costs, correction, active));
  report.cost_magnitudes = assemble_objective(costs, plan, weights).weighted_values;
  report.solver_grad_norm = solver_grad_norm;
  report.correction_l1 = correction.l1_norm();
  report.sensitivity_inf_norm = F.inf_norm();
  finalize_report(report);
  return report;
}

Matrix open_loop_coefficients(const SensitivityMatrix& F, const Plan& plan,
                              const CostModel& costs, const DirectionalCorrection& correction,
                              const std::vector<int>& components) {
  const int horizon = plan.horizon();
  const int n_x = F.state_dim();
  const int n_u = F.input_dim();
  check_correction(correction, horizon, n_x, n_u);
  if (F.horizon() != horizon) throw InputError("sensitivity does not match the plan");
  const Vector b = F.apply_transpose(correction.stacked());
  const Vector dx = F.F_xu() * b;

  Matrix out = Matrix::Zero(horizon + 1, costs.num_components());
  StageDerivatives d;
  for (int r : components) {
    if (r < 0 || r >= costs.num_components()) throw InputError("component index out of range");
    for (int k = 0; k <= horizon; ++k) {
      costs.evaluate(r, k, horizon, plan.states[k], stage_input(plan, k, n_u), false, d);
      double inner = d.grad_x.dot(dx.segment(k * n_x, n_x));
      if (k < horizon) inner += d.grad_u.dot(b.segment(k * n_u, n_u));
      out(k, r) = inner;
    }
  }
  return out;
}

Matrix open_loop_coefficients(const SystemModel& model, const Plan& plan,
                              const CostModel& costs, const DirectionalCorrection& correction,
                              const std::vector<int>& components) {
  return open_loop_coefficients(build_F(model, plan), plan, costs, correction, components);
}

Matrix closed_loop_coefficients(const SystemModel& model, const MpcTrace& trace,
                                const DirectionalCorrection& correction,
                                const std::vector<int>& components) {
  const int T = trace.duration();
  if (T < 1 || static_cast<int>(trace.cycles.size()) != T) {
    throw InputError("closed-loop trace is empty or missing cycle plans");
  }
  const int n_u = model.input_dim();
  check_correction(correction, T, model.state_dim(), n_u);
  const Vector b = build_F_cl(model, trace).apply_transpose(correction.stacked());
  const int horizon = trace.cycles.front().plan.horizon();
  Matrix out = Matrix::Zero(horizon + 1, kNumComponents);
  for (int r : components) {
    const Matrix G = closed_loop_stage_gradients(model, trace, r);
    for (int t = 0; t < T; ++t) {
      out.col(r).transpose() += b.segment(t * n_u, n_u).transpose() * G.middleRows(t * n_u, n_u);
    }
  }
  return out;
}

ConsistencyReport score_closed_loop(const SystemModel& model, const MpcTrace& trace,
                                    const WeightSchedule& weights,
                                    const DirectionalCorrection& correction) {
  const int T = trace.duration();
  if (T < 1 || static_cast<int>(trace.cycles.size()) != T) {
    throw InputError("closed-loop trace is empty or missing cycle plans");
  }
  const int n_x = model.state_dim();
  const int n_u = model.input_dim();
  check_correction(correction, T, n_x, n_u);

  const SensitivityMatrix F = build_F_cl(model, trace);
  const Vector b = F.apply_transpose(correction.stacked());

  ConsistencyReport report;
  report.mode = AnalysisMode::kClosedLoop;
  report.scores = Matrix::Zero(T, kNumComponents);
  report.cost_magnitudes = Matrix::Zero(T, kNumComponents);
  double grad_norm = 0.0;
  for (const auto& c : trace.cycles) grad_norm = std::max(grad_norm, c.grad_inf_norm);

  for (int r = 0; r < kNumComponents; ++r) {
    report.components.emplace_back(component_name(static_cast<CostComponentId>(r)));
    if (weights.matrix().col(r).isZero(0.0)) continue;
    const Vector g = first_input_gradients(model, trace, r, weights);
    for (int t = 0; t < T; ++t) {
      report.scores(t, r) = 0.0 - b.segment(t * n_u, n_u).dot(g.segment(t * n_u, n_u));
    }
  }
  StageDerivatives d;
  for (int t = 0; t < T; ++t) {
    const CycleRecord& cycle = trace.cycles[t];
    const PlannerCostModel costs(cycle.context);
    const int horizon = cycle.plan.horizon();
    for (int r = 0; r < kNumComponents; ++r) {
      const double w = weights(0, r);
      if (w == 0.0) continue;
      costs.evaluate(r, 0, horizon, cycle.plan.states[0], cycle.plan.inputs[0], false, d);
      report.cost_magnitudes(t, r) = w * d.value;
    }
  }
  report.solver_grad_norm = grad_norm;
  report.correction_l1 = correction.l1_norm();
  report.sensitivity_inf_norm = F.inf_norm();
  finalize_report(report);
  return report;
}

Matrix closed_loop_score_breakdown(const SystemModel& model, const MpcTrace& trace,
                                   const WeightSchedule& weights,
                                   const DirectionalCorrection& correction, int r) {
  const int T = trace.duration();
  const int n_u = model.input_dim();
  check_correction(correction, T, model.state_dim(), n_u);
  const Vector b = build_F_cl(model, trace).apply_transpose(correction.stacked());
  const Matrix G = closed_loop_stage_gradients(model, trace, r);
  Matrix out(T, G.cols());
  for (int t = 0; t < T; ++t) {
    for (Eigen::Index k = 0; k < G.cols(); ++k) {
      out(t, k) = -weights(static_cast<int>(k), r) *
                  b.segment(t * n_u, n_u).dot(G.block(t * n_u, k, n_u, 1).col(0));
    }
  }
  return out;
}

StageConstraint speed_cap(double v_max) {
  return StageConstraint{
      "SPEED_CAP",
      [v_max](const Vector& x, const Vector& u, double& value, Vector& gx, Vector& gu) {
        value = x[unicycle::kV] - v_max;
        gx = Vector::Zero(x.size());
        gx[unicycle::kV] = 1.0;
        gu = Vector::Zero(u.size());
      }};
}

ConstraintConsistencyResult score_constraint(const SystemModel& model, const Plan& plan,
                                             const StageConstraint& constraint, int stage,
                                             const DirectionalCorrection& correction,
                                             double active_tol) {
  const int horizon = plan.horizon();
  const int n_u = model.input_dim();
  check_correction(correction, horizon, model.state_dim(), n_u);
  if (stage < 0 || stage > horizon) throw InputError("constraint stage out of range");
  if (!(active_tol >= 0.0)) throw InputError("active_tol must be nonnegative");

  const auto lin = linearize(model, plan);
  double h = 0.0;
  Vector gx, gu;
  constraint.evaluate(plan.states[stage], stage_input(plan, stage, n_u), h, gx, gu);
  const Vector grad = eliminate_stage_gradient(lin, stage, gx, gu);
  const Vector b = build_F(lin, model.state_dim(), n_u).apply_transpose(correction.stacked());

  ConstraintConsistencyResult out;
  out.constraint = constraint.name;
  out.stage = stage;
  out.activation_residual = h;
  out.active = std::abs(h) <= active_tol;
  out.score = -b.dot(grad);
  out.blocking = out.active && out.score < 0.0;
  return out;
}

DescentProbe descent_probe(const SystemModel& model, const Plan& plan,
                           const CostModel& costs, const WeightSchedule& weights,
                           int stage, int component, const DirectionalCorrection& correction,
                           double delta) {
  if (!(delta > 0.0)) throw InputError("descent probe needs delta > 0");
  const int horizon = plan.horizon();
  check_correction(correction, horizon, model.state_dim(), model.input_dim());

  WeightSchedule raised = weights;
  raised.set(stage, component, weights(stage, component) + delta);
  const Vector grad = eliminated_gradient(model, plan, costs, component, stage).grad_u;
  const Vector u_star = plan.stacked_inputs();

  DescentProbe out;
  out.stage = stage;
  out.component = component;
  out.delta = delta;
  out.old_objective = assemble_objective(costs, plan, raised).total;
  for (double eps = 1.0; eps >= kMinProbeStep; eps *= 0.5) {
    const Plan trial =
        rollout(model, plan.states[0], unstack(u_star - eps * delta * grad, model.input_dim()));
    const double j = assemble_objective(costs, trial, raised).total;
    if (j < out.old_objective) {
      out.epsilon = eps;
      out.new_objective = j;
      out.correction_inner_product = correction.stacked().dot(trial.stacked() - plan.stacked());
      return out;
    }
  }
  throw NumericalError("descent probe found no improving step above 1e-12");
}

ResolveCheck resolve_check(const SystemModel& model, const Plan& plan,
                           const CostModel& costs, const WeightSchedule& weights,
                           int stage, int component, const DirectionalCorrection& correction,
                           double delta, const SolverConfig& cfg) {
  if (!(delta > 0.0)) throw InputError("re-solve check needs delta > 0");
  WeightSchedule raised = weights;
  raised.set(stage, component, weights(stage, component) + delta);
  const SolveResult res = solve(model, plan.states[0], costs, raised, cfg, plan.inputs);
  ResolveCheck out;
  out.converged = res.converged;
  out.inner_product = correction.stacked().dot(res.plan.stacked() - plan.stacked());
  out.passed = out.inner_product > 0.0;
  return out;
}

std::vector<AggregateRow> aggregate(const ConsistencyReport& report, Aggregation mode, int k) {
  std::vector<AggregateRow> rows;
  switch (mode) {
    case Aggregation::kPerComponentTotal:
    case Aggregation::kTopK: {
      const int n = mode == Aggregation::kTopK
                        ? std::clamp(k, 0, static_cast<int>(report.ranking.size()))
                        : static_cast<int>(report.ranking.size());
      for (int i = 0; i < n; ++i) {
        const int r = report.ranking[i];
        rows.push_back({report.components.at(r), report.totals[r]});
      }
      break;
    }
    case Aggregation::kPerStage: {
      const Vector per_stage = report.scores.rowwise().sum();
      for (Eigen::Index i = 0; i < per_stage.size(); ++i) {
        rows.push_back({std::to_string(i), per_stage[i]});
      }
      break;
    }
  }
  return rows;
}

}  // namespace ocplens
