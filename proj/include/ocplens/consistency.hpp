#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ocplens/cost_library.hpp"
#include "ocplens/dynamics.hpp"
#include "ocplens/mpc_trace.hpp"
#include "ocplens/ocp_solver.hpp"
#include "ocplens/sensitivity.hpp"

namespace ocplens {

/// Plan coordinates an annotation can address: the seven unicycle states and
/// the two inputs.
enum class PlanDimension : int { kX = 0, kY, kTheta, kV, kOmega, kA, kAlpha, kJ, kEta };

std::string_view dimension_name(PlanDimension d);
/// "X", "Y", "THETA", "V", "OMEGA", "A", "ALPHA", "J", "ETA". Throws InputError.
PlanDimension parse_dimension(std::string_view name);
inline bool is_input_dimension(PlanDimension d) { return d == PlanDimension::kJ || d == PlanDimension::kEta; }

struct Annotation {
  int stage = 0;  // stage k (open loop) or cycle t (closed loop)
  PlanDimension dimension = PlanDimension::kV;
  double value = 1.0;  // +-1 for user annotations
};

/// a = (a_x, a_u): the desired local direction of change of a plan or of a
/// closed-loop trajectory (horizon N, or T in closed loop).
class DirectionalCorrection {
 public:
  DirectionalCorrection() = default;
  DirectionalCorrection(Vector a_x, Vector a_u, int n_x, int n_u);

  /// Unicycle correction from annotations over a horizon. Rejects duplicate
  /// (stage, dimension) pairs, out-of-range stages (inputs need stage < N),
  /// zero or non-finite values, and an empty list.
  static DirectionalCorrection from_annotations(int horizon,
                                                std::vector<Annotation> annotations);

  int horizon() const { return n_u_ > 0 ? static_cast<int>(a_u_.size() / n_u_) : 0; }
  int state_dim() const { return n_x_; }
  int input_dim() const { return n_u_; }
  const Vector& a_x() const { return a_x_; }
  const Vector& a_u() const { return a_u_; }
  const std::vector<Annotation>& annotations() const { return annotations_; }

  /// (a_x; a_u), aligned with Plan::stacked().
  Vector stacked() const;
  double l1_norm() const { return a_x_.lpNorm<1>() + a_u_.lpNorm<1>(); }
  bool is_zero() const { return a_x_.isZero(0.0) && a_u_.isZero(0.0); }
  DirectionalCorrection scaled(double alpha) const;

 private:
  Vector a_x_;
  Vector a_u_;
  int n_x_ = 0;
  int n_u_ = 0;
  std::vector<Annotation> annotations_;
};

enum class AnalysisMode { kOpenLoop, kClosedLoop };
std::string_view mode_name(AnalysisMode m);
AnalysisMode parse_mode(std::string_view name);

struct ConsistencyReport {
  AnalysisMode mode = AnalysisMode::kOpenLoop;
  std::vector<std::string> components;
  Matrix scores;           // (N+1) x R open loop, T x R closed loop
  Vector totals;           // column sums of scores
  std::vector<int> ranking;  // component indices, ascending total, ties by index
  Matrix cost_magnitudes;  // weighted component values, same shape as scores
  double solver_grad_norm = 0.0;
  double correction_l1 = 0.0;
  double sensitivity_inf_norm = 0.0;

  /// sum over all scores.
  double score_sum() const { return scores.sum(); }
};

/// Fills totals and ranking from scores.
void finalize_report(ConsistencyReport& report);

/// Open-loop scores cs_k^{(r)} = <a, -w_k^{(r)} F grad l~_k^{(r)}> at a plan.
/// Evaluated as -w (<grad_x l_k, (F_xu b)_k> + <grad_u l_k, b_k>) with
/// b = F' a, which avoids forming eliminated gradients one by one.
ConsistencyReport score_open_loop(const SystemModel& model, const Plan& plan,
                                  const CostModel& costs,
                                  const WeightSchedule& weights,
                                  const DirectionalCorrection& correction,
                                  double solver_grad_norm = 0.0);

/// Unweighted coefficients c_k^{(r)} = <a, F grad l~_k^{(r)}>, shape (N+1) x R,
/// for the listed components (other columns are zero). The open-loop score is
/// -w_k^{(r)} c_k^{(r)}.
Matrix open_loop_coefficients(const SensitivityMatrix& F, const Plan& plan,
                              const CostModel& costs, const DirectionalCorrection& correction,
                              const std::vector<int>& components);
Matrix open_loop_coefficients(const SystemModel& model, const Plan& plan,
                              const CostModel& costs, const DirectionalCorrection& correction,
                              const std::vector<int>& components);

/// Closed-loop analogue over predicted stages: c_k^{(r)} sums, over cycles t,
/// <(F^cl' a)_t, grad_{u_{0|t}} l~_{k|t}^{(r)}>. Shape (N+1) x R.
Matrix closed_loop_coefficients(const SystemModel& model, const MpcTrace& trace,
                                const DirectionalCorrection& correction,
                                const std::vector<int>& components);

/// Closed-loop scores cs_t^{(r)} over cycles, using F^cl of the executed
/// trajectory and the per-cycle first-input gradients aggregated over
/// predicted stages. Cost magnitudes are the weighted stage-0 values of each
/// cycle's plan (what the robot actually incurs at that cycle).
ConsistencyReport score_closed_loop(const SystemModel& model, const MpcTrace& trace,
                                    const WeightSchedule& weights,
                                    const DirectionalCorrection& correction);

/// Per-(t, k) breakdown for component r: entry (t, k) is
/// -w_k^{(r)} <(F^cl' a)_t, grad_{u_{0|t}} l~_{k|t}^{(r)}>. Row sums equal the
/// aggregated closed-loop scores.
Matrix closed_loop_score_breakdown(const SystemModel& model, const MpcTrace& trace,
                                   const WeightSchedule& weights,
                                   const DirectionalCorrection& correction, int r);

/// A differentiable stage function h(x_k, u_k) <= 0.
struct StageConstraint {
  std::string name;
  std::function<void(const Vector& x, const Vector& u, double& value, Vector& grad_x,
                     Vector& grad_u)>
      evaluate;
};

/// h = v - v_max on the unicycle.
StageConstraint speed_cap(double v_max);

struct ConstraintConsistencyResult {
  std::string constraint;
  int stage = 0;
  bool active = false;
  double activation_residual = 0.0;
  double score = 0.0;  // <a, -F grad h~_k>
  bool blocking = false;
};

ConstraintConsistencyResult score_constraint(const SystemModel& model, const Plan& plan,
                                             const StageConstraint& constraint, int stage,
                                             const DirectionalCorrection& correction,
                                             double active_tol = 1e-6);

struct DescentProbe {
  int stage = 0;
  int component = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  double new_objective = 0.0;  // J^(u^) with w_k^{(r)} raised by delta
  double old_objective = 0.0;  // J^(u*)
  double correction_inner_product = 0.0;  // <a, zeta(u^) - zeta*>
};

/// Raises w_k^{(r)} by delta and steps u^ = u* - eps delta grad l~_k^{(r)},
/// halving eps from 1 until the raised objective decreases. Throws
/// InputError for delta <= 0 and NumericalError if eps falls below 1e-12.
DescentProbe descent_probe(const SystemModel& model, const Plan& plan,
                           const CostModel& costs, const WeightSchedule& weights,
                           int stage, int component, const DirectionalCorrection& correction,
                           double delta);

struct ResolveCheck {
  double inner_product = 0.0;  // <a, zeta^* - zeta*>
  bool converged = false;
  bool passed = false;
};

/// Re-solves with w_k^{(r)} raised by delta (warm-started at u*) and reports
/// whether the new optimum moved along the correction.
ResolveCheck resolve_check(const SystemModel& model, const Plan& plan,
                           const CostModel& costs, const WeightSchedule& weights,
                           int stage, int component, const DirectionalCorrection& correction,
                           double delta, const SolverConfig& cfg);

enum class Aggregation { kPerComponentTotal, kPerStage, kTopK };

struct AggregateRow {
  std::string label;
  double value = 0.0;
};

/// kPerComponentTotal: one row per component in ranking order (most
/// inconsistent first). kPerStage: one row per stage/cycle with the sum over
/// components. kTopK: the first k rows of the ranking.
std::vector<AggregateRow> aggregate(const ConsistencyReport& report, Aggregation mode,
                                    int k = 1);

}  // namespace ocplens
