#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ocplens/dynamics.hpp"
#include "ocplens/path_geometry.hpp"

namespace ocplens {

/// The nine motion-planning cost components, in report column order.
enum class CostComponentId : int {
  kTangentialJerk = 0,
  kAngularJerk,
  kLateralAcceleration,
  kReferenceSpeed,
  kReferencePath,
  kObstacle,
  kBoundary,
  kHeadway,
  kRelativeSpeed,
};

inline constexpr int kNumComponents = 9;

inline constexpr std::array<CostComponentId, kNumComponents> kAllComponents = {
    CostComponentId::kTangentialJerk,      CostComponentId::kAngularJerk,
    CostComponentId::kLateralAcceleration, CostComponentId::kReferenceSpeed,
    CostComponentId::kReferencePath,       CostComponentId::kObstacle,
    CostComponentId::kBoundary,            CostComponentId::kHeadway,
    CostComponentId::kRelativeSpeed,
};

/// Upper snake case id, e.g. "REFERENCE_SPEED".
std::string_view component_name(CostComponentId id);
/// Inverse of component_name. Throws InputError on unknown ids.
CostComponentId parse_component_id(std::string_view name);
/// Components that depend on the input only (zero at the terminal stage).
bool is_input_component(CostComponentId id);

/// Per-stage predicted lead-agent motion along the reference path.
struct LeadAgentPrediction {
  std::vector<double> arc_lengths;  // D(p_o,k), k = 0..N
  std::vector<double> speeds;       // v_o,k
  std::vector<Point2> positions;    // p_o,k
};

struct CostContext {
  std::shared_ptr<const ReferencePath> path;
  double v_ref = 10.0;
  double d_w = 1.0;
  double o_buffer = 1.0;
  double t_h = 1.0;
  std::vector<Point2> obstacles;
  std::optional<LeadAgentPrediction> lead;

  /// Checks parameter signs and that lead predictions cover stages 0..N.
  void validate(int horizon) const;
};

struct CostEvaluation {
  double value = 0.0;
  Vector grad_x;
  Vector grad_u;
};

/// Value, gradient and Gauss-Newton Hessian blocks of a stage cost.
struct StageDerivatives : CostEvaluation {
  Matrix hess_xx;
  Matrix hess_uu;
  Matrix hess_ux;

  void reset(int n_x, int n_u, bool with_hessian);
  void add_scaled(const StageDerivatives& other, double scale, bool with_hessian);
};

/// Stage-wise nonnegative weights w_k^{(r)}: (N+1) rows x R columns. Row N
/// applies to the terminal stage.
class WeightSchedule {
 public:
  WeightSchedule() = default;
  /// Throws InputError on negative or non-finite entries.
  explicit WeightSchedule(Matrix weights);

  static WeightSchedule uniform(int horizon, int components, double value);
  /// Stage-uniform schedule from one weight per component.
  static WeightSchedule stage_uniform(int horizon, const Vector& per_component);

  int horizon() const { return static_cast<int>(weights_.rows()) - 1; }
  int num_components() const { return static_cast<int>(weights_.cols()); }
  double operator()(int k, int r) const { return weights_(k, r); }
  const Matrix& matrix() const { return weights_; }
  double total() const { return weights_.sum(); }

  void set(int k, int r, double value);

 private:
  Matrix weights_;
};

/// Table-1 nominal weights, stage-uniform: jerks 0.1, lateral acceleration
/// 1, reference speed 10, reference path 100, obstacle/boundary/headway 1000,
/// relative speed 1.
WeightSchedule default_weights(int horizon);

/// A collection of R cost components evaluated per stage. Components are
/// unweighted; weights are applied by the caller.
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual int num_components() const = 0;
  virtual std::string component_name(int r) const = 0;
  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;

  /// Component r at stage k. At k == horizon only state-dependent terms are
  /// evaluated and grad_u is zero.
  virtual void evaluate(int r, int k, int horizon, const Vector& x,
                        const Vector& u, bool with_hessian,
                        StageDerivatives& out) const = 0;
};

/// The nine planner components over the unicycle state.
class PlannerCostModel final : public CostModel {
 public:
  explicit PlannerCostModel(CostContext context);

  int num_components() const override { return kNumComponents; }
  std::string component_name(int r) const override;
  int state_dim() const override { return unicycle::kStateDim; }
  int input_dim() const override { return unicycle::kInputDim; }

  void evaluate(int r, int k, int horizon, const Vector& x, const Vector& u,
                bool with_hessian, StageDerivatives& out) const override;

  const CostContext& context() const { return context_; }

 private:
  CostContext context_;
};

/// 0.5 (x - x_ref)' Q (x - x_ref) + 0.5 u' R u, one entry per component.
struct QuadraticComponent {
  std::string name;
  Matrix Q;
  Vector x_ref;
  Matrix R;
};

/// Quadratic components for linear test systems.
class QuadraticCostModel final : public CostModel {
 public:
  explicit QuadraticCostModel(std::vector<QuadraticComponent> components);

  int num_components() const override {
    return static_cast<int>(components_.size());
  }
  std::string component_name(int r) const override {
    return components_.at(r).name;
  }
  int state_dim() const override { return n_x_; }
  int input_dim() const override { return n_u_; }

  void evaluate(int r, int k, int horizon, const Vector& x, const Vector& u,
                bool with_hessian, StageDerivatives& out) const override;

 private:
  std::vector<QuadraticComponent> components_;
  int n_x_ = 0;
  int n_u_ = 0;
};

/// One planner component at stage k. Throws InputError when HEADWAY or
/// RELATIVE_SPEED is requested without a lead-agent prediction.
CostEvaluation eval_component(CostComponentId id, int k, int horizon,
                              const Vector& x, const Vector& u,
                              const CostContext& ctx);

/// Weighted sum of all components at stage k (components with zero weight are
/// skipped).
StageDerivatives weighted_stage(const CostModel& costs,
                                const WeightSchedule& weights, int k,
                                int horizon, const Vector& x, const Vector& u,
                                bool with_hessian);

struct ObjectiveBreakdown {
  double total = 0.0;
  Matrix weighted_values;  // (N+1) x R, w_k^{(r)} l_k^{(r)}
};

/// J = sum_k sum_r w_k^{(r)} l_k^{(r)} over the plan.
ObjectiveBreakdown assemble_objective(const CostModel& costs, const Plan& plan,
                                      const WeightSchedule& weights);

}  // namespace ocplens
