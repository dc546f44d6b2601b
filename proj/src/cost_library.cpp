#include "ocplens/cost_library.hpp"

#include <cmath>

#include "ocplens/errors.hpp"

namespace ocplens {

namespace {

constexpr std::array<std::string_view, kNumComponents> kNames = {
    "TANGENTIAL_JERK", "ANGULAR_JERK", "LATERAL_ACCELERATION",
    "REFERENCE_SPEED", "REFERENCE_PATH", "OBSTACLE",
    "BOUNDARY",        "HEADWAY",      "RELATIVE_SPEED",
};

constexpr double kObstacleGuard = 1e-6;
constexpr double kZeroDistance = 1e-9;

using namespace unicycle;

// Adds 0.5 r^2 for a scalar residual r with Jacobian `jx` over the state.
void add_residual(double r, const Vector& jx, bool with_hessian,
                  StageDerivatives& out) {
  out.value += 0.5 * r * r;
  out.grad_x += r * jx;
  if (with_hessian) out.hess_xx += jx * jx.transpose();
}

Vector position_jacobian(const Point2& g) {
  Vector j = Vector::Zero(kStateDim);
  j[kX] = g.x();
  j[kY] = g.y();
  return j;
}

const LeadAgentPrediction& require_lead(const CostContext& ctx,
                                        CostComponentId id) {
  if (!ctx.lead) {
    throw InputError(std::string(component_name(id)) +
                     " requires a lead-agent prediction");
  }
  return *ctx.lead;
}

void evaluate_planner(CostComponentId id, int k, int horizon, const Vector& x,
                      const Vector& u, const CostContext& ctx,
                      bool with_hessian, StageDerivatives& out) {
  out.reset(kStateDim, kInputDim, with_hessian);
  const bool terminal = (k == horizon);
  const Point2 p(x[kX], x[kY]);

  switch (id) {
    case CostComponentId::kTangentialJerk:
    case CostComponentId::kAngularJerk: {
      if (terminal) return;
      const int idx = (id == CostComponentId::kTangentialJerk) ? kJerk : kAngJerk;
      out.value = 0.5 * u[idx] * u[idx];
      out.grad_u[idx] = u[idx];
      if (with_hessian) out.hess_uu(idx, idx) = 1.0;
      return;
    }
    case CostComponentId::kLateralAcceleration: {
      Vector jx = Vector::Zero(kStateDim);
      jx[kV] = x[kOmega];
      jx[kOmega] = x[kV];
      const double r = x[kV] * x[kOmega];
      add_residual(r, jx, with_hessian, out);
      if (with_hessian) {
        out.hess_xx(kV, kOmega) += r;
        out.hess_xx(kOmega, kV) += r;
      }
      return;
    }
    case CostComponentId::kReferenceSpeed: {
      Vector jx = Vector::Zero(kStateDim);
      jx[kV] = 1.0;
      add_residual(x[kV] - ctx.v_ref, jx, with_hessian, out);
      return;
    }
    case CostComponentId::kReferencePath: {
      const PathProjection proj = ctx.path->project(p);
      const Point2 e = p - proj.point;
      out.value = 0.5 * e.squaredNorm();
      out.grad_x[kX] = e.x();
      out.grad_x[kY] = e.y();
      if (with_hessian) {
        Eigen::Matrix2d h = Eigen::Matrix2d::Identity();
        if (proj.fraction > 0.0 && proj.fraction < 1.0) {
          const Point2 t = ctx.path->tangent(proj.segment);
          const Point2 n(-t.y(), t.x());
          h = n * n.transpose();
        }
        out.hess_xx.block<2, 2>(kX, kX) = h;
      }
      return;
    }
    case CostComponentId::kObstacle: {
      for (const Point2& obstacle : ctx.obstacles) {
        const Point2 diff = p - obstacle;
        const double dist = diff.norm();
        const double r = ctx.o_buffer - dist;
        if (r <= 0.0) continue;
        if (dist < kObstacleGuard) {
          out.value += 0.5 * r * r;
          continue;
        }
        const Point2 n = diff / dist;
        add_residual(r, position_jacobian(-n), with_hessian, out);
        if (with_hessian) {
          // Curvature of the distance: r * d2(-dist)/dp2.
          out.hess_xx.block<2, 2>(kX, kX) -=
              (r / dist) * (Eigen::Matrix2d::Identity() - n * n.transpose());
        }
      }
      return;
    }
    case CostComponentId::kBoundary: {
      const LateralOffset off = ctx.path->lateral_offset_gradient(p);
      const double r = off.distance - ctx.d_w;
      if (r <= 0.0) return;
      add_residual(r, position_jacobian(off.grad), with_hessian, out);
      return;
    }
    case CostComponentId::kHeadway: {
      const LeadAgentPrediction& lead = require_lead(ctx, id);
      const PathProjection proj = ctx.path->project(p);
      const double r = ctx.t_h * x[kV] - (lead.arc_lengths.at(k) - proj.arc_length);
      if (r <= 0.0) return;
      int seg = proj.segment;
      if (proj.fraction >= 1.0 && seg + 1 < ctx.path->num_segments()) ++seg;
      Vector jx = position_jacobian(ctx.path->tangent(seg));
      jx[kV] = ctx.t_h;
      add_residual(r, jx, with_hessian, out);
      return;
    }
    case CostComponentId::kRelativeSpeed: {
      const LeadAgentPrediction& lead = require_lead(ctx, id);
      Vector jx = Vector::Zero(kStateDim);
      jx[kV] = 1.0;
      add_residual(x[kV] - lead.speeds.at(k), jx, with_hessian, out);
      return;
    }
  }
}

}  // namespace

std::string_view component_name(CostComponentId id) {
  return kNames[static_cast<int>(id)];
}

CostComponentId parse_component_id(std::string_view name) {
  for (int r = 0; r < kNumComponents; ++r) {
    if (kNames[r] == name) return static_cast<CostComponentId>(r);
  }
  throw InputError("unknown cost component id '" + std::string(name) + "'");
}

bool is_input_component(CostComponentId id) {
  return id == CostComponentId::kTangentialJerk ||
         id == CostComponentId::kAngularJerk;
}

void CostContext::validate(int horizon) const {
  if (!path) throw InputError("cost context has no reference path");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InputError(std::string(name) + " must be positive and finite");
    }
  };
  positive(v_ref, "v_ref");
  positive(d_w, "d_w");
  positive(o_buffer, "o_buffer");
  positive(t_h, "t_h");
  for (const auto& o : obstacles) {
    if (!o.allFinite()) throw InputError("obstacle position is not finite");
  }
  if (lead) {
    const auto n = static_cast<std::size_t>(horizon) + 1;
    if (lead->arc_lengths.size() != n || lead->speeds.size() != n ||
        lead->positions.size() != n) {
      throw InputError("lead-agent prediction must cover stages 0..N");
    }
  }
}

void StageDerivatives::reset(int n_x, int n_u, bool with_hessian) {
  value = 0.0;
  grad_x.setZero(n_x);
  grad_u.setZero(n_u);
  if (with_hessian) {
    hess_xx.setZero(n_x, n_x);
    hess_uu.setZero(n_u, n_u);
    hess_ux.setZero(n_u, n_x);
  }
}

void StageDerivatives::add_scaled(const StageDerivatives& other, double scale,
                                  bool with_hessian) {
  value += scale * other.value;
  grad_x += scale * other.grad_x;
  grad_u += scale * other.grad_u;
  if (with_hessian) {
    hess_xx += scale * other.hess_xx;
    hess_uu += scale * other.hess_uu;
    hess_ux += scale * other.hess_ux;
  }
}

WeightSchedule::WeightSchedule(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() < 1) throw InputError("weight schedule has no stages");
  if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
    throw InputError("weights must be finite and nonnegative");
  }
}

WeightSchedule WeightSchedule::uniform(int horizon, int components,
                                       double value) {
  return WeightSchedule(Matrix::Constant(horizon + 1, components, value));
}

WeightSchedule WeightSchedule::stage_uniform(int horizon,
                                             const Vector& per_component) {
  Matrix w(horizon + 1, per_component.size());
  w.rowwise() = per_component.transpose();
  return WeightSchedule(std::move(w));
}

void WeightSchedule::set(int k, int r, double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw InputError("weights must be finite and nonnegative");
  }
  weights_(k, r) = value;
}

WeightSchedule default_weights(int horizon) {
  Vector w(kNumComponents);
  w << 0.1, 0.1, 1.0, 10.0, 100.0, 1000.0, 1000.0, 1000.0, 1.0;
  return WeightSchedule::stage_uniform(horizon, w);
}

PlannerCostModel::PlannerCostModel(CostContext context)
    : context_(std::move(context)) {
  if (!context_.path) throw InputError("cost context has no reference path");
}

std::string PlannerCostModel::component_name(int r) const {
  return std::string(kNames.at(r));
}

void PlannerCostModel::evaluate(int r, int k, int horizon, const Vector& x,
                                const Vector& u, bool with_hessian,
                                StageDerivatives& out) const {
  evaluate_planner(static_cast<CostComponentId>(r), k, horizon, x, u, context_,
                   with_hessian, out);
}

QuadraticCostModel::QuadraticCostModel(std::vector<QuadraticComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InputError("no quadratic components");
  n_x_ = static_cast<int>(components_.front().Q.rows());
  n_u_ = static_cast<int>(components_.front().R.rows());
  for (auto& c : components_) {
    if (c.Q.rows() != n_x_ || c.Q.cols() != n_x_ || c.R.rows() != n_u_ ||
        c.R.cols() != n_u_) {
      throw InputError("quadratic component '" + c.name + "' has bad shape");
    }
    if (c.x_ref.size() == 0) c.x_ref = Vector::Zero(n_x_);
  }
}

void QuadraticCostModel::evaluate(int r, int k, int horizon, const Vector& x,
                                  const Vector& u, bool with_hessian,
                                  StageDerivatives& out) const {
  const QuadraticComponent& c = components_.at(r);
  out.reset(n_x_, n_u_, with_hessian);
  const Vector e = x - c.x_ref;
  out.grad_x = c.Q * e;
  out.value = 0.5 * e.dot(out.grad_x);
  if (with_hessian) out.hess_xx = c.Q;
  if (k < horizon) {
    out.grad_u = c.R * u;
    out.value += 0.5 * u.dot(out.grad_u);
    if (with_hessian) out.hess_uu = c.R;
  }
}

CostEvaluation eval_component(CostComponentId id, int k, int horizon,
                              const Vector& x, const Vector& u,
                              const CostContext& ctx) {
  if (k < 0 || k > horizon) throw InputError("stage out of range");
  StageDerivatives d;
  evaluate_planner(id, k, horizon, x, u, ctx, false, d);
  return CostEvaluation{d.value, d.grad_x, d.grad_u};
}

StageDerivatives weighted_stage(const CostModel& costs,
                                const WeightSchedule& weights, int k,
                                int horizon, const Vector& x, const Vector& u,
                                bool with_hessian) {
  StageDerivatives total;
  total.reset(costs.state_dim(), costs.input_dim(), with_hessian);
  StageDerivatives part;
  for (int r = 0; r < costs.num_components(); ++r) {
    const double w = weights(k, r);
    if (w == 0.0) continue;
    costs.evaluate(r, k, horizon, x, u, with_hessian, part);
    total.add_scaled(part, w, with_hessian);
  }
  return total;
}

ObjectiveBreakdown assemble_objective(const CostModel& costs, const Plan& plan,
                                      const WeightSchedule& weights) {
  const int horizon = plan.horizon();
  if (weights.horizon() != horizon ||
      weights.num_components() != costs.num_components()) {
    throw InputError("weight schedule shape does not match plan/cost model");
  }
  ObjectiveBreakdown out;
  out.weighted_values = Matrix::Zero(horizon + 1, costs.num_components());
  const Vector u_terminal = Vector::Zero(costs.input_dim());
  StageDerivatives part;
  for (int k = 0; k <= horizon; ++k) {
    const Vector& u = (k < horizon) ? plan.inputs[k] : u_terminal;
    for (int r = 0; r < costs.num_components(); ++r) {
      const double w = weights(k, r);
      if (w == 0.0) continue;
      costs.evaluate(r, k, horizon, plan.states[k], u, false, part);
      out.weighted_values(k, r) = w * part.value;
    }
  }
  out.total = out.weighted_values.sum();
  return out;
}

}  // namespace ocplens
