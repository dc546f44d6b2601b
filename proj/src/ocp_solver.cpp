#include "ocplens/ocp_solver.hpp"

#include <cmath>
#include <limits>

#include "ocplens/errors.hpp"

namespace ocplens {

namespace {

constexpr double kRegMin = 1e-9;
constexpr double kRegMax = 1e10;
constexpr double kRegIncrease = 10.0;
constexpr double kRegDecrease = 0.3;
constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-10;

std::vector<StageDerivatives> expand(const CostModel& costs,
                                     const WeightSchedule& weights,
                                     const Plan& plan, bool with_hessian) {
  const int horizon = plan.horizon();
  std::vector<StageDerivatives> out(static_cast<std::size_t>(horizon) + 1);
  const Vector u_terminal = Vector::Zero(costs.input_dim());
  for (int k = 0; k <= horizon; ++k) {
    const Vector& u = (k < horizon) ? plan.inputs[k] : u_terminal;
    out[k] = weighted_stage(costs, weights, k, horizon, plan.states[k], u,
                            with_hessian);
  }
  return out;
}

double objective_value(const std::vector<StageDerivatives>& stages) {
  double total = 0.0;
  for (const auto& s : stages) total += s.value;
  return total;
}

double objective_only(const CostModel& costs, const WeightSchedule& weights,
                      const Plan& plan) {
  const int horizon = plan.horizon();
  const Vector u_terminal = Vector::Zero(costs.input_dim());
  double total = 0.0;
  for (int k = 0; k <= horizon; ++k) {
    const Vector& u = (k < horizon) ? plan.inputs[k] : u_terminal;
    total += weighted_stage(costs, weights, k, horizon, plan.states[k], u, false)
                 .value;
  }
  return total;
}

Vector adjoint_gradient(const std::vector<Linearization>& lin,
                        const std::vector<StageDerivatives>& stages, int n_u) {
  const int horizon = static_cast<int>(lin.size());
  Vector grad(static_cast<Eigen::Index>(horizon) * n_u);
  Vector lambda = stages[horizon].grad_x;
  for (int k = horizon - 1; k >= 0; --k) {
    grad.segment(k * n_u, n_u) = stages[k].grad_u + lin[k].B.transpose() * lambda;
    lambda = stages[k].grad_x + lin[k].A.transpose() * lambda;
  }
  return grad;
}

struct BackwardPass {
  std::vector<Vector> feedforward;
  std::vector<Matrix> feedback;
  double dv_linear = 0.0;     // sum k' Q_u
  double dv_quadratic = 0.0;  // sum 0.5 k' Q_uu k
};

bool backward_pass(const SystemModel& model, const Plan& plan,
                   const std::vector<Linearization>& lin,
                   const std::vector<StageDerivatives>& stages, double reg,
                   BackwardPass& out) {
  const int horizon = static_cast<int>(lin.size());
  out.feedforward.assign(horizon, Vector());
  out.feedback.assign(horizon, Matrix());
  out.dv_linear = 0.0;
  out.dv_quadratic = 0.0;

  Vector vx = stages[horizon].grad_x;
  Matrix vxx = stages[horizon].hess_xx;
  for (int k = horizon - 1; k >= 0; --k) {
    const Matrix& A = lin[k].A;
    const Matrix& B = lin[k].B;
    const StageDerivatives& s = stages[k];

    const Vector qx = s.grad_x + A.transpose() * vx;
    const Vector qu = s.grad_u + B.transpose() * vx;
    const Matrix vxx_b = vxx * B;
    Matrix qxx = s.hess_xx + A.transpose() * vxx * A;
    model.add_state_curvature(plan.states[k], plan.inputs[k], vx, qxx);
    const Matrix quu = s.hess_uu + B.transpose() * vxx_b;
    const Matrix qux = s.hess_ux + vxx_b.transpose() * A;

    Matrix quu_reg = quu;
    quu_reg.diagonal().array() += reg;
    const Eigen::LLT<Matrix> llt(quu_reg);
    if (llt.info() != Eigen::Success) return false;

    const Vector kff = -llt.solve(qu);
    const Matrix K = -llt.solve(qux);

    out.dv_linear += kff.dot(qu);
    out.dv_quadratic += 0.5 * kff.dot(quu * kff);

    vx = qx + K.transpose() * quu * kff + K.transpose() * qu +
         qux.transpose() * kff;
    vxx = qxx + K.transpose() * quu * K + K.transpose() * qux +
          qux.transpose() * K;
    vxx = 0.5 * (vxx + vxx.transpose()).eval();

    out.feedforward[k] = kff;
    out.feedback[k] = K;
  }
  return true;
}

bool forward_pass(const SystemModel& model, const Plan& nominal,
                  const BackwardPass& bp, double alpha, Plan& out) {
  const int horizon = nominal.horizon();
  out.states.resize(horizon + 1);
  out.inputs.resize(horizon);
  out.states[0] = nominal.states[0];
  for (int k = 0; k < horizon; ++k) {
    out.inputs[k] = nominal.inputs[k] + alpha * bp.feedforward[k] +
                    bp.feedback[k] * (out.states[k] - nominal.states[k]);
    out.states[k + 1] = model.transition(out.states[k], out.inputs[k]);
    if (!out.states[k + 1].allFinite() || !out.inputs[k].allFinite()) {
      return false;
    }
  }
  return true;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(grad_tol > 0.0)) throw InputError("grad_tol must be positive");
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(reg_init > 0.0)) throw InputError("reg_init must be positive");
  if (!(line_search_shrink > 0.0 && line_search_shrink < 1.0)) {
    throw InputError("line_search_shrink must lie in (0, 1)");
  }
}

Vector eliminated_objective_gradient(const SystemModel& model, const Plan& plan,
                                     const CostModel& costs,
                                     const WeightSchedule& weights) {
  const auto stages = expand(costs, weights, plan, false);
  return adjoint_gradient(linearize(model, plan), stages, model.input_dim());
}

SolveResult solve(const SystemModel& model, const Vector& x_init,
                  const CostModel& costs, const WeightSchedule& weights,
                  const SolverConfig& cfg,
                  const std::optional<std::vector<Vector>>& warm_start) {
  cfg.validate();
  const int horizon = weights.horizon();
  if (horizon < 1) throw InputError("horizon must be at least 1");
  if (weights.num_components() != costs.num_components()) {
    throw InputError("weight schedule has wrong number of components");
  }

  std::vector<Vector> inputs;
  if (warm_start) {
    if (static_cast<int>(warm_start->size()) != horizon) {
      throw InputError("warm start has wrong length");
    }
    inputs = *warm_start;
  } else {
    inputs.assign(horizon, Vector::Zero(model.input_dim()));
  }

  SolveResult result;
  result.plan = rollout(model, x_init, inputs);
  auto stages = expand(costs, weights, result.plan, true);
  result.objective = objective_value(stages);
  if (!std::isfinite(result.objective)) {
    throw NumericalError("initial objective is not finite");
  }
  result.objective_history.push_back(result.objective);

  double reg = cfg.reg_init;
  BackwardPass bp;
  Plan trial;
  while (true) {
    const auto lin = linearize(model, result.plan);
    const Vector grad = adjoint_gradient(lin, stages, model.input_dim());
    result.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
    if (result.grad_inf_norm <= cfg.grad_tol) {
      result.converged = true;
      result.message = "converged";
      break;
    }
    if (result.iterations >= cfg.max_iters) {
      result.message = "iteration limit reached";
      break;
    }

    bool accepted = false;
    while (!accepted && reg <= kRegMax) {
      if (!backward_pass(model, result.plan, lin, stages, reg, bp)) {
        reg *= kRegIncrease;
        continue;
      }
      for (double alpha = 1.0; alpha >= kMinStep; alpha *= cfg.line_search_shrink) {
        if (!forward_pass(model, result.plan, bp, alpha, trial)) continue;
        const double j_new = objective_only(costs, weights, trial);
        if (!std::isfinite(j_new)) continue;
        const double expected =
            -(alpha * bp.dv_linear + alpha * alpha * bp.dv_quadratic);
        const double noise = 1e-12 * std::max(1.0, std::abs(result.objective));
        const bool sufficient =
            j_new <= result.objective - kArmijo * expected && j_new < result.objective;
        // Near the optimum the predicted decrease drops below rounding noise
        // in J; trust the quadratic model there rather than shrinking alpha.
        const bool flat = expected < noise && j_new <= result.objective + noise;
        if (sufficient || flat) {
          accepted = true;
          break;
        }
      }
      if (!accepted) reg *= kRegIncrease;
    }
    if (!accepted) {
      result.message = "line search failed";
      break;
    }

    result.plan = trial;
    stages = expand(costs, weights, result.plan, true);
    result.objective = objective_value(stages);
    result.objective_history.push_back(result.objective);
    ++result.iterations;
    reg = std::max(kRegMin, reg * kRegDecrease);
  }
  return result;
}

}  // namespace ocplens
