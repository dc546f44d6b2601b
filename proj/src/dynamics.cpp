#include "ocplens/dynamics.hpp"

#include <cmath>

#include "ocplens/errors.hpp"

namespace ocplens {

Vector RobotState::to_vector() const {
  Vector x(unicycle::kStateDim);
  x << X, Y, theta, v, omega, a, alpha;
  return x;
}

RobotState RobotState::from_vector(const Vector& x) {
  if (x.size() != unicycle::kStateDim) {
    throw InputError("unicycle state must have 7 entries");
  }
  return RobotState{x[0], x[1], x[2], x[3], x[4], x[5], x[6]};
}

Vector ControlInput::to_vector() const {
  Vector u(unicycle::kInputDim);
  u << j, eta;
  return u;
}

ControlInput ControlInput::from_vector(const Vector& u) {
  if (u.size() != unicycle::kInputDim) {
    throw InputError("unicycle input must have 2 entries");
  }
  return ControlInput{u[0], u[1]};
}

UnicycleModel::UnicycleModel(double dt) : dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InputError("dt must be positive and finite");
  }
}

Vector UnicycleModel::transition(const Vector& x, const Vector& u) const {
  using namespace unicycle;
  Vector next = x;
  next[kX] += x[kV] * std::cos(x[kTheta]) * dt_;
  next[kY] += x[kV] * std::sin(x[kTheta]) * dt_;
  next[kTheta] += x[kOmega] * dt_;
  next[kV] += x[kAccel] * dt_;
  next[kOmega] += x[kAngAccel] * dt_;
  next[kAccel] += u[kJerk] * dt_;
  next[kAngAccel] += u[kAngJerk] * dt_;
  return next;
}

void UnicycleModel::jacobians(const Vector& x, const Vector& /*u*/, Matrix& A,
                              Matrix& B) const {
  using namespace unicycle;
  const double c = std::cos(x[kTheta]);
  const double s = std::sin(x[kTheta]);
  A.setIdentity(kStateDim, kStateDim);
  A(kX, kTheta) = -x[kV] * s * dt_;
  A(kX, kV) = c * dt_;
  A(kY, kTheta) = x[kV] * c * dt_;
  A(kY, kV) = s * dt_;
  A(kTheta, kOmega) = dt_;
  A(kV, kAccel) = dt_;
  A(kOmega, kAngAccel) = dt_;
  B.setZero(kStateDim, kInputDim);
  B(kAccel, kJerk) = dt_;
  B(kAngAccel, kAngJerk) = dt_;
}

void UnicycleModel::add_state_curvature(const Vector& x, const Vector& /*u*/,
                                        const Vector& lambda, Matrix& H) const {
  using namespace unicycle;
  const double c = std::cos(x[kTheta]);
  const double s = std::sin(x[kTheta]);
  const double lx = lambda[kX] * dt_;
  const double ly = lambda[kY] * dt_;
  H(kTheta, kTheta) += -x[kV] * (c * lx + s * ly);
  const double cross = -s * lx + c * ly;
  H(kTheta, kV) += cross;
  H(kV, kTheta) += cross;
}

LinearModel::LinearModel(Matrix A, Matrix B, double dt)
    : A_(std::move(A)), B_(std::move(B)), dt_(dt) {
  if (A_.rows() != A_.cols() || B_.rows() != A_.rows()) {
    throw InputError("linear model: A must be square and B must match rows");
  }
  if (!(dt > 0.0)) throw InputError("dt must be positive");
}

LinearModel LinearModel::single_integrator(double dt) {
  return LinearModel(Matrix::Identity(1, 1), Matrix::Constant(1, 1, dt), dt);
}

LinearModel LinearModel::double_integrator(double dt) {
  Matrix A(2, 2);
  A << 1.0, dt, 0.0, 1.0;
  Matrix B(2, 1);
  B << 0.0, dt;
  return LinearModel(A, B, dt);
}

Vector LinearModel::transition(const Vector& x, const Vector& u) const {
  return A_ * x + B_ * u;
}

void LinearModel::jacobians(const Vector& /*x*/, const Vector& /*u*/,
                            Matrix& A, Matrix& B) const {
  A = A_;
  B = B_;
}

Vector Plan::stacked_states() const {
  if (states.empty()) return Vector();
  const auto n = states.front().size();
  Vector out(n * static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    out.segment(static_cast<Eigen::Index>(k) * n, n) = states[k];
  }
  return out;
}

Vector Plan::stacked_inputs() const {
  if (inputs.empty()) return Vector();
  const auto m = inputs.front().size();
  Vector out(m * static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    out.segment(static_cast<Eigen::Index>(k) * m, m) = inputs[k];
  }
  return out;
}

Vector Plan::stacked() const {
  const Vector xs = stacked_states();
  const Vector us = stacked_inputs();
  Vector out(xs.size() + us.size());
  out << xs, us;
  return out;
}

Vector step(const SystemModel& model, const Vector& x, const Vector& u) {
  Vector next = model.transition(x, u);
  if (!next.allFinite()) {
    throw ModelBlowUp("non-finite state from transition", 0);
  }
  return next;
}

Plan rollout(const SystemModel& model, const Vector& x_init,
             const std::vector<Vector>& inputs) {
  if (inputs.empty()) throw InputError("rollout needs at least one input");
  if (x_init.size() != model.state_dim()) {
    throw InputError("initial state has wrong dimension");
  }
  Plan plan;
  plan.states.reserve(inputs.size() + 1);
  plan.states.push_back(x_init);
  plan.inputs = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].size() != model.input_dim()) {
      throw InputError("input has wrong dimension");
    }
    Vector next = model.transition(plan.states.back(), inputs[k]);
    if (!next.allFinite()) {
      throw ModelBlowUp("non-finite state in rollout", static_cast<int>(k) + 1);
    }
    plan.states.push_back(std::move(next));
  }
  return plan;
}

std::vector<Linearization> linearize(const SystemModel& model,
                                     const Plan& plan) {
  std::vector<Linearization> out(plan.inputs.size());
  for (std::size_t k = 0; k < plan.inputs.size(); ++k) {
    model.jacobians(plan.states[k], plan.inputs[k], out[k].A, out[k].B);
  }
  return out;
}

double dynamics_residual(const SystemModel& model, const Plan& plan) {
  double worst = 0.0;
  for (std::size_t k = 0; k < plan.inputs.size(); ++k) {
    const Vector r =
        plan.states[k + 1] - model.transition(plan.states[k], plan.inputs[k]);
    worst = std::max(worst, r.lpNorm<Eigen::Infinity>());
  }
  return worst;
}

std::vector<Vector> unstack(const Vector& stacked, int block) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(stacked.size() / block));
  for (Eigen::Index i = 0; i + block <= stacked.size(); i += block) {
    out.emplace_back(stacked.segment(i, block));
  }
  return out;
}

}  // namespace ocplens
