#include "ocplens/sensitivity.hpp"

#include "ocplens/errors.hpp"

namespace ocplens {

SensitivityMatrix::SensitivityMatrix(Matrix f_xu, int n_x, int n_u)
    : f_xu_(std::move(f_xu)), n_x_(n_x), n_u_(n_u) {
  if (n_x < 1 || n_u < 1 || f_xu_.cols() % n_u != 0) {
    throw InputError("sensitivity matrix has inconsistent dimensions");
  }
  horizon_ = static_cast<int>(f_xu_.cols() / n_u);
  if (f_xu_.rows() != static_cast<Eigen::Index>(horizon_ + 1) * n_x) {
    throw InputError("sensitivity matrix has inconsistent dimensions");
  }
}

Matrix SensitivityMatrix::F() const {
  const Eigen::Index nu_total = f_xu_.cols();
  Matrix out(f_xu_.rows() + nu_total, nu_total);
  out.topRows(f_xu_.rows()) = f_xu_;
  out.bottomRows(nu_total).setIdentity();
  return out;
}

Vector SensitivityMatrix::apply(const Vector& du) const {
  if (du.size() != f_xu_.cols()) throw InputError("input perturbation has wrong size");
  Vector out(f_xu_.rows() + du.size());
  out.head(f_xu_.rows()) = f_xu_ * du;
  out.tail(du.size()) = du;
  return out;
}

Vector SensitivityMatrix::apply_transpose(const Vector& a) const {
  if (a.size() != f_xu_.rows() + f_xu_.cols()) {
    throw InputError("plan-space vector has wrong size");
  }
  return f_xu_.transpose() * a.head(f_xu_.rows()) + a.tail(f_xu_.cols());
}

double SensitivityMatrix::inf_norm() const {
  // Identity rows contribute a row sum of exactly one.
  const double xu = f_xu_.rows() > 0 ? f_xu_.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  return std::max(xu, 1.0);
}

SensitivityMatrix build_F(const std::vector<Linearization>& lin, int n_x,
                          int n_u) {
  const int horizon = static_cast<int>(lin.size());
  Matrix f_xu = Matrix::Zero(static_cast<Eigen::Index>(horizon + 1) * n_x,
                             static_cast<Eigen::Index>(horizon) * n_u);
  for (int j = 0; j < horizon; ++j) {
    Matrix block = lin[j].B;
    f_xu.block((j + 1) * n_x, j * n_u, n_x, n_u) = block;
    for (int k = j + 2; k <= horizon; ++k) {
      block = lin[k - 1].A * block;
      f_xu.block(k * n_x, j * n_u, n_x, n_u) = block;
    }
  }
  return SensitivityMatrix(std::move(f_xu), n_x, n_u);
}

SensitivityMatrix build_F(const SystemModel& model, const Plan& plan) {
  return build_F(linearize(model, plan), model.state_dim(), model.input_dim());
}

SensitivityMatrix build_F_cl(const SystemModel& model, const MpcTrace& trace) {
  if (trace.duration() < 1) throw InputError("closed-loop trace is empty");
  return build_F(model, trace.closed_loop_plan());
}

Vector eliminate_stage_gradient(const std::vector<Linearization>& lin, int k,
                                const Vector& gx, const Vector& gu) {
  const int horizon = static_cast<int>(lin.size());
  if (k < 0 || k > horizon) throw InputError("stage index out of range");
  const int n_u = static_cast<int>(lin.empty() ? gu.size() : lin.front().B.cols());
  Vector out = Vector::Zero(static_cast<Eigen::Index>(horizon) * n_u);
  if (k < horizon) out.segment(k * n_u, n_u) = gu;
  Vector lambda = gx;
  for (int j = k - 1; j >= 0; --j) {
    out.segment(j * n_u, n_u) = lin[j].B.transpose() * lambda;
    if (j > 0) lambda = lin[j].A.transpose() * lambda;
  }
  return out;
}

EliminatedGradient eliminated_gradient(const std::vector<Linearization>& lin,
                                       const Plan& plan, const CostModel& costs,
                                       int r, int k) {
  const int horizon = plan.horizon();
  if (r < 0 || r >= costs.num_components()) {
    throw InputError("component index out of range");
  }
  if (k < 0 || k > horizon) throw InputError("stage index out of range");
  const Vector u = k < horizon ? plan.inputs[k] : Vector::Zero(costs.input_dim());
  StageDerivatives d;
  costs.evaluate(r, k, horizon, plan.states[k], u, false, d);
  return EliminatedGradient{r, k, eliminate_stage_gradient(lin, k, d.grad_x, d.grad_u)};
}

EliminatedGradient eliminated_gradient(const SystemModel& model,
                                       const Plan& plan, const CostModel& costs,
                                       int r, int k) {
  return eliminated_gradient(linearize(model, plan), plan, costs, r, k);
}

Matrix closed_loop_stage_gradients(const SystemModel& model,
                                   const MpcTrace& trace, int r) {
  const int T = trace.duration();
  if (T < 1) throw InputError("closed-loop trace is empty");
  const int n_u = model.input_dim();
  const int horizon = trace.cycles.front().plan.horizon();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(T) * n_u, horizon + 1);

  StageDerivatives d;
  for (int t = 0; t < T; ++t) {
    const CycleRecord& cycle = trace.cycles[t];
    if (cycle.plan.horizon() != horizon) {
      throw InputError("cycle plans have inconsistent horizons");
    }
    const PlannerCostModel costs(cycle.context);
    if (r < 0 || r >= costs.num_components()) {
      throw InputError("component index out of range");
    }
    const auto lin = linearize(model, cycle.plan);
    // Column block 0 of F_xu for this plan, advanced one stage at a time.
    Matrix sens = lin[0].B;
    for (int k = 0; k <= horizon; ++k) {
      const Vector u =
          k < horizon ? cycle.plan.inputs[k] : Vector::Zero(n_u);
      costs.evaluate(r, k, horizon, cycle.plan.states[k], u, false, d);
      if (k == 0) {
        out.block(t * n_u, 0, n_u, 1) = d.grad_u;
        continue;
      }
      out.block(t * n_u, k, n_u, 1) = sens.transpose() * d.grad_x;
      if (k < horizon) sens = lin[k].A * sens;
    }
  }
  return out;
}

Vector first_input_gradients(const SystemModel& model, const MpcTrace& trace,
                             int r, const WeightSchedule& weights) {
  const int T = trace.duration();
  if (T < 1) throw InputError("closed-loop trace is empty");
  const int n_u = model.input_dim();
  Vector out(static_cast<Eigen::Index>(T) * n_u);

  StageDerivatives d;
  for (int t = 0; t < T; ++t) {
    const CycleRecord& cycle = trace.cycles[t];
    const int horizon = cycle.plan.horizon();
    if (weights.horizon() != horizon) {
      throw InputError("weight schedule horizon does not match the trace");
    }
    const PlannerCostModel costs(cycle.context);
    if (r < 0 || r >= costs.num_components()) {
      throw InputError("component index out of range");
    }
    const auto lin = linearize(model, cycle.plan);
    Vector lambda = Vector::Zero(model.state_dim());
    for (int k = horizon; k >= 1; --k) {
      const Vector u =
          k < horizon ? cycle.plan.inputs[k] : Vector::Zero(n_u);
      costs.evaluate(r, k, horizon, cycle.plan.states[k], u, false, d);
      if (k < horizon) lambda = lin[k].A.transpose() * lambda;
      lambda += weights(k, r) * d.grad_x;
    }
    costs.evaluate(r, 0, horizon, cycle.plan.states[0], cycle.plan.inputs[0],
                   false, d);
    out.segment(t * n_u, n_u) = weights(0, r) * d.grad_u + lin[0].B.transpose() * lambda;
  }
  return out;
}

}  // namespace ocplens
