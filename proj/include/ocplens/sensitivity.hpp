#pragma once

#include <vector>

#include "ocplens/cost_library.hpp"
#include "ocplens/dynamics.hpp"
#include "ocplens/mpc_trace.hpp"

namespace ocplens {

/// Sensitivity of the state trajectory to the input trajectory along a plan:
/// block (k, j) of F_xu is A_{k-1} ... A_{j+1} B_j for j < k and zero
/// otherwise. F stacks F_xu over the identity.
class SensitivityMatrix {
 public:
  SensitivityMatrix(Matrix f_xu, int n_x, int n_u);

  int horizon() const { return horizon_; }
  int state_dim() const { return n_x_; }
  int input_dim() const { return n_u_; }

  const Matrix& F_xu() const { return f_xu_; }
  /// [F_xu; I], ((N+1) n_x + N n_u) x (N n_u).
  Matrix F() const;

  /// F du, a plan-shaped perturbation.
  Vector apply(const Vector& du) const;
  /// F' a = F_xu' a_x + a_u.
  Vector apply_transpose(const Vector& a) const;
  /// Maximum absolute row sum of F.
  double inf_norm() const;

 private:
  Matrix f_xu_;
  int n_x_;
  int n_u_;
  int horizon_;
};

SensitivityMatrix build_F(const std::vector<Linearization>& lin, int n_x,
                          int n_u);
SensitivityMatrix build_F(const SystemModel& model, const Plan& plan);

/// Closed-loop analogue: F over the executed trajectory x_{0|0:T}, u_{0|0:T-1}.
SensitivityMatrix build_F_cl(const SystemModel& model, const MpcTrace& trace);

struct EliminatedGradient {
  int component = 0;
  int stage = 0;
  Vector grad_u;  // N n_u
};

/// Gradient over u_{0:N-1} of a stage function with state gradient gx and input
/// gradient gu at stage k: blocks j < k are B_j' A_{j+1}' ... A_{k-1}' gx,
/// block k is gu (when k < N), later blocks are zero.
Vector eliminate_stage_gradient(const std::vector<Linearization>& lin, int k,
                                const Vector& gx, const Vector& gu);

/// Eliminated gradient of the unweighted component r at stage k.
EliminatedGradient eliminated_gradient(const SystemModel& model,
                                       const Plan& plan, const CostModel& costs,
                                       int r, int k);

/// Same, reusing a linearization of the plan.
EliminatedGradient eliminated_gradient(const std::vector<Linearization>& lin,
                                       const Plan& plan, const CostModel& costs,
                                       int r, int k);

/// Per-(t, k) breakdown for component r: column k stacks, over cycles t, the
/// gradient of the unweighted stage-k cost of cycle t's plan with respect to
/// that plan's first input. Shape (T n_u) x (N+1).
Matrix closed_loop_stage_gradients(const SystemModel& model,
                                   const MpcTrace& trace, int r);

/// For each cycle t, the first-input block of sum_k w_k^{(r)} grad l~_{k|t}^{(r)},
/// stacked over t (length T n_u). Computed with one adjoint sweep per cycle.
Vector first_input_gradients(const SystemModel& model, const MpcTrace& trace,
                             int r, const WeightSchedule& weights);

}  // namespace ocplens
