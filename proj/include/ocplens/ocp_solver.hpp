#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ocplens/cost_library.hpp"
#include "ocplens/dynamics.hpp"

namespace ocplens {

struct SolverConfig {
  double grad_tol = 1e-6;         // on ||dJ/du||_inf of the eliminated objective
  int max_iters = 500;
  double reg_init = 1e-3;         // initial Levenberg term on Q_uu
  double line_search_shrink = 0.5;

  /// Throws InputError when a field is out of range.
  void validate() const;
};

struct SolveResult {
  Plan plan;
  double objective = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // J after each accepted step, J_0 first
  std::string message;
};

/// Total derivative of J with respect to u_{0:N-1} (length N n_u), from one
/// backward adjoint sweep through the linearized dynamics.
Vector eliminated_objective_gradient(const SystemModel& model, const Plan& plan,
                                     const CostModel& costs,
                                     const WeightSchedule& weights);

/// Minimizes J over the input trajectory from x_init with iLQR. Stage Hessians
/// are Gauss-Newton plus the exact curvature terms each cost and the dynamics
/// expose; Q_uu gets a Levenberg term and steps go through a backtracking line
/// search. Starts from `warm_start` or the zero input trajectory.
///
/// Returns the best iterate; `converged` is set when the eliminated gradient
/// satisfies grad_tol. Throws NumericalError when the initial objective is not
/// finite.
SolveResult solve(const SystemModel& model, const Vector& x_init,
                  const CostModel& costs, const WeightSchedule& weights,
                  const SolverConfig& cfg,
                  const std::optional<std::vector<Vector>>& warm_start = std::nullopt);

}  // namespace ocplens
