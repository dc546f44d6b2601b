#pragma once

#include <string>
#include <vector>

#include "ocplens/cost_library.hpp"
#include "ocplens/dynamics.hpp"

namespace ocplens {

/// One receding-horizon cycle: the full open-loop plan solved at time t and
/// the context (including lead predictions) it was solved with.
struct CycleRecord {
  Plan plan;
  CostContext context;
  int solver_iterations = 0;
  bool converged = false;
  double grad_inf_norm = 0.0;
};

/// Closed-loop execution x_{0|0:T}, u_{0|0:T-1} plus every cycle's plan.
struct MpcTrace {
  std::vector<Vector> closed_loop_states;  // T + 1
  std::vector<Vector> executed_inputs;     // T
  std::vector<CycleRecord> cycles;         // T
  std::vector<double> lead_arc;            // true lead arc length, T + 1 (empty without lead)
  std::vector<double> lead_speed;          // true lead speed, T + 1
  bool complete = true;
  std::string failure;

  int duration() const { return static_cast<int>(executed_inputs.size()); }

  /// The closed-loop trajectory viewed as a plan with horizon T.
  Plan closed_loop_plan() const { return Plan{closed_loop_states, executed_inputs}; }
};

}  // namespace ocplens
