#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ocplens/cost_library.hpp"
#include "ocplens/dynamics.hpp"
#include "ocplens/mpc_trace.hpp"
#include "ocplens/ocp_solver.hpp"
#include "ocplens/path_geometry.hpp"

namespace ocplens {

/// Lead agent travelling along the reference path.
struct LeadAgentSpec {
  double initial_arc_offset = 10.0;  // ahead of the robot's initial projection [m]
  double truth_speed = 10.0;         // [m/s], constant
  int fault_first = 0;               // faulty cycles [fault_first, fault_last]
  int fault_last = -1;               // empty window when fault_last < fault_first
  double fault_rate = 0.0;           // predicted acceleration in the window [m/s^2]
  int fault_onset_stage = 0;         // predicted stage where the deceleration starts

  void validate() const;
  bool faulty(int cycle) const { return cycle >= fault_first && cycle <= fault_last; }
};

/// Per-cycle lead-agent predictions over the planning horizon. Outside the
/// fault window the prediction extrapolates the true constant speed; inside
/// it the speed follows the fault rate from the onset stage, clamped at zero.
class PredictionModel {
 public:
  PredictionModel(LeadAgentSpec spec, std::shared_ptr<const ReferencePath> path,
                  double dt, int horizon);

  const LeadAgentSpec& spec() const { return spec_; }

  /// Prediction at cycle t given the lead's current true arc length.
  LeadAgentPrediction predict(int cycle, double current_arc) const;

 private:
  LeadAgentSpec spec_;
  std::shared_ptr<const ReferencePath> path_;
  double dt_;
  int horizon_;
};

struct MpcConfig {
  int duration = 30;  // T
  SolverConfig solver;
};

/// N inputs -> inputs 1..N-1 followed by a copy of input N-1.
std::vector<Vector> shift_warm_start(const Plan& previous);

/// Receding-horizon closed loop: at every cycle solve the OCP from the current
/// state (warm-started from the shifted previous solution), execute the first
/// input, then advance the robot and the true lead agent.
///
/// A cycle that stops short of grad_tol is kept and flagged in its record. A
/// solver exception or model blow-up ends the run; the trace then holds the
/// cycles completed so far with `complete = false` and a diagnostic.
MpcTrace run_mpc(const SystemModel& model, const Vector& x_init,
                 const CostContext& base_context, const WeightSchedule& weights,
                 const std::optional<LeadAgentSpec>& lead, const MpcConfig& cfg);

}  // namespace ocplens
