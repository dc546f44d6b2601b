#pragma once

#include <map>
#include <optional>
#include <string>

#include "ocplens/scenario_io.hpp"

namespace ocplens {

/// Solver overrides shared by the CLI flags and request bodies.
struct SolverOverrides {
  std::optional<double> grad_tol;
  std::optional<int> max_iters;

  SolverConfig apply(SolverConfig base = {}) const;
};

/// Open-loop solve of the scenario, optionally with an explicit weight matrix
/// in place of the scenario weights.
PlanDocument solve_scenario(const Scenario& s, const SolverConfig& cfg,
                            const std::optional<Matrix>& weights = std::nullopt);

/// Scenario weights with each component scaled by its multiplier (missing
/// components keep factor 1). Throws on unknown names or negative factors.
Matrix scaled_weights(const Scenario& s, const std::map<std::string, double>& multipliers);

/// Receding-horizon run over mpc.T cycles (30 when the scenario omits it).
TraceDocument simulate_scenario(const Scenario& s, const SolverConfig& cfg);

/// Consistency report for a stage-indexed correction on a solved plan. The
/// plan must carry the scenario's hash.
ReportDocument analyze_plan(const Scenario& s, const PlanDocument& plan,
                            const CorrectionFile& correction, const SolverConfig& cfg);

/// Closed-loop report for a cycle-indexed correction on a trace.
ReportDocument analyze_trace(const Scenario& s, const TraceDocument& trace,
                             const CorrectionFile& correction);

/// Algorithm 1: closed loop when the requirements include a headway band,
/// open loop otherwise.
WeightsDocument learn_scenario(const Scenario& s, const RequirementsFile& req,
                               const SolverConfig& cfg);

/// Ranking table, most inconsistent component first.
std::string ranking_table(const ReportDocument& report);

/// CLI exit codes: 0 success, 1 input error, 2 did not converge.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNotConverged = 2;

}  // namespace ocplens
