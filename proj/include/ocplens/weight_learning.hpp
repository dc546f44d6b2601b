#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ocplens/consistency.hpp"
#include "ocplens/cost_library.hpp"
#include "ocplens/lp_simplex.hpp"
#include "ocplens/mpc_sim.hpp"
#include "ocplens/ocp_solver.hpp"

namespace ocplens {

/// One (trajectory, correction) pair with its coefficients
/// c_{k,r} = <a, F grad l~_k^{(r)}>, (N+1) x R.
struct CorrectionSample {
  std::string trajectory_id;
  DirectionalCorrection correction;
  Matrix coefficients;
};

/// min_w sum_j sum_{k,r} max(m + c_{j,k,r} w_k^{(r)}, 0)
///   s.t. w >= 0, 1'w = N+1, w_{k+1}^{(r)} <= w_k^{(r)}.
/// Entries whose initial weight is zero stay at zero. With
/// per_component_normalization every component with free entries sums to N+1
/// instead of the whole schedule.
struct LearningProblem {
  std::vector<CorrectionSample> samples;
  double margin = 1e-3;
  int horizon = 0;
  int components = 0;
  Matrix initial;  // (N+1) x R, nonnegative and nonincreasing in k
  bool per_component_normalization = false;

  double normalization_total() const { return horizon + 1.0; }
  /// Throws InputError on shape, sign or finiteness problems.
  void validate() const;
};

double hinge_objective(const LearningProblem& problem, const Matrix& w);

/// Largest violation of w >= 0, the normalization rows and monotonicity.
double constraint_residual(const LearningProblem& problem, const Matrix& w);

enum class WeightSolver { kSimplex, kEpigraph, kSubgradient };
std::string weight_solver_name(WeightSolver s);
WeightSolver parse_weight_solver(const std::string& name);

struct WeightSolveOptions {
  WeightSolver method = WeightSolver::kSimplex;
  /// Among optimal schedules, minimize the largest ratio to the initial
  /// weights, so entries the data does not constrain keep their share.
  bool tie_break = true;
  int subgradient_iterations = 200000;
  LpOptions lp;
};

struct WeightSolveResult {
  Matrix weights;
  double objective = 0.0;
  bool optimal = false;
  int iterations = 0;
  std::string message;
};

/// kSimplex solves the piecewise-linear objective as a bounded LP with one
/// column per linear segment of each entry's hinge sum. kEpigraph builds the
/// textbook LP with one epigraph variable per hinge term (small problems
/// only). kSubgradient runs projected subgradient descent with a Polyak
/// target level. Failures are reported through `optimal` and `message`
/// together with the last iterate.
WeightSolveResult solve_weight_lp(const LearningProblem& problem,
                                  const WeightSolveOptions& opts = {});

struct SpeedBand {
  double target = 10.0;
  double tolerance = 0.25;
  int first_stage = 1;
  int last_stage = -1;  // -1: through the terminal stage

  bool covers(int k, int horizon) const;
};

/// Lateral distance to the reference path [m] over a stage range.
struct PathBand {
  double tolerance = 0.25;
  int first_stage = 1;
  int last_stage = -1;

  bool covers(int k, int horizon) const;
};

struct RequirementSpec {
  std::optional<SpeedBand> speed;
  std::optional<PathBand> path;
  std::optional<double> headway_tolerance;  // closed-loop headway error [m]

  void validate() const;
};

/// Largest deviations over the stages the requirements cover (stage 0 is the
/// fixed initial state and never counts).
struct RequirementStatus {
  double speed_error = 0.0;
  double path_error = 0.0;
  double headway_error = 0.0;
  int violations = 0;  // violating (stage, requirement) pairs
};

RequirementStatus evaluate_requirements(const Plan& plan, const CostContext& ctx,
                                        const RequirementSpec& req);

/// e_t = (lead arc - robot arc) - t_h v_t for t = 0..T; positive when the
/// robot trails further back than the desired headway.
std::vector<double> headway_errors(const MpcTrace& trace, const CostContext& ctx);

RequirementStatus evaluate_requirements(const MpcTrace& trace, const CostContext& ctx,
                                        const RequirementSpec& req);

/// Open loop: one correction per violated requirement. Speed: +-1 on V at
/// each violating stage, toward the band. Path: the unit vector from the
/// position toward its projection on (X, Y) at each violating stage.
std::vector<DirectionalCorrection> generate_corrections(const Plan& plan,
                                                        const CostContext& ctx,
                                                        const RequirementSpec& req);

/// Closed loop: at each cycle whose true headway error exceeds the band, the
/// unit path tangent on (X, Y), forward when the robot trails too far.
std::vector<DirectionalCorrection> generate_corrections(const MpcTrace& trace,
                                                        const CostContext& ctx,
                                                        const RequirementSpec& req);

struct LearnerConfig {
  int max_iterations = 40;  // K
  double margin = 1e-3;
  WeightSchedule initial_weights;
  bool per_component_normalization = false;
  WeightSolveOptions solver;

  void validate() const;
};

/// Uniform schedule over the listed components with total N+1; the others are
/// zero.
WeightSchedule uniform_initial_weights(int horizon, const std::vector<int>& components);

struct LearningIteration {
  int iteration = 0;
  Matrix weights;  // schedule the trajectory was computed with
  int corrections = 0;
  int dataset_size = 0;
  RequirementStatus status;
  double lp_objective = 0.0;  // after this iteration's update; 0 when none ran
  bool trajectory_converged = false;
};

struct LearningResult {
  WeightSchedule weights;
  std::vector<LearningIteration> history;
  std::vector<CorrectionSample> dataset;
  bool converged = false;  // an iteration produced no corrections
  std::string message;
};

/// Alternates solve -> derive corrections -> append to the dataset -> re-fit
/// the weights until a trajectory needs no correction or K updates have run.
/// Solver exceptions end the run with the history so far and a message.
LearningResult run_algorithm1_open_loop(const SystemModel& model, const Vector& x_init,
                                        const CostContext& ctx, const RequirementSpec& req,
                                        const SolverConfig& solver, const LearnerConfig& cfg);

LearningResult run_algorithm1_closed_loop(const SystemModel& model, const Vector& x_init,
                                          const CostContext& ctx, const LeadAgentSpec& lead,
                                          const MpcConfig& mpc, const RequirementSpec& req,
                                          const LearnerConfig& cfg);

}  // namespace ocplens
