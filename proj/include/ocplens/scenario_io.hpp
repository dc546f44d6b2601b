#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "ocplens/consistency.hpp"
#include "ocplens/cost_library.hpp"
#include "ocplens/dynamics.hpp"
#include "ocplens/errors.hpp"
#include "ocplens/mpc_sim.hpp"
#include "ocplens/mpc_trace.hpp"
#include "ocplens/ocp_solver.hpp"
#include "ocplens/weight_learning.hpp"

namespace ocplens {

using Json = nlohmann::json;

/// Interface-level failure with a machine-readable code shared by the CLI and
/// the HTTP service ("invalid_input", "hash_mismatch", "empty_correction", ...).
class InterfaceError : public InputError {
 public:
  InterfaceError(std::string code, const std::string& what)
      : InputError(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline constexpr const char* kScenarioVersion = "ocplens.scenario/1";
inline constexpr const char* kCorrectionVersion = "ocplens.correction/1";
inline constexpr const char* kRequirementsVersion = "ocplens.requirements/1";
inline constexpr const char* kPlanVersion = "ocplens.plan/1";
inline constexpr const char* kTraceVersion = "ocplens.trace/1";
inline constexpr const char* kReportVersion = "ocplens.report/1";
inline constexpr const char* kWeightsVersion = "ocplens.weights/1";

/// Weights as written in a scenario: the Table-1 defaults, one value per
/// component applied at every stage, or a full (N+1) x R matrix.
struct WeightSpec {
  enum class Form { kDefault, kPerComponent, kMatrix };
  Form form = Form::kDefault;
  Vector per_component;  // kPerComponent: R entries in component order
  Matrix matrix;         // kMatrix
};

struct Scenario {
  double dt = 0.1;
  int horizon = 50;
  Vector initial_state;
  std::vector<Point2> path;
  double v_ref = 10.0;
  double d_w = 1.0;
  double o_buffer = 1.0;
  double t_h = 1.0;
  std::vector<Point2> obstacles;
  std::optional<LeadAgentSpec> lead_agent;
  std::optional<WeightSpec> weights;
  std::optional<int> mpc_duration;

  /// Unicycle model with this scenario's step.
  UnicycleModel model() const;
  /// Context without lead predictions (closed loop fills them per cycle).
  CostContext base_context() const;
  /// Context for a single open-loop solve: lead predictions, when a lead agent
  /// is present, are the cycle-0 predictions.
  CostContext open_loop_context() const;
  WeightSchedule weight_schedule() const;
};

Json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);
Scenario parse_scenario(const std::string& text);
std::string dump_scenario(const Scenario& s);
/// Hex SHA-256 of the canonical serialization.
std::string scenario_hash(const Scenario& s);

/// Annotations indexed by stage (open loop) or by cycle (closed loop).
struct CorrectionFile {
  AnalysisMode mode = AnalysisMode::kOpenLoop;
  std::vector<Annotation> annotations;
};

Json correction_to_json(const CorrectionFile& c);
CorrectionFile correction_from_json(const Json& j);
CorrectionFile parse_correction(const std::string& text);
std::string dump_correction(const CorrectionFile& c);

struct LearnerSettings {
  int max_iterations = 40;
  double margin = 1e-3;
  std::vector<std::string> components;  // active at initialization (uniform)
  bool per_component_normalization = false;
  WeightSolver solver = WeightSolver::kSimplex;
};

struct RequirementsFile {
  RequirementSpec requirements;
  LearnerSettings learner;
};

Json requirements_to_json(const RequirementsFile& r);
RequirementsFile requirements_from_json(const Json& j);
RequirementsFile parse_requirements(const std::string& text);
std::string dump_requirements(const RequirementsFile& r);

struct SolveDiagnostics {
  bool converged = false;
  int iterations = 0;
  double grad_inf_norm = 0.0;
  std::string message;
};

struct PlanDocument {
  std::string scenario_hash;
  Plan plan;
  Matrix weights;
  std::vector<std::string> components;
  double objective = 0.0;
  Matrix weighted_values;  // (N+1) x R
  SolveDiagnostics diagnostics;
};

Json plan_to_json(const PlanDocument& d);
PlanDocument plan_from_json(const Json& j);
std::string dump_plan(const PlanDocument& d);
PlanDocument parse_plan(const std::string& text);

struct TraceDocument {
  std::string scenario_hash;
  Matrix weights;
  MpcTrace trace;  // cycle contexts hold only the lead predictions
};

Json trace_to_json(const TraceDocument& d);
TraceDocument trace_from_json(const Json& j);
std::string dump_trace(const TraceDocument& d);
TraceDocument parse_trace(const std::string& text);

struct ReportDocument {
  std::string scenario_hash;
  ConsistencyReport report;
  std::vector<Annotation> annotations;
  double optimality_bound = 0.0;  // ||a||_1 ||F||_inf grad_tol (open loop)
};

Json report_to_json(const ReportDocument& d);
ReportDocument report_from_json(const Json& j);
std::string dump_report(const ReportDocument& d);
ReportDocument parse_report(const std::string& text);
/// Flat score matrix: one row per stage or cycle, one column per component.
std::string report_csv(const ReportDocument& d);

struct WeightsDocument {
  std::string scenario_hash;
  std::vector<std::string> components;
  Matrix weights;
  bool converged = false;
  std::string message;
  std::vector<LearningIteration> history;
};

Json weights_to_json(const WeightsDocument& d);
WeightsDocument weights_from_json(const Json& j);
std::string dump_weights(const WeightsDocument& d);
WeightsDocument parse_weights(const std::string& text);

/// Canonical text of a JSON value: sorted keys, two-space indent, trailing
/// newline. Every file the library writes goes through this.
std::string canonical_dump(const Json& j);
/// Parses text, mapping syntax errors to InterfaceError("invalid_input").
Json parse_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::string sha256_hex(const std::string& data);

}  // namespace ocplens
