#include "ocplens/scenario_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

namespace ocplens {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw InterfaceError("invalid_input", path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Object with exactly the listed required keys plus any of the optional ones.
void expect_object(const Json& j, const std::string& path, std::initializer_list<const char*> required,
                   std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) fail(path.empty() ? "document" : path, "expected an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!j.contains(k)) fail(join(path, k), "missing field");
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(join(path, k), "unknown field");
  }
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double positive(const Json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) fail(path, "must be positive");
  return v;
}

int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < -2147483647LL || v > 2147483647LL) fail(path, "out of range");
  return static_cast<int>(v);
}

bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

void expect_version(const Json& j, const char* version) {
  const std::string v = string(j.at("version"), "version");
  if (v != version) fail("version", "expected \"" + std::string(version) + "\", got \"" + v + "\"");
}

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

Vector vector(const Json& j, const std::string& path, int size = -1) {
  array(j, path);
  if (size >= 0 && static_cast<int>(j.size()) != size) {
    fail(path, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
  }
  Vector v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = number(j[i], index(path, i));
  return v;
}

std::vector<double> doubles(const Json& j, const std::string& path, int size = -1) {
  const Vector v = vector(j, path, size);
  return std::vector<double>(v.data(), v.data() + v.size());
}

Matrix matrix(const Json& j, const std::string& path, int rows, int cols) {
  array(j, path);
  if (rows >= 0 && static_cast<int>(j.size()) != rows) {
    fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
  }
  if (j.empty()) return Matrix(0, std::max(cols, 0));
  const int c = cols >= 0 ? cols : static_cast<int>(array(j[0], index(path, 0)).size());
  Matrix M(static_cast<int>(j.size()), c);
  for (std::size_t i = 0; i < j.size(); ++i) M.row(static_cast<int>(i)) = vector(j[i], index(path, i), c);
  return M;
}

std::vector<Vector> rows(const Json& j, const std::string& path, int cols) {
  const Matrix M = matrix(j, path, -1, cols);
  std::vector<Vector> out;
  for (int i = 0; i < M.rows(); ++i) out.push_back(M.row(i).transpose());
  return out;
}

Point2 point(const Json& j, const std::string& path) {
  const Vector v = vector(j, path, 2);
  return Point2(v[0], v[1]);
}

std::vector<Point2> points(const Json& j, const std::string& path) {
  array(j, path);
  std::vector<Point2> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point(j[i], index(path, i)));
  return out;
}

std::vector<std::string> strings(const Json& j, const std::string& path) {
  array(j, path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(string(j[i], index(path, i)));
  return out;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const Matrix& M) {
  Json a = Json::array();
  for (int i = 0; i < M.rows(); ++i) a.push_back(to_json(Vector(M.row(i).transpose())));
  return a;
}

Json to_json(const std::vector<Vector>& vs) {
  Json a = Json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

Json to_json(const Point2& p) { return Json::array({p.x(), p.y()}); }

Json to_json(const std::vector<Point2>& ps) {
  Json a = Json::array();
  for (const auto& p : ps) a.push_back(to_json(p));
  return a;
}

std::vector<std::string> component_names() {
  std::vector<std::string> out;
  for (auto id : kAllComponents) out.emplace_back(component_name(id));
  return out;
}

int component_column(const std::string& name, const std::string& path) {
  try {
    return static_cast<int>(parse_component_id(name));
  } catch (const InputError&) {
    fail(path, "unknown component \"" + name + "\"");
  }
}

Json annotation_to_json(const Annotation& a, const char* index_key) {
  return Json{{index_key, a.stage},
              {"dimension", std::string(dimension_name(a.dimension))},
              {"sign", static_cast<int>(a.value)}};
}

Annotation annotation_from_json(const Json& j, const std::string& path, const char* index_key) {
  expect_object(j, path, {index_key, "dimension", "sign"});
  Annotation a;
  a.stage = integer(j.at(index_key), join(path, index_key));
  if (a.stage < 0) fail(join(path, index_key), "must be nonnegative");
  try {
    a.dimension = parse_dimension(string(j.at("dimension"), join(path, "dimension")));
  } catch (const InterfaceError&) {
    throw;
  } catch (const InputError& e) {
    fail(join(path, "dimension"), e.what());
  }
  const int sign = integer(j.at("sign"), join(path, "sign"));
  if (sign != 1 && sign != -1) fail(join(path, "sign"), "must be +1 or -1");
  a.value = sign;
  return a;
}

Json status_to_json(const RequirementStatus& s) {
  return Json{{"speed_error", s.speed_error},
              {"path_error", s.path_error},
              {"headway_error", s.headway_error},
              {"violations", s.violations}};
}

RequirementStatus status_from_json(const Json& j, const std::string& path) {
  expect_object(j, path, {"speed_error", "path_error", "headway_error", "violations"});
  RequirementStatus s;
  s.speed_error = number(j.at("speed_error"), join(path, "speed_error"));
  s.path_error = number(j.at("path_error"), join(path, "path_error"));
  s.headway_error = number(j.at("headway_error"), join(path, "headway_error"));
  s.violations = integer(j.at("violations"), join(path, "violations"));
  return s;
}

void check_hash(const std::string& h, const std::string& path) {
  const bool hex = h.size() == 64 && std::all_of(h.begin(), h.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
  if (!hex) fail(path, "expected a 64-digit lowercase hex SHA-256 digest");
}

}  // namespace

// ---------------------------------------------------------------- utilities

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InterfaceError("invalid_input", std::string("malformed JSON: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InterfaceError("invalid_input", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InterfaceError("invalid_input", "cannot write " + path);
  out << text;
  if (!out) throw InterfaceError("invalid_input", "failed writing " + path);
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) {
    ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return ss.str();
}

// ----------------------------------------------------------------- scenario

UnicycleModel Scenario::model() const { return UnicycleModel(dt); }

CostContext Scenario::base_context() const {
  CostContext ctx;
  ctx.path = std::make_shared<ReferencePath>(path);
  ctx.v_ref = v_ref;
  ctx.d_w = d_w;
  ctx.o_buffer = o_buffer;
  ctx.t_h = t_h;
  ctx.obstacles = obstacles;
  return ctx;
}

CostContext Scenario::open_loop_context() const {
  CostContext ctx = base_context();
  if (lead_agent) {
    const PredictionModel predictor(*lead_agent, ctx.path, dt, horizon);
    const Point2 p0(initial_state[unicycle::kX], initial_state[unicycle::kY]);
    const double arc = ctx.path->project(p0).arc_length + lead_agent->initial_arc_offset;
    ctx.lead = predictor.predict(0, arc);
  }
  return ctx;
}

WeightSchedule Scenario::weight_schedule() const {
  if (!weights || weights->form == WeightSpec::Form::kDefault) {
    // Table-1 weights; without a lead agent the prediction-based terms are off.
    WeightSchedule w = default_weights(horizon);
    if (!lead_agent) {
      for (int k = 0; k <= horizon; ++k) {
        w.set(k, static_cast<int>(CostComponentId::kHeadway), 0.0);
        w.set(k, static_cast<int>(CostComponentId::kRelativeSpeed), 0.0);
      }
    }
    return w;
  }
  if (weights->form == WeightSpec::Form::kPerComponent) {
    return WeightSchedule::stage_uniform(horizon, weights->per_component);
  }
  return WeightSchedule(weights->matrix);
}

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["version"] = kScenarioVersion;
  j["model"] = Json{{"dt", s.dt}, {"horizon", s.horizon}};
  j["initial_state"] = to_json(s.initial_state);
  j["path"] = to_json(s.path);
  j["context"] = Json{{"v_ref", s.v_ref}, {"d_w", s.d_w}, {"o_buffer", s.o_buffer}, {"t_h", s.t_h}};
  j["obstacles"] = to_json(s.obstacles);
  if (s.lead_agent) {
    const auto& l = *s.lead_agent;
    j["lead_agent"] = Json{{"initial_arc_offset", l.initial_arc_offset},
                           {"truth_speed", l.truth_speed},
                           {"fault_window", Json::array({l.fault_first, l.fault_last})},
                           {"fault_rate", l.fault_rate},
                           {"fault_onset_stage", l.fault_onset_stage}};
  }
  if (s.weights) {
    switch (s.weights->form) {
      case WeightSpec::Form::kDefault: j["weights"] = "default"; break;
      case WeightSpec::Form::kPerComponent: {
        Json per = Json::object();
        const auto names = component_names();
        for (int r = 0; r < kNumComponents; ++r) per[names[r]] = s.weights->per_component[r];
        j["weights"] = Json{{"per_component", per}};
        break;
      }
      case WeightSpec::Form::kMatrix: j["weights"] = to_json(s.weights->matrix); break;
    }
  }
  if (s.mpc_duration) j["mpc"] = Json{{"T", *s.mpc_duration}};
  return j;
}

Scenario scenario_from_json(const Json& j) {
  expect_object(j, "", {"version", "model", "initial_state", "path", "context", "obstacles"},
                {"lead_agent", "weights", "mpc"});
  expect_version(j, kScenarioVersion);
  Scenario s;
  const Json& m = j.at("model");
  expect_object(m, "model", {"dt", "horizon"});
  s.dt = positive(m.at("dt"), "model.dt");
  s.horizon = integer(m.at("horizon"), "model.horizon");
  if (s.horizon < 1) fail("model.horizon", "must be at least 1");
  s.initial_state = vector(j.at("initial_state"), "initial_state", unicycle::kStateDim);
  s.path = points(j.at("path"), "path");
  if (s.path.size() < 2) fail("path", "needs at least two waypoints");
  try {
    ReferencePath check(s.path);
  } catch (const InputError& e) {
    fail("path", e.what());
  }
  const Json& c = j.at("context");
  expect_object(c, "context", {"v_ref", "d_w", "o_buffer", "t_h"});
  s.v_ref = positive(c.at("v_ref"), "context.v_ref");
  s.d_w = positive(c.at("d_w"), "context.d_w");
  s.o_buffer = positive(c.at("o_buffer"), "context.o_buffer");
  s.t_h = positive(c.at("t_h"), "context.t_h");
  s.obstacles = points(j.at("obstacles"), "obstacles");

  if (j.contains("lead_agent")) {
    const Json& l = j.at("lead_agent");
    expect_object(l, "lead_agent",
                  {"initial_arc_offset", "truth_speed", "fault_window", "fault_rate", "fault_onset_stage"});
    LeadAgentSpec spec;
    spec.initial_arc_offset = number(l.at("initial_arc_offset"), "lead_agent.initial_arc_offset");
    spec.truth_speed = number(l.at("truth_speed"), "lead_agent.truth_speed");
    if (spec.truth_speed < 0.0) fail("lead_agent.truth_speed", "must be nonnegative");
    const Json& w = array(l.at("fault_window"), "lead_agent.fault_window");
    if (w.size() != 2) fail("lead_agent.fault_window", "expected [first_cycle, last_cycle]");
    spec.fault_first = integer(w[0], "lead_agent.fault_window[0]");
    spec.fault_last = integer(w[1], "lead_agent.fault_window[1]");
    if (spec.fault_first < 0) fail("lead_agent.fault_window[0]", "must be nonnegative");
    if (spec.fault_last < spec.fault_first - 1) {
      fail("lead_agent.fault_window", "last cycle precedes first (use last = first - 1 for none)");
    }
    spec.fault_rate = number(l.at("fault_rate"), "lead_agent.fault_rate");
    spec.fault_onset_stage = integer(l.at("fault_onset_stage"), "lead_agent.fault_onset_stage");
    if (spec.fault_onset_stage < 0) fail("lead_agent.fault_onset_stage", "must be nonnegative");
    s.lead_agent = spec;
  }

  if (j.contains("weights")) {
    const Json& w = j.at("weights");
    WeightSpec spec;
    if (w.is_string()) {
      if (w.get<std::string>() != "default") fail("weights", "expected \"default\", an object or a matrix");
    } else if (w.is_object()) {
      expect_object(w, "weights", {"per_component"});
      const Json& per = w.at("per_component");
      const auto names = component_names();
      if (!per.is_object()) fail("weights.per_component", "expected an object");
      spec.form = WeightSpec::Form::kPerComponent;
      spec.per_component = Vector::Zero(kNumComponents);
      for (const auto& [k, v] : per.items()) {
        const int r = component_column(k, "weights.per_component." + k);
        spec.per_component[r] = number(v, "weights.per_component." + k);
      }
      for (int r = 0; r < kNumComponents; ++r) {
        if (!per.contains(names[r])) fail("weights.per_component." + names[r], "missing field");
        if (spec.per_component[r] < 0.0) fail("weights.per_component." + names[r], "must be nonnegative");
      }
    } else {
      spec.form = WeightSpec::Form::kMatrix;
      spec.matrix = matrix(w, "weights", s.horizon + 1, kNumComponents);
      if ((spec.matrix.array() < 0.0).any()) fail("weights", "entries must be nonnegative");
    }
    s.weights = spec;
  }

  if (j.contains("mpc")) {
    expect_object(j.at("mpc"), "mpc", {"T"});
    const int T = integer(j.at("mpc").at("T"), "mpc.T");
    if (T < 1) fail("mpc.T", "must be at least 1");
    s.mpc_duration = T;
  }

  // Components that need a lead agent cannot carry weight without one.
  if (!s.lead_agent) {
    const Matrix W = s.weight_schedule().matrix();
    for (auto id : {CostComponentId::kHeadway, CostComponentId::kRelativeSpeed}) {
      if (W.col(static_cast<int>(id)).maxCoeff() > 0.0) {
        fail("weights", std::string(component_name(id)) + " has nonzero weight but no lead_agent is given");
      }
    }
  }
  return s;
}

Scenario parse_scenario(const std::string& text) { return scenario_from_json(parse_json(text)); }

std::string dump_scenario(const Scenario& s) { return canonical_dump(scenario_to_json(s)); }

std::string scenario_hash(const Scenario& s) { return sha256_hex(dump_scenario(s)); }

// --------------------------------------------------------------- correction

Json correction_to_json(const CorrectionFile& c) {
  const char* key = c.mode == AnalysisMode::kClosedLoop ? "cycle" : "stage";
  Json a = Json::array();
  for (const auto& ann : c.annotations) a.push_back(annotation_to_json(ann, key));
  return Json{{"version", kCorrectionVersion}, {"mode", std::string(mode_name(c.mode))}, {"annotations", a}};
}

CorrectionFile correction_from_json(const Json& j) {
  expect_object(j, "", {"version", "annotations"}, {"mode"});
  expect_version(j, kCorrectionVersion);
  const Json& list = array(j.at("annotations"), "annotations");
  CorrectionFile c;
  // Mode follows the index key of the annotations unless stated explicitly.
  bool by_cycle = !list.empty() && list[0].is_object() && list[0].contains("cycle");
  if (j.contains("mode")) {
    try {
      c.mode = parse_mode(string(j.at("mode"), "mode"));
    } catch (const InterfaceError&) {
      throw;
    } catch (const InputError& e) {
      fail("mode", e.what());
    }
    by_cycle = c.mode == AnalysisMode::kClosedLoop;
  } else {
    c.mode = by_cycle ? AnalysisMode::kClosedLoop : AnalysisMode::kOpenLoop;
  }
  const char* key = by_cycle ? "cycle" : "stage";
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Annotation a = annotation_from_json(list[i], index("annotations", i), key);
    if (!seen.insert({a.stage, static_cast<int>(a.dimension)}).second) {
      fail(index("annotations", i), "duplicate annotation for this index and dimension");
    }
    c.annotations.push_back(a);
  }
  return c;
}

CorrectionFile parse_correction(const std::string& text) { return correction_from_json(parse_json(text)); }

std::string dump_correction(const CorrectionFile& c) { return canonical_dump(correction_to_json(c)); }

// ------------------------------------------------------------- requirements

Json requirements_to_json(const RequirementsFile& r) {
  Json j;
  j["version"] = kRequirementsVersion;
  const auto& q = r.requirements;
  if (q.speed) {
    j["speed"] = Json{{"target", q.speed->target},
                      {"tolerance", q.speed->tolerance},
                      {"first_stage", q.speed->first_stage},
                      {"last_stage", q.speed->last_stage}};
  }
  if (q.path) {
    j["path"] = Json{{"tolerance", q.path->tolerance},
                     {"first_stage", q.path->first_stage},
                     {"last_stage", q.path->last_stage}};
  }
  if (q.headway_tolerance) j["headway"] = Json{{"tolerance", *q.headway_tolerance}};
  const auto& l = r.learner;
  j["learner"] = Json{{"max_iterations", l.max_iterations},
                      {"margin", l.margin},
                      {"components", l.components},
                      {"per_component_normalization", l.per_component_normalization},
                      {"solver", std::string(weight_solver_name(l.solver))}};
  return j;
}

RequirementsFile requirements_from_json(const Json& j) {
  expect_object(j, "", {"version", "learner"}, {"speed", "path", "headway"});
  expect_version(j, kRequirementsVersion);
  RequirementsFile r;
  if (j.contains("speed")) {
    const Json& s = j.at("speed");
    expect_object(s, "speed", {"target", "tolerance"}, {"first_stage", "last_stage"});
    SpeedBand b;
    b.target = number(s.at("target"), "speed.target");
    b.tolerance = positive(s.at("tolerance"), "speed.tolerance");
    if (s.contains("first_stage")) b.first_stage = integer(s.at("first_stage"), "speed.first_stage");
    if (s.contains("last_stage")) b.last_stage = integer(s.at("last_stage"), "speed.last_stage");
    r.requirements.speed = b;
  }
  if (j.contains("path")) {
    const Json& p = j.at("path");
    expect_object(p, "path", {"tolerance"}, {"first_stage", "last_stage"});
    PathBand b;
    b.tolerance = positive(p.at("tolerance"), "path.tolerance");
    if (p.contains("first_stage")) b.first_stage = integer(p.at("first_stage"), "path.first_stage");
    if (p.contains("last_stage")) b.last_stage = integer(p.at("last_stage"), "path.last_stage");
    r.requirements.path = b;
  }
  if (j.contains("headway")) {
    expect_object(j.at("headway"), "headway", {"tolerance"});
    r.requirements.headway_tolerance = positive(j.at("headway").at("tolerance"), "headway.tolerance");
  }
  if (!r.requirements.speed && !r.requirements.path && !r.requirements.headway_tolerance) {
    fail("document", "at least one of speed, path, headway is required");
  }
  try {
    r.requirements.validate();
  } catch (const InputError& e) {
    fail("document", e.what());
  }

  const Json& l = j.at("learner");
  expect_object(l, "learner", {"components"},
                {"max_iterations", "margin", "per_component_normalization", "solver"});
  if (l.contains("max_iterations")) {
    r.learner.max_iterations = integer(l.at("max_iterations"), "learner.max_iterations");
    if (r.learner.max_iterations < 1) fail("learner.max_iterations", "must be at least 1");
  }
  if (l.contains("margin")) r.learner.margin = positive(l.at("margin"), "learner.margin");
  r.learner.components = strings(l.at("components"), "learner.components");
  if (r.learner.components.empty()) fail("learner.components", "must list at least one component");
  std::set<int> seen;
  for (std::size_t i = 0; i < r.learner.components.size(); ++i) {
    const int col = component_column(r.learner.components[i], index("learner.components", i));
    if (!seen.insert(col).second) fail(index("learner.components", i), "duplicate component");
  }
  if (l.contains("per_component_normalization")) {
    r.learner.per_component_normalization =
        boolean(l.at("per_component_normalization"), "learner.per_component_normalization");
  }
  if (l.contains("solver")) {
    try {
      r.learner.solver = parse_weight_solver(string(l.at("solver"), "learner.solver"));
    } catch (const InterfaceError&) {
      throw;
    } catch (const InputError& e) {
      fail("learner.solver", e.what());
    }
  }
  return r;
}

RequirementsFile parse_requirements(const std::string& text) {
  return requirements_from_json(parse_json(text));
}

std::string dump_requirements(const RequirementsFile& r) {
  return canonical_dump(requirements_to_json(r));
}

// --------------------------------------------------------------------- plan

Json plan_to_json(const PlanDocument& d) {
  return Json{{"version", kPlanVersion},
              {"scenario_hash", d.scenario_hash},
              {"states", to_json(d.plan.states)},
              {"inputs", to_json(d.plan.inputs)},
              {"weights", to_json(d.weights)},
              {"components", d.components},
              {"objective", Json{{"total", d.objective}, {"weighted_values", to_json(d.weighted_values)}}},
              {"diagnostics", Json{{"converged", d.diagnostics.converged},
                                   {"iterations", d.diagnostics.iterations},
                                   {"grad_inf_norm", d.diagnostics.grad_inf_norm},
                                   {"message", d.diagnostics.message}}}};
}

PlanDocument plan_from_json(const Json& j) {
  expect_object(j, "", {"version", "scenario_hash", "states", "inputs", "weights", "components", "objective",
                        "diagnostics"});
  expect_version(j, kPlanVersion);
  PlanDocument d;
  d.scenario_hash = string(j.at("scenario_hash"), "scenario_hash");
  check_hash(d.scenario_hash, "scenario_hash");
  d.plan.states = rows(j.at("states"), "states", unicycle::kStateDim);
  d.plan.inputs = rows(j.at("inputs"), "inputs", unicycle::kInputDim);
  const int N = d.plan.horizon();
  if (N < 1 || static_cast<int>(d.plan.states.size()) != N + 1) {
    fail("states", "expected one more state than inputs");
  }
  d.components = strings(j.at("components"), "components");
  if (static_cast<int>(d.components.size()) != kNumComponents) fail("components", "expected 9 names");
  d.weights = matrix(j.at("weights"), "weights", N + 1, kNumComponents);
  const Json& o = j.at("objective");
  expect_object(o, "objective", {"total", "weighted_values"});
  d.objective = number(o.at("total"), "objective.total");
  d.weighted_values = matrix(o.at("weighted_values"), "objective.weighted_values", N + 1, kNumComponents);
  const Json& g = j.at("diagnostics");
  expect_object(g, "diagnostics", {"converged", "iterations", "grad_inf_norm", "message"});
  d.diagnostics.converged = boolean(g.at("converged"), "diagnostics.converged");
  d.diagnostics.iterations = integer(g.at("iterations"), "diagnostics.iterations");
  d.diagnostics.grad_inf_norm = number(g.at("grad_inf_norm"), "diagnostics.grad_inf_norm");
  d.diagnostics.message = string(g.at("message"), "diagnostics.message");
  return d;
}

std::string dump_plan(const PlanDocument& d) { return canonical_dump(plan_to_json(d)); }

PlanDocument parse_plan(const std::string& text) { return plan_from_json(parse_json(text)); }

// -------------------------------------------------------------------- trace

Json trace_to_json(const TraceDocument& d) {
  const MpcTrace& t = d.trace;
  Json cycles = Json::array();
  for (const auto& c : t.cycles) {
    Json cj{{"states", to_json(c.plan.states)},
            {"inputs", to_json(c.plan.inputs)},
            {"solver_iterations", c.solver_iterations},
            {"converged", c.converged},
            {"grad_inf_norm", c.grad_inf_norm}};
    if (c.context.lead) {
      cj["lead_prediction"] = Json{{"arc_lengths", c.context.lead->arc_lengths},
                                   {"speeds", c.context.lead->speeds},
                                   {"positions", to_json(c.context.lead->positions)}};
    }
    cycles.push_back(cj);
  }
  return Json{{"version", kTraceVersion},
              {"scenario_hash", d.scenario_hash},
              {"weights", to_json(d.weights)},
              {"closed_loop_states", to_json(t.closed_loop_states)},
              {"executed_inputs", to_json(t.executed_inputs)},
              {"lead_arc", t.lead_arc},
              {"lead_speed", t.lead_speed},
              {"complete", t.complete},
              {"failure", t.failure},
              {"cycles", cycles}};
}

TraceDocument trace_from_json(const Json& j) {
  expect_object(j, "", {"version", "scenario_hash", "weights", "closed_loop_states", "executed_inputs",
                        "lead_arc", "lead_speed", "complete", "failure", "cycles"});
  expect_version(j, kTraceVersion);
  TraceDocument d;
  d.scenario_hash = string(j.at("scenario_hash"), "scenario_hash");
  check_hash(d.scenario_hash, "scenario_hash");
  MpcTrace& t = d.trace;
  t.closed_loop_states = rows(j.at("closed_loop_states"), "closed_loop_states", unicycle::kStateDim);
  t.executed_inputs = rows(j.at("executed_inputs"), "executed_inputs", unicycle::kInputDim);
  const int T = t.duration();
  if (static_cast<int>(t.closed_loop_states.size()) != T + 1) {
    fail("closed_loop_states", "expected one more state than executed inputs");
  }
  t.lead_arc = doubles(j.at("lead_arc"), "lead_arc");
  t.lead_speed = doubles(j.at("lead_speed"), "lead_speed");
  if (!t.lead_arc.empty() && static_cast<int>(t.lead_arc.size()) != T + 1) fail("lead_arc", "expected T + 1 entries");
  if (t.lead_speed.size() != t.lead_arc.size()) fail("lead_speed", "must match lead_arc in length");
  t.complete = boolean(j.at("complete"), "complete");
  t.failure = string(j.at("failure"), "failure");
  const Json& cycles = array(j.at("cycles"), "cycles");
  if (static_cast<int>(cycles.size()) != T) fail("cycles", "expected one record per executed input");
  int N = -1;
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    const std::string p = index("cycles", i);
    const Json& cj = cycles[i];
    expect_object(cj, p, {"states", "inputs", "solver_iterations", "converged", "grad_inf_norm"},
                  {"lead_prediction"});
    CycleRecord c;
    c.plan.states = rows(cj.at("states"), join(p, "states"), unicycle::kStateDim);
    c.plan.inputs = rows(cj.at("inputs"), join(p, "inputs"), unicycle::kInputDim);
    if (N < 0) N = c.plan.horizon();
    if (c.plan.horizon() != N || N < 1 || static_cast<int>(c.plan.states.size()) != N + 1) {
      fail(p, "plan shape differs from the first cycle");
    }
    c.solver_iterations = integer(cj.at("solver_iterations"), join(p, "solver_iterations"));
    c.converged = boolean(cj.at("converged"), join(p, "converged"));
    c.grad_inf_norm = number(cj.at("grad_inf_norm"), join(p, "grad_inf_norm"));
    if (cj.contains("lead_prediction")) {
      const std::string lp = join(p, "lead_prediction");
      const Json& l = cj.at("lead_prediction");
      expect_object(l, lp, {"arc_lengths", "speeds", "positions"});
      LeadAgentPrediction pred;
      pred.arc_lengths = doubles(l.at("arc_lengths"), join(lp, "arc_lengths"), N + 1);
      pred.speeds = doubles(l.at("speeds"), join(lp, "speeds"), N + 1);
      pred.positions = points(l.at("positions"), join(lp, "positions"));
      if (static_cast<int>(pred.positions.size()) != N + 1) fail(join(lp, "positions"), "expected N + 1 points");
      c.context.lead = pred;
    }
    t.cycles.push_back(std::move(c));
  }
  d.weights = matrix(j.at("weights"), "weights", N < 0 ? -1 : N + 1, kNumComponents);
  return d;
}

std::string dump_trace(const TraceDocument& d) { return canonical_dump(trace_to_json(d)); }

TraceDocument parse_trace(const std::string& text) { return trace_from_json(parse_json(text)); }

// ------------------------------------------------------------------- report

Json report_to_json(const ReportDocument& d) {
  const ConsistencyReport& r = d.report;
  const char* key = r.mode == AnalysisMode::kClosedLoop ? "cycle" : "stage";
  Json ann = Json::array();
  for (const auto& a : d.annotations) ann.push_back(annotation_to_json(a, key));
  Json ranking = Json::array();
  for (int c : r.ranking) ranking.push_back(r.components.at(c));
  return Json{{"version", kReportVersion},
              {"scenario_hash", d.scenario_hash},
              {"mode", std::string(mode_name(r.mode))},
              {"components", r.components},
              {"annotations", ann},
              {"scores", to_json(r.scores)},
              {"totals", to_json(r.totals)},
              {"ranking", ranking},
              {"cost_magnitudes", to_json(r.cost_magnitudes)},
              {"diagnostics", Json{{"solver_grad_norm", r.solver_grad_norm},
                                   {"correction_l1", r.correction_l1},
                                   {"sensitivity_inf_norm", r.sensitivity_inf_norm},
                                   {"score_sum", r.score_sum()},
                                   {"optimality_bound", d.optimality_bound}}}};
}

ReportDocument report_from_json(const Json& j) {
  expect_object(j, "", {"version", "scenario_hash", "mode", "components", "annotations", "scores", "totals",
                        "ranking", "cost_magnitudes", "diagnostics"});
  expect_version(j, kReportVersion);
  ReportDocument d;
  d.scenario_hash = string(j.at("scenario_hash"), "scenario_hash");
  check_hash(d.scenario_hash, "scenario_hash");
  ConsistencyReport& r = d.report;
  try {
    r.mode = parse_mode(string(j.at("mode"), "mode"));
  } catch (const InterfaceError&) {
    throw;
  } catch (const InputError& e) {
    fail("mode", e.what());
  }
  r.components = strings(j.at("components"), "components");
  const int R = static_cast<int>(r.components.size());
  if (R < 1) fail("components", "must not be empty");
  const char* key = r.mode == AnalysisMode::kClosedLoop ? "cycle" : "stage";
  const Json& ann = array(j.at("annotations"), "annotations");
  for (std::size_t i = 0; i < ann.size(); ++i) {
    d.annotations.push_back(annotation_from_json(ann[i], index("annotations", i), key));
  }
  r.scores = matrix(j.at("scores"), "scores", -1, R);
  r.totals = vector(j.at("totals"), "totals", R);
  r.cost_magnitudes = matrix(j.at("cost_magnitudes"), "cost_magnitudes", static_cast<int>(r.scores.rows()), R);
  const auto names = strings(j.at("ranking"), "ranking");
  if (static_cast<int>(names.size()) != R) fail("ranking", "expected one entry per component");
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto it = std::find(r.components.begin(), r.components.end(), names[i]);
    if (it == r.components.end()) fail(index("ranking", i), "not a listed component");
    r.ranking.push_back(static_cast<int>(it - r.components.begin()));
  }
  const Json& g = j.at("diagnostics");
  expect_object(g, "diagnostics",
                {"solver_grad_norm", "correction_l1", "sensitivity_inf_norm", "score_sum", "optimality_bound"});
  r.solver_grad_norm = number(g.at("solver_grad_norm"), "diagnostics.solver_grad_norm");
  r.correction_l1 = number(g.at("correction_l1"), "diagnostics.correction_l1");
  r.sensitivity_inf_norm = number(g.at("sensitivity_inf_norm"), "diagnostics.sensitivity_inf_norm");
  d.optimality_bound = number(g.at("optimality_bound"), "diagnostics.optimality_bound");
  const double sum = number(g.at("score_sum"), "diagnostics.score_sum");
  if (sum != r.score_sum()) fail("diagnostics.score_sum", "does not match the score matrix");
  return d;
}

std::string dump_report(const ReportDocument& d) { return canonical_dump(report_to_json(d)); }

ReportDocument parse_report(const std::string& text) { return report_from_json(parse_json(text)); }

std::string report_csv(const ReportDocument& d) {
  const ConsistencyReport& r = d.report;
  std::ostringstream out;
  out << std::setprecision(17);
  out << (r.mode == AnalysisMode::kClosedLoop ? "cycle" : "stage");
  for (const auto& c : r.components) out << ',' << c;
  out << '\n';
  for (int i = 0; i < r.scores.rows(); ++i) {
    out << i;
    for (int c = 0; c < r.scores.cols(); ++c) out << ',' << r.scores(i, c);
    out << '\n';
  }
  return out.str();
}

// ------------------------------------------------------------------ weights

Json weights_to_json(const WeightsDocument& d) {
  Json history = Json::array();
  for (const auto& h : d.history) {
    history.push_back(Json{{"iteration", h.iteration},
                           {"weights", to_json(h.weights)},
                           {"corrections", h.corrections},
                           {"dataset_size", h.dataset_size},
                           {"status", status_to_json(h.status)},
                           {"lp_objective", h.lp_objective},
                           {"trajectory_converged", h.trajectory_converged}});
  }
  return Json{{"version", kWeightsVersion},
              {"scenario_hash", d.scenario_hash},
              {"components", d.components},
              {"weights", to_json(d.weights)},
              {"converged", d.converged},
              {"message", d.message},
              {"history", history}};
}

WeightsDocument weights_from_json(const Json& j) {
  expect_object(j, "", {"version", "scenario_hash", "components", "weights", "converged", "message", "history"});
  expect_version(j, kWeightsVersion);
  WeightsDocument d;
  d.scenario_hash = string(j.at("scenario_hash"), "scenario_hash");
  check_hash(d.scenario_hash, "scenario_hash");
  d.components = strings(j.at("components"), "components");
  const int R = static_cast<int>(d.components.size());
  d.weights = matrix(j.at("weights"), "weights", -1, R);
  if ((d.weights.array() < 0.0).any()) fail("weights", "entries must be nonnegative");
  d.converged = boolean(j.at("converged"), "converged");
  d.message = string(j.at("message"), "message");
  const Json& hist = array(j.at("history"), "history");
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const std::string p = index("history", i);
    const Json& h = hist[i];
    expect_object(h, p, {"iteration", "weights", "corrections", "dataset_size", "status", "lp_objective",
                         "trajectory_converged"});
    LearningIteration it;
    it.iteration = integer(h.at("iteration"), join(p, "iteration"));
    it.weights = matrix(h.at("weights"), join(p, "weights"), static_cast<int>(d.weights.rows()), R);
    it.corrections = integer(h.at("corrections"), join(p, "corrections"));
    it.dataset_size = integer(h.at("dataset_size"), join(p, "dataset_size"));
    it.status = status_from_json(h.at("status"), join(p, "status"));
    it.lp_objective = number(h.at("lp_objective"), join(p, "lp_objective"));
    it.trajectory_converged = boolean(h.at("trajectory_converged"), join(p, "trajectory_converged"));
    d.history.push_back(std::move(it));
  }
  return d;
}

std::string dump_weights(const WeightsDocument& d) { return canonical_dump(weights_to_json(d)); }

WeightsDocument parse_weights(const std::string& text) { return weights_from_json(parse_json(text)); }

}  // namespace ocplens
