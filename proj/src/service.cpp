#include "ocplens/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <vector>

namespace ocplens {

namespace {

int status_for(const std::string& code) {
  if (code == "not_found") return 404;
  if (code == "method_not_allowed") return 405;
  if (code == "hash_mismatch" || code == "conflict") return 409;
  if (code == "numerical_error") return 422;
  if (code == "internal") return 500;
  return 400;
}

void check_keys(const Json& req, std::initializer_list<const char*> allowed) {
  if (!req.is_object()) throw InterfaceError("invalid_input", "request body: expected a JSON object");
  for (const auto& [k, v] : req.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw InterfaceError("invalid_input", k + ": unknown field");
  }
}

std::string request_id(const std::string& kind, const Json& req) {
  return sha256_hex(kind + "\n" + canonical_dump(req)).substr(0, 16);
}

SolverConfig request_solver(const Json& req) {
  SolverOverrides o;
  if (req.contains("solver")) {
    const Json& s = req.at("solver");
    check_keys(s, {"grad_tol", "max_iters"});
    if (s.contains("grad_tol")) {
      if (!s.at("grad_tol").is_number()) throw InterfaceError("invalid_input", "solver.grad_tol: expected a number");
      o.grad_tol = s.at("grad_tol").get<double>();
    }
    if (s.contains("max_iters")) {
      if (!s.at("max_iters").is_number_integer()) {
        throw InterfaceError("invalid_input", "solver.max_iters: expected an integer");
      }
      o.max_iters = s.at("max_iters").get<int>();
    }
  }
  return o.apply();
}

Json diagnostics_json(const SolveDiagnostics& d) {
  return Json{{"converged", d.converged},
              {"iterations", d.iterations},
              {"grad_inf_norm", d.grad_inf_norm},
              {"message", d.message}};
}

Json trace_diagnostics(const MpcTrace& t) {
  int converged = 0;
  for (const auto& c : t.cycles) converged += c.converged ? 1 : 0;
  return Json{{"complete", t.complete},
              {"failure", t.failure},
              {"cycles", t.duration()},
              {"converged_cycles", converged}};
}

bool safe_name(const std::string& name) {
  if (name.empty() || name.size() > 128) return false;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return name.find("..") == std::string::npos;
}

}  // namespace

HttpResponse error_response(const std::string& code, const std::string& message) {
  return {status_for(code), canonical_dump(Json{{"error", Json{{"code", code}, {"message", message}}}})};
}

Service::Service(std::string scenario_dir) : scenario_dir_(std::move(scenario_dir)) {}

Service::~Service() {
  stop();
  wait_for_jobs();
}

void Service::wait_for_jobs() {
  std::vector<std::thread*> workers;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& [id, job] : jobs_) workers.push_back(&job->worker);
  }
  for (auto* w : workers) {
    if (w->joinable()) w->join();
  }
}

HttpResponse Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    return route(method, path, body);
  } catch (const InterfaceError& e) {
    return error_response(e.code(), e.what());
  } catch (const InputError& e) {
    return error_response("invalid_input", e.what());
  } catch (const Error& e) {
    return error_response("numerical_error", e.what());
  } catch (const std::exception& e) {
    return error_response("internal", e.what());
  }
}

HttpResponse Service::route(const std::string& method, const std::string& path, const std::string& body) {
  auto tail = [&](const std::string& prefix) -> std::optional<std::string> {
    if (path.rfind(prefix, 0) != 0 || path.size() == prefix.size()) return std::nullopt;
    return path.substr(prefix.size());
  };
  if (method == "GET") {
    if (path == "/scenarios") return get_scenarios();
    if (auto id = tail("/jobs/")) return get_job(*id);
    if (auto id = tail("/report/")) return get_report(*id);
  } else if (method == "POST") {
    if (path == "/solve") return post_solve(parse_json(body), false);
    if (path == "/weights") return post_solve(parse_json(body), true);
    if (path == "/analyze") return post_analyze(parse_json(body));
    if (path == "/simulate") return post_job("simulate", parse_json(body));
    if (path == "/learn") return post_job("learn", parse_json(body));
  }
  const bool known = path == "/scenarios" || path == "/solve" || path == "/weights" || path == "/analyze" ||
                     path == "/simulate" || path == "/learn" || tail("/jobs/") || tail("/report/");
  if (known) return error_response("method_not_allowed", method + " " + path);
  return error_response("not_found", "no route for " + method + " " + path);
}

Scenario Service::request_scenario(const Json& req) const {
  const bool inline_s = req.contains("scenario");
  const bool named = req.contains("scenario_name");
  if (inline_s == named) {
    throw InterfaceError("invalid_input", "give exactly one of scenario, scenario_name");
  }
  if (inline_s) return scenario_from_json(req.at("scenario"));
  if (!req.at("scenario_name").is_string()) {
    throw InterfaceError("invalid_input", "scenario_name: expected a string");
  }
  const std::string name = req.at("scenario_name").get<std::string>();
  if (!safe_name(name)) throw InterfaceError("invalid_input", "scenario_name: invalid name");
  const auto file = std::filesystem::path(scenario_dir_) / (name + ".json");
  if (!std::filesystem::exists(file)) throw InterfaceError("not_found", "scenario " + name + " not found");
  return parse_scenario(read_text_file(file.string()));
}

HttpResponse Service::get_scenarios() const {
  Json list = Json::array();
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(scenario_dir_)) {
    for (const auto& e : std::filesystem::directory_iterator(scenario_dir_)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    // The directory also holds corrections and requirements; list scenarios only.
    try {
      const Scenario s = parse_scenario(read_text_file(f.string()));
      list.push_back(Json{{"name", f.stem().string()},
                          {"scenario_hash", scenario_hash(s)},
                          {"horizon", s.horizon},
                          {"lead_agent", s.lead_agent.has_value()}});
    } catch (const InputError&) {
    }
  }
  return {200, canonical_dump(Json{{"scenarios", list}})};
}

HttpResponse Service::post_solve(const Json& req, bool edited_weights) {
  if (edited_weights) {
    check_keys(req, {"scenario", "scenario_name", "weights", "multipliers", "solver"});
  } else {
    check_keys(req, {"scenario", "scenario_name", "solver"});
  }
  const Scenario s = request_scenario(req);
  const SolverConfig cfg = request_solver(req);
  std::optional<Matrix> weights;
  if (edited_weights) {
    const bool has_w = req.contains("weights"), has_m = req.contains("multipliers");
    if (has_w == has_m) throw InterfaceError("invalid_input", "give exactly one of weights, multipliers");
    if (has_m) {
      const Json& m = req.at("multipliers");
      if (!m.is_object()) throw InterfaceError("invalid_input", "multipliers: expected an object");
      std::map<std::string, double> mult;
      for (const auto& [k, v] : m.items()) {
        if (!v.is_number()) throw InterfaceError("invalid_input", "multipliers." + k + ": expected a number");
        mult[k] = v.get<double>();
      }
      weights = scaled_weights(s, mult);
    } else {
      // Reuse the strict scenario reader for the matrix shape and sign checks.
      Json probe = scenario_to_json(s);
      probe["weights"] = req.at("weights");
      weights = scenario_from_json(probe).weight_schedule().matrix();
    }
  }
  const PlanDocument plan = solve_scenario(s, cfg, weights);
  return {200, canonical_dump(Json{{"scenario_hash", plan.scenario_hash},
                                   {"diagnostics", diagnostics_json(plan.diagnostics)},
                                   {"plan", plan_to_json(plan)}})};
}

HttpResponse Service::post_analyze(const Json& req) {
  check_keys(req, {"scenario", "scenario_name", "correction", "plan", "trace", "solver"});
  const Scenario s = request_scenario(req);
  const SolverConfig cfg = request_solver(req);
  if (!req.contains("correction")) throw InterfaceError("invalid_input", "correction: missing field");
  const CorrectionFile corr = correction_from_json(req.at("correction"));
  if (req.contains("plan") && req.contains("trace")) {
    throw InterfaceError("invalid_input", "give at most one of plan, trace");
  }
  ReportDocument report;
  if (corr.mode == AnalysisMode::kClosedLoop) {
    if (req.contains("plan")) throw InterfaceError("mode_mismatch", "a plan needs a stage-indexed correction");
    const TraceDocument trace =
        req.contains("trace") ? trace_from_json(req.at("trace")) : simulate_scenario(s, cfg);
    report = analyze_trace(s, trace, corr);
  } else {
    if (req.contains("trace")) throw InterfaceError("mode_mismatch", "a trace needs a cycle-indexed correction");
    const PlanDocument plan = req.contains("plan") ? plan_from_json(req.at("plan")) : solve_scenario(s, cfg);
    report = analyze_plan(s, plan, corr, cfg);
  }
  const std::string id = request_id("analyze", req);
  const std::string text = dump_report(report);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    reports_[id] = text;
  }
  const Json rj = report_to_json(report);
  return {200, canonical_dump(Json{{"scenario_hash", report.scenario_hash},
                                   {"report_id", id},
                                   {"diagnostics", rj.at("diagnostics")},
                                   {"report", rj}})};
}

std::string Service::job_json(const Job& job) const {
  Json j{{"job_id", job.id}, {"kind", job.kind}, {"status", job.status}, {"scenario_hash", job.scenario_hash}};
  if (job.status == "done") j["result"] = job.result;
  if (job.status == "failed") j["error"] = job.error;
  return canonical_dump(j);
}

HttpResponse Service::post_job(const std::string& kind, const Json& req) {
  if (kind == "learn") {
    check_keys(req, {"scenario", "scenario_name", "requirements", "solver"});
  } else {
    check_keys(req, {"scenario", "scenario_name", "solver"});
  }
  const Scenario s = request_scenario(req);
  const SolverConfig cfg = request_solver(req);
  std::optional<RequirementsFile> reqs;
  if (kind == "learn") {
    if (!req.contains("requirements")) throw InterfaceError("invalid_input", "requirements: missing field");
    reqs = requirements_from_json(req.at("requirements"));
  }
  const std::string hash = scenario_hash(s);
  const std::string id = request_id(kind, req);

  std::lock_guard<std::mutex> lock(mutex_);
  if (auto it = jobs_.find(id); it != jobs_.end()) return {200, job_json(*it->second)};
  if (kind == "learn") {
    for (const auto& [other, job] : jobs_) {
      if (job->kind == "learn" && job->scenario_hash == hash && job->status == "running") {
        return error_response("conflict", "learn job " + other + " is still running for this scenario");
      }
    }
  }
  auto job = std::make_unique<Job>();
  job->id = id;
  job->kind = kind;
  job->scenario_hash = hash;
  Job* raw = job.get();
  const std::string accepted = [&] {
    Json j{{"job_id", id}, {"kind", kind}, {"status", "running"}, {"scenario_hash", hash}};
    return canonical_dump(j);
  }();
  jobs_[id] = std::move(job);
  raw->worker = std::thread([this, raw, s, cfg, reqs, kind] {
    Json result, error;
    std::string status = "done";
    try {
      if (kind == "learn") {
        const WeightsDocument d = learn_scenario(s, *reqs, cfg);
        result = weights_to_json(d);
      } else {
        const TraceDocument d = simulate_scenario(s, cfg);
        result = Json{{"diagnostics", trace_diagnostics(d.trace)}, {"trace", trace_to_json(d)}};
      }
    } catch (const InterfaceError& e) {
      status = "failed";
      error = Json{{"code", e.code()}, {"message", e.what()}};
    } catch (const InputError& e) {
      status = "failed";
      error = Json{{"code", "invalid_input"}, {"message", e.what()}};
    } catch (const std::exception& e) {
      status = "failed";
      error = Json{{"code", "numerical_error"}, {"message", e.what()}};
    }
    std::lock_guard<std::mutex> guard(mutex_);
    raw->result = std::move(result);
    raw->error = std::move(error);
    raw->status = status;
  });
  return {202, accepted};
}

HttpResponse Service::get_job(const std::string& id) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return error_response("not_found", "unknown job " + id);
  return {200, job_json(*it->second)};
}

HttpResponse Service::get_report(const std::string& id) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = reports_.find(id);
  if (it == reports_.end()) return error_response("not_found", "unknown report " + id);
  return {200, it->second};
}

std::unique_ptr<httplib::Server> Service::make_server() {
  auto server = std::make_unique<httplib::Server>();
  auto forward = [this](const httplib::Request& rq, httplib::Response& rs) {
    const HttpResponse r = handle(rq.method, rq.path, rq.body);
    rs.status = r.status;
    rs.set_content(r.body, "application/json");
  };
  server->Get(".*", forward);
  server->Post(".*", forward);
  server->Put(".*", forward);
  server->Delete(".*", forward);
  return server;
}

bool Service::listen(const std::string& host, int port) {
  server_ = make_server();
  return server_->listen(host, port);
}

int Service::start_background(const std::string& host) {
  server_ = make_server();
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw Error("cannot bind a port on " + host);
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace ocplens
