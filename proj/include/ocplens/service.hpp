#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "ocplens/commands.hpp"

namespace httplib {
class Server;
}

namespace ocplens {

struct HttpResponse {
  int status = 200;
  std::string body;
};

/// JSON-over-HTTP front end. Request handling is available without a socket
/// through handle(); listen() binds it to a port.
///
/// GET  /scenarios              scenario files found in the scenario directory
/// POST /solve                  {scenario | scenario_name, solver?}
/// POST /weights                {scenario | scenario_name, weights | multipliers, solver?}
/// POST /analyze                {scenario | scenario_name, correction, plan | trace?, solver?}
/// POST /simulate, POST /learn  asynchronous; return a job id
/// GET  /jobs/{id}, GET /report/{id}
///
/// Job and report ids are digests of the request, so replaying requests
/// against a fresh service reproduces them.
class Service {
 public:
  explicit Service(std::string scenario_dir);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

  /// Blocks until stop() is called. Returns false if the port cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and serves on a background thread; returns the port.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

  /// Waits for every running job to finish.
  void wait_for_jobs();

 private:
  struct Job {
    std::string id;
    std::string kind;
    std::string scenario_hash;
    std::string status = "running";  // running | done | failed
    Json result;
    Json error;
    std::thread worker;
  };

  HttpResponse route(const std::string& method, const std::string& path, const std::string& body);
  HttpResponse get_scenarios() const;
  HttpResponse post_solve(const Json& req, bool edited_weights);
  HttpResponse post_analyze(const Json& req);
  HttpResponse post_job(const std::string& kind, const Json& req);
  HttpResponse get_job(const std::string& id);
  HttpResponse get_report(const std::string& id);

  Scenario request_scenario(const Json& req) const;
  std::string job_json(const Job& job) const;
  std::unique_ptr<httplib::Server> make_server();

  std::string scenario_dir_;
  std::mutex mutex_;  // guards jobs_ and reports_
  std::map<std::string, std::unique_ptr<Job>> jobs_;
  std::map<std::string, std::string> reports_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
};

/// {"error": {"code", "message"}} with the HTTP status for the code.
HttpResponse error_response(const std::string& code, const std::string& message);

}  // namespace ocplens
