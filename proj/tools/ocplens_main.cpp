// ocplens command-line tool: solve | analyze | simulate | learn | serve.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "ocplens/commands.hpp"
#include "ocplens/service.hpp"

using namespace ocplens;

namespace {

// A path as given, else relative to OCPLENS_SCENARIO_DIR (".json" optional).
std::string resolve_input(const std::string& given) {
  namespace fs = std::filesystem;
  if (fs::exists(given)) return given;
  if (const char* root = std::getenv("OCPLENS_SCENARIO_DIR")) {
    for (const std::string& name : {given, given + ".json"}) {
      const fs::path p = fs::path(root) / name;
      if (fs::exists(p)) return p.string();
    }
  }
  throw InterfaceError("invalid_input", "cannot find " + given);
}

std::string default_scenario_dir() {
  const char* root = std::getenv("OCPLENS_SCENARIO_DIR");
  return root ? root : "scenarios";
}

Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consistency analysis and weight learning for motion-planning OCPs"};
  app.require_subcommand(1);

  std::string scenario, correction, requirements, artifact, out, csv, host = "127.0.0.1";
  std::string scenario_dir = default_scenario_dir();
  SolverOverrides solver;
  int port = 8080;

  auto add_solver_flags = [&](CLI::App* sub) {
    sub->add_option("--grad-tol", solver.grad_tol, "Stop when ||dJ/du||_inf falls below this");
    sub->add_option("--max-iters", solver.max_iters, "Solver iteration limit");
  };

  auto* solve_cmd = app.add_subcommand("solve", "Solve the open-loop OCP of a scenario");
  solve_cmd->add_option("--scenario", scenario)->required();
  solve_cmd->add_option("--out", out, "Plan file")->required();
  add_solver_flags(solve_cmd);

  auto* analyze_cmd = app.add_subcommand("analyze", "Consistency report for a correction");
  analyze_cmd->add_option("--scenario", scenario)->required();
  analyze_cmd->add_option("--artifact", artifact, "Plan or trace file")->required();
  analyze_cmd->add_option("--correction", correction)->required();
  analyze_cmd->add_option("--out", out, "Report file")->required();
  analyze_cmd->add_option("--csv", csv, "Also write the score matrix as CSV");
  add_solver_flags(analyze_cmd);

  auto* simulate_cmd = app.add_subcommand("simulate", "Closed-loop receding-horizon run");
  simulate_cmd->add_option("--scenario", scenario)->required();
  simulate_cmd->add_option("--out", out, "Trace file")->required();
  add_solver_flags(simulate_cmd);

  auto* learn_cmd = app.add_subcommand("learn", "Learn stage-wise weights from requirements");
  learn_cmd->add_option("--scenario", scenario)->required();
  learn_cmd->add_option("--requirements", requirements)->required();
  learn_cmd->add_option("--out", out, "Weights file")->required();
  add_solver_flags(learn_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/JSON service");
  serve_cmd->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--scenario-dir", scenario_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (serve_cmd->parsed()) {
      Service service(scenario_dir);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving " << scenario_dir << " on " << host << ":" << port << "\n";
      const bool ok = service.listen(host, port);
      g_service = nullptr;
      if (!ok) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return kExitInput;
      }
      return kExitOk;
    }

    const Scenario s = parse_scenario(read_text_file(resolve_input(scenario)));
    const SolverConfig cfg = solver.apply();

    if (solve_cmd->parsed()) {
      const PlanDocument plan = solve_scenario(s, cfg);
      write_text_file(out, dump_plan(plan));
      std::cout << "objective " << plan.objective << ", " << plan.diagnostics.iterations << " iterations, "
                << "||grad||_inf " << plan.diagnostics.grad_inf_norm << " (" << plan.diagnostics.message << ")\n";
      return plan.diagnostics.converged ? kExitOk : kExitNotConverged;
    }
    if (analyze_cmd->parsed()) {
      const CorrectionFile corr = parse_correction(read_text_file(resolve_input(correction)));
      const Json art = parse_json(read_text_file(resolve_input(artifact)));
      const std::string version = art.is_object() && art.contains("version") && art["version"].is_string()
                                      ? art["version"].get<std::string>()
                                      : "";
      ReportDocument report;
      if (version == kPlanVersion) {
        report = analyze_plan(s, plan_from_json(art), corr, cfg);
      } else if (version == kTraceVersion) {
        report = analyze_trace(s, trace_from_json(art), corr);
      } else {
        throw InterfaceError("invalid_input", "artifact: expected a plan or trace file");
      }
      write_text_file(out, dump_report(report));
      if (!csv.empty()) write_text_file(csv, report_csv(report));
      std::cout << ranking_table(report);
      return kExitOk;
    }
    if (simulate_cmd->parsed()) {
      const TraceDocument trace = simulate_scenario(s, cfg);
      write_text_file(out, dump_trace(trace));
      int converged = 0;
      for (const auto& c : trace.trace.cycles) converged += c.converged ? 1 : 0;
      std::cout << trace.trace.duration() << " cycles, " << converged << " converged\n";
      if (!trace.trace.complete) {
        std::cerr << "error: " << trace.trace.failure << "\n";
        return kExitNotConverged;
      }
      return converged == trace.trace.duration() ? kExitOk : kExitNotConverged;
    }
    if (learn_cmd->parsed()) {
      const RequirementsFile req = parse_requirements(read_text_file(resolve_input(requirements)));
      const WeightsDocument w = learn_scenario(s, req, cfg);
      write_text_file(out, dump_weights(w));
      std::cout << w.history.size() << " iterations: " << w.message << "\n";
      return w.converged ? kExitOk : kExitNotConverged;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotConverged;
  }
  return kExitInput;
}
