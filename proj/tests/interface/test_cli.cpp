#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "ocplens/commands.hpp"
#include "support.hpp"

using namespace ocplens;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string output;  // stdout and stderr
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string("OCPLENS_SCENARIO_DIR='") + OCPLENS_TEST_SCENARIO_DIR + "' '" +
                          OCPLENS_TEST_CLI + "' " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("ocplens_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cli solve") {
  const fs::path dir = scratch_dir();
  const std::string plan = (dir / "plan.json").string();

  SUBCASE("converges with exit 0 and writes 51 states") {
    const Run r = run_cli("solve --scenario obstacle_open_loop --out " + plan);
    CHECK(r.status == kExitOk);
    const PlanDocument d = parse_plan(read_text_file(plan));
    CHECK(d.plan.states.size() == 51);
    CHECK(d.diagnostics.converged);
    CHECK(d.scenario_hash == scenario_hash(fixtures::load_scenario("obstacle_open_loop")));
  }
  SUBCASE("negative dt exits 1 naming the field") {
    Json j = fixtures::load_json("obstacle_open_loop");
    j["model"]["dt"] = -0.1;
    const std::string bad = (dir / "bad.json").string();
    write_text_file(bad, canonical_dump(j));
    const Run r = run_cli("solve --scenario " + bad + " --out " + plan);
    CHECK(r.status == kExitInput);
    CHECK(r.output.find("model.dt") != std::string::npos);
  }
  SUBCASE("forced non-convergence exits 2") {
    const Run r = run_cli("solve --scenario obstacle_open_loop --grad-tol 1e-10 --max-iters 1 --out " + plan);
    CHECK(r.status == kExitNotConverged);
    CHECK_FALSE(parse_plan(read_text_file(plan)).diagnostics.converged);
  }
  SUBCASE("missing scenario exits 1") {
    CHECK(run_cli("solve --scenario no_such_scenario --out " + plan).status == kExitInput);
  }
  SUBCASE("unknown flag exits 1") {
    CHECK(run_cli("solve --scenario obstacle_open_loop --out " + plan + " --speed 3").status == kExitInput);
  }
  fs::remove_all(dir);
}

TEST_CASE("cli analyze") {
  const fs::path dir = scratch_dir();
  const std::string plan = (dir / "plan.json").string();
  const std::string report = (dir / "report.json").string();
  REQUIRE(run_cli("solve --scenario obstacle_open_loop --out " + plan).status == 0);

  SUBCASE("open-loop report ranks OBSTACLE first") {
    const std::string csv = (dir / "report.csv").string();
    const Run r = run_cli("analyze --scenario obstacle_open_loop --artifact " + plan +
                          " --correction obstacle_plus_v --out " + report + " --csv " + csv);
    CHECK(r.status == kExitOk);
    const Json j = parse_json(read_text_file(report));
    CHECK(j.at("ranking")[0] == "OBSTACLE");
    CHECK(j.at("ranking")[8] == "REFERENCE_SPEED");
    CHECK(r.output.find("1    OBSTACLE") != std::string::npos);
    CHECK(fs::file_size(csv) > 0);
  }
  SUBCASE("hash mismatch exits 1") {
    const Run r = run_cli("analyze --scenario learn_open_loop --artifact " + plan +
                          " --correction obstacle_plus_v --out " + report);
    CHECK(r.status == kExitInput);
    CHECK(r.output.find("scenario") != std::string::npos);
  }
  SUBCASE("empty correction exits 1") {
    const std::string empty = (dir / "empty.json").string();
    write_text_file(empty, canonical_dump(Json{{"version", kCorrectionVersion},
                                               {"mode", "open-loop"},
                                               {"annotations", Json::array()}}));
    const Run r = run_cli("analyze --scenario obstacle_open_loop --artifact " + plan + " --correction " + empty +
                          " --out " + report);
    CHECK(r.status == kExitInput);
    CHECK(r.output.find("empty correction") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("cli simulate and closed-loop analyze") {
  const fs::path dir = scratch_dir();
  const std::string trace = (dir / "trace.json").string();
  const std::string report = (dir / "report.json").string();
  const Run sim = run_cli("simulate --scenario lead_fault_closed_loop --out " + trace);
  CHECK(sim.status == kExitOk);
  const TraceDocument t = parse_trace(read_text_file(trace));
  CHECK(t.trace.duration() == 30);

  const Run r = run_cli("analyze --scenario lead_fault_closed_loop --artifact " + trace +
                        " --correction lead_fault_plus_v --out " + report);
  CHECK(r.status == kExitOk);
  const Json j = parse_json(read_text_file(report));
  CHECK(j.at("mode") == "closed-loop");
  CHECK(j.at("scores").size() == 30);
  CHECK(j.at("ranking")[0] == "HEADWAY");

  // A plan-indexed correction against a trace is an input error.
  CHECK(run_cli("analyze --scenario lead_fault_closed_loop --artifact " + trace +
                " --correction obstacle_plus_v --out " + report)
            .status == kExitInput);
  fs::remove_all(dir);
}

TEST_CASE("cli learn") {
  const fs::path dir = scratch_dir();
  const std::string out = (dir / "weights.json").string();

  SUBCASE("missing requirements file exits 1") {
    const Run r = run_cli("learn --scenario learn_open_loop --requirements " + (dir / "nope.json").string() +
                          " --out " + out);
    CHECK(r.status == kExitInput);
    CHECK_FALSE(fs::exists(out));
  }
  SUBCASE("open-loop learning converges within 40 iterations") {
    const Run r = run_cli("learn --scenario learn_open_loop --requirements learn_open_loop_requirements --out " + out);
    CHECK(r.status == kExitOk);
    const WeightsDocument w = parse_weights(read_text_file(out));
    CHECK(w.converged);
    REQUIRE_FALSE(w.history.empty());
    CHECK(w.history.size() <= 40);
    CHECK(w.history.back().corrections == 0);
  }
  fs::remove_all(dir);
}
