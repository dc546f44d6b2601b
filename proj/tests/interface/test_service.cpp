#include <doctest.h>

#include <chrono>
#include <thread>

#include "ocplens/service.hpp"
#include "support.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines _res as a macro.
#include <httplib.h>

using namespace ocplens;

namespace {

Json body_of(const HttpResponse& r) { return parse_json(r.body); }

Json analyze_request() {
  return Json{{"scenario_name", "obstacle_open_loop"}, {"correction", fixtures::load_json("obstacle_plus_v")}};
}

Json poll(Service& svc, const std::string& id) {
  for (int i = 0; i < 6000; ++i) {
    const HttpResponse r = svc.handle("GET", "/jobs/" + id, "");
    REQUIRE(r.status == 200);
    const Json j = body_of(r);
    if (j.at("status") != "running") return j;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  FAIL("job " << id << " did not finish");
  return {};
}

}  // namespace

TEST_CASE("service over a socket") {
  Service svc(OCPLENS_TEST_SCENARIO_DIR);
  const int port = svc.start_background();
  httplib::Client cli("127.0.0.1", port);

  SUBCASE("analyze ranks OBSTACLE first") {
    auto res = cli.Post("/analyze", canonical_dump(analyze_request()), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const Json j = parse_json(res->body);
    CHECK(j.at("report").at("ranking")[0] == "OBSTACLE");
    CHECK(j.at("scenario_hash") == scenario_hash(fixtures::load_scenario("obstacle_open_loop")));
    CHECK(j.at("diagnostics").contains("solver_grad_norm"));

    auto rep = cli.Get("/report/" + j.at("report_id").get<std::string>());
    REQUIRE(rep);
    CHECK(rep->status == 200);
    CHECK(rep->body == canonical_dump(j.at("report")));
  }
  SUBCASE("malformed solve body is a 400 with a field diagnostic") {
    auto res = cli.Post("/solve", "{\"scenario_name\": 3}", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    const Json e = parse_json(res->body).at("error");
    CHECK(e.at("code") == "invalid_input");
    CHECK(e.at("message").get<std::string>().find("scenario_name") != std::string::npos);

    res = cli.Post("/solve", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
  }
  SUBCASE("unknown job is a 404") {
    auto res = cli.Get("/jobs/0123456789abcdef");
    REQUIRE(res);
    CHECK(res->status == 404);
    CHECK(parse_json(res->body).at("error").at("code") == "not_found");
  }
  SUBCASE("unknown route and wrong method") {
    auto res = cli.Get("/nowhere");
    REQUIRE(res);
    CHECK(res->status == 404);
    res = cli.Get("/solve");
    REQUIRE(res);
    CHECK(res->status == 405);
  }
  svc.stop();
}

TEST_CASE("scenario listing skips non-scenario files") {
  Service svc(OCPLENS_TEST_SCENARIO_DIR);
  const HttpResponse r = svc.handle("GET", "/scenarios", "");
  REQUIRE(r.status == 200);
  std::vector<std::string> names;
  const Json listing = body_of(r);
  for (const auto& s : listing.at("scenarios")) names.push_back(s.at("name").get<std::string>());
  CHECK(std::find(names.begin(), names.end(), "obstacle_open_loop") != names.end());
  CHECK(std::find(names.begin(), names.end(), "lead_fault_closed_loop") != names.end());
  CHECK(std::find(names.begin(), names.end(), "obstacle_plus_v") == names.end());
}

TEST_CASE("solve and weights responses") {
  Service svc(OCPLENS_TEST_SCENARIO_DIR);
  const HttpResponse solved = svc.handle("POST", "/solve", R"({"scenario_name": "obstacle_open_loop"})");
  REQUIRE(solved.status == 200);
  const Json s = body_of(solved);
  CHECK(s.at("diagnostics").at("converged") == true);
  CHECK(s.at("plan").at("scenario_hash") == s.at("scenario_hash"));

  // Inline scenario gives the same plan as the named one.
  const Json inline_req{{"scenario", fixtures::load_json("obstacle_open_loop")}};
  CHECK(svc.handle("POST", "/solve", canonical_dump(inline_req)).body == solved.body);

  const HttpResponse zeroed = svc.handle(
      "POST", "/weights", R"({"scenario_name": "obstacle_open_loop", "multipliers": {"OBSTACLE": 0}})");
  REQUIRE(zeroed.status == 200);
  const Json z = body_of(zeroed);
  const double v_active = s.at("plan").at("states")[10][3];
  const double v_free = z.at("plan").at("states")[10][3];
  CHECK(v_free > v_active + 0.5);

  CHECK(svc.handle("POST", "/weights", R"({"scenario_name": "obstacle_open_loop", "multipliers": {"WIND": 0}})")
            .status == 400);
  CHECK(svc.handle("POST", "/weights", R"({"scenario_name": "obstacle_open_loop"})").status == 400);
  CHECK(svc.handle("POST", "/solve", R"({"scenario_name": "../etc/passwd"})").status == 400);
  CHECK(svc.handle("POST", "/solve", R"({"scenario_name": "missing"})").status == 404);
}

TEST_CASE("analyze with a supplied plan from another scenario is a conflict") {
  Service svc(OCPLENS_TEST_SCENARIO_DIR);
  const Json plan = body_of(svc.handle("POST", "/solve", R"({"scenario_name": "learn_open_loop"})")).at("plan");
  Json req = analyze_request();
  req["plan"] = plan;
  const HttpResponse r = svc.handle("POST", "/analyze", canonical_dump(req));
  CHECK(r.status == 409);
  CHECK(body_of(r).at("error").at("code") == "hash_mismatch");

  Json empty = analyze_request();
  empty["correction"]["annotations"] = Json::array();
  const HttpResponse e = svc.handle("POST", "/analyze", canonical_dump(empty));
  CHECK(e.status == 400);
  CHECK(body_of(e).at("error").at("code") == "empty_correction");
}

TEST_CASE("simulate job and closed-loop analysis") {
  Service svc(OCPLENS_TEST_SCENARIO_DIR);
  const std::string req = R"({"scenario_name": "lead_fault_closed_loop"})";
  const HttpResponse accepted = svc.handle("POST", "/simulate", req);
  REQUIRE(accepted.status == 202);
  const std::string id = body_of(accepted).at("job_id");
  const Json done = poll(svc, id);
  REQUIRE(done.at("status") == "done");
  CHECK(done.at("result").at("diagnostics").at("cycles") == 30);

  // Resubmitting returns the existing job.
  const HttpResponse again = svc.handle("POST", "/simulate", req);
  CHECK(again.status == 200);
  CHECK(body_of(again).at("job_id") == id);

  Json areq{{"scenario_name", "lead_fault_closed_loop"},
            {"correction", fixtures::load_json("lead_fault_plus_v")},
            {"trace", done.at("result").at("trace")}};
  const HttpResponse r = svc.handle("POST", "/analyze", canonical_dump(areq));
  REQUIRE(r.status == 200);
  CHECK(body_of(r).at("report").at("mode") == "closed-loop");
  CHECK(body_of(r).at("report").at("ranking")[0] == "HEADWAY");
}

TEST_CASE("learn jobs: one per scenario at a time") {
  Service svc(OCPLENS_TEST_SCENARIO_DIR);
  Json req{{"scenario_name", "learn_open_loop"}, {"requirements", fixtures::load_json("learn_open_loop_requirements")}};
  const HttpResponse first = svc.handle("POST", "/learn", canonical_dump(req));
  REQUIRE(first.status == 202);

  // A different learn request on the same scenario while the first runs.
  Json other = req;
  other["requirements"]["learner"]["margin"] = 0.002;
  const HttpResponse second = svc.handle("POST", "/learn", canonical_dump(other));
  const Json j = poll(svc, body_of(first).at("job_id"));
  if (second.status != 409) {
    // The first job finished before the second arrived; nothing to assert on
    // the conflict path, but the second must then have been accepted.
    CHECK(second.status == 202);
  } else {
    CHECK(body_of(second).at("error").at("code") == "conflict");
  }
  REQUIRE(j.at("status") == "done");
  CHECK(j.at("result").at("converged") == true);
  CHECK(j.at("result").at("history").size() <= 40);
  svc.wait_for_jobs();

  const HttpResponse missing = svc.handle("POST", "/learn", R"({"scenario_name": "learn_open_loop"})");
  CHECK(missing.status == 400);
}

TEST_CASE("replaying requests on a fresh service reproduces ids and reports") {
  std::string id_a, report_a;
  {
    Service svc(OCPLENS_TEST_SCENARIO_DIR);
    const Json r = body_of(svc.handle("POST", "/analyze", canonical_dump(analyze_request())));
    id_a = r.at("report_id");
    report_a = svc.handle("GET", "/report/" + id_a, "").body;
  }
  Service fresh(OCPLENS_TEST_SCENARIO_DIR);
  CHECK(fresh.handle("GET", "/report/" + id_a, "").status == 404);
  const Json r = body_of(fresh.handle("POST", "/analyze", canonical_dump(analyze_request())));
  CHECK(r.at("report_id") == id_a);
  CHECK(fresh.handle("GET", "/report/" + id_a, "").body == report_a);
}

TEST_CASE("service report is byte-identical to the library/CLI report") {
  const Scenario s = fixtures::load_scenario("obstacle_open_loop");
  const PlanDocument plan = solve_scenario(s, SolverConfig{});
  const std::string expected =
      dump_report(analyze_plan(s, plan, parse_correction(fixtures::scenario_text("obstacle_plus_v")), SolverConfig{}));

  Service svc(OCPLENS_TEST_SCENARIO_DIR);
  const Json r = body_of(svc.handle("POST", "/analyze", canonical_dump(analyze_request())));
  CHECK(svc.handle("GET", "/report/" + r.at("report_id").get<std::string>(), "").body == expected);

  Json with_plan = analyze_request();
  with_plan["plan"] = plan_to_json(plan);
  const Json r2 = body_of(svc.handle("POST", "/analyze", canonical_dump(with_plan)));
  CHECK(svc.handle("GET", "/report/" + r2.at("report_id").get<std::string>(), "").body == expected);
}
