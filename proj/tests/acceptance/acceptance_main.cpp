// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// An optional argument restricts the run to criteria whose id contains it.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "grid_oracle.hpp"
#include "ocplens/commands.hpp"
#include "ocplens/sensitivity.hpp"
#include "ocplens/service.hpp"
#include "oracles.hpp"

// After Eigen: resolv.h, pulled in by httplib, defines _res as a macro.
#include <httplib.h>

using namespace ocplens;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  double time_limit_s;  // <= 0: no limit
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string scenario_file(const std::string& name) {
  return std::string(OCPLENS_SCENARIO_DIR) + "/" + name + ".json";
}

Scenario load(const std::string& name) { return parse_scenario(read_text_file(scenario_file(name))); }

int col(CostComponentId id) { return static_cast<int>(id); }

// ---------------------------------------------------------------------------

Outcome gradient_suite() {
  std::mt19937_64 rng(2024);
  const UnicycleModel model(0.1);

  double jac = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector x = fixture::random_state(rng);
    const Vector u = fixture::random_input(rng);
    Matrix A, B;
    model.jacobians(x, u, A, B);
    const Matrix A_fd =
        oracle::central_jacobian([&](const Vector& xx) { return model.transition(xx, u); }, x, 1e-6);
    const Matrix B_fd =
        oracle::central_jacobian([&](const Vector& uu) { return model.transition(x, uu); }, u, 1e-6);
    jac = std::max({jac, oracle::relative_error(A, A_fd), oracle::relative_error(B, B_fd)});
  }

  const int N = 20;
  const auto ctx = fixture::planner_context(true, N);
  const PlannerCostModel costs(ctx);
  double cost_jac = 0.0;
  for (int accepted = 0; accepted < 100;) {
    const Vector x = fixture::random_state(rng);
    const Vector u = fixture::random_input(rng);
    const auto proj = ctx.path->project(Point2(x[0], x[1]));
    bool near_vertex = false;
    for (const auto& v : ctx.path->vertices()) near_vertex |= (proj.point - v).norm() < 1e-2;
    if (near_vertex) continue;
    ++accepted;
    const int k = accepted % (N + 1);
    for (int r = 0; r < kNumComponents; ++r) {
      StageDerivatives d;
      costs.evaluate(r, k, N, x, u, false, d);
      auto fx = [&](const Vector& xx) {
        StageDerivatives t;
        costs.evaluate(r, k, N, xx, u, false, t);
        return t.value;
      };
      auto fu = [&](const Vector& uu) {
        StageDerivatives t;
        costs.evaluate(r, k, N, x, uu, false, t);
        return t.value;
      };
      cost_jac = std::max({cost_jac, oracle::relative_error(d.grad_x, oracle::central_gradient(fx, x, 1e-6)),
                           oracle::relative_error(d.grad_u, oracle::central_gradient(fu, u, 1e-6))});
    }
  }

  auto random_plan = [&] {
    std::vector<Vector> in;
    for (int k = 0; k < N; ++k) in.push_back(fixture::random_input(rng));
    Vector x0 = fixture::random_state(rng);
    x0[0] = 12.0;
    return rollout(model, x0, in);
  };

  double elim = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Plan p = random_plan();
    const int k = 1 + trial % N;
    const int r = trial % kNumComponents;
    const auto g = eliminated_gradient(model, p, costs, r, k);
    const Vector fd = oracle::central_gradient(
        [&](const Vector& u) { return oracle::stage_cost(model, p.states[0], costs, r, k, u); },
        p.stacked_inputs(), 1e-6);
    elim = std::max(elim, oracle::relative_error(g.grad_u, fd));
  }

  double worst_ratio_change = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Plan p = random_plan();
    const auto F = build_F(model, p);
    const Vector du = oracle::random_vector(rng, N * 2, -1.0, 1.0);
    auto ratio = [&](double h) {
      const Vector u = p.stacked_inputs() + h * du;
      const Vector xs = oracle::stack(oracle::simulate(model, p.states[0], unstack(u, 2)));
      const Vector rem = xs - p.stacked_states() - F.F_xu() * (h * du);
      return rem.lpNorm<Eigen::Infinity>() / (h * h * du.squaredNorm());
    };
    worst_ratio_change = std::max(worst_ratio_change, std::abs(ratio(5e-3) / ratio(1e-2) - 1.0));
  }

  Outcome o;
  o.pass = jac <= 1e-5 && cost_jac <= 1e-5 && elim <= 1e-4 && worst_ratio_change <= 0.25;
  o.detail = "dynamics Jacobian rel err " + fmt("%.1e", jac) + ", cost gradients " + fmt("%.1e", cost_jac) +
             ", eliminated gradients " + fmt("%.1e", elim) + ", remainder ratio change " +
             fmt("%.1f%%", 100.0 * worst_ratio_change);
  return o;
}

// ---------------------------------------------------------------------------

CorrectionFile random_correction(std::mt19937_64& rng, int N) {
  std::uniform_int_distribution<int> count(1, 5), stage(1, N), dim(0, 8), coin(0, 1);
  CorrectionFile c;
  const int n = count(rng);
  while (static_cast<int>(c.annotations.size()) < n) {
    Annotation a{stage(rng), static_cast<PlanDimension>(dim(rng)), coin(rng) ? 1.0 : -1.0};
    if (a.dimension >= PlanDimension::kJ && a.stage >= N) continue;
    bool dup = false;
    for (const auto& b : c.annotations) dup |= b.stage == a.stage && b.dimension == a.dimension;
    if (!dup) c.annotations.push_back(a);
  }
  return c;
}

Outcome optimality_invariant() {
  const double grad_tol = 1e-6;
  SolverConfig cfg;
  cfg.grad_tol = grad_tol;
  std::mt19937_64 rng(77);
  int scenarios = 0, checks = 0, violations = 0;
  double worst = 0.0;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(OCPLENS_SCENARIO_DIR)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    Scenario s;
    try {
      s = parse_scenario(read_text_file(f.string()));
    } catch (const InputError&) {
      continue;  // corrections and requirements
    }
    const PlanDocument plan = solve_scenario(s, cfg);
    if (!plan.diagnostics.converged) return {false, f.filename().string() + " did not converge"};
    ++scenarios;
    const double Finf = build_F(s.model(), plan.plan).inf_norm();
    for (int i = 0; i < 20; ++i) {
      const CorrectionFile c = random_correction(rng, s.horizon);
      const ReportDocument r = analyze_plan(s, plan, c, cfg);
      const auto a = DirectionalCorrection::from_annotations(s.horizon, c.annotations);
      const double bound = a.l1_norm() * Finf * grad_tol;
      const double sum = std::abs(r.report.score_sum());
      ++checks;
      if (sum > bound) ++violations;
      worst = std::max(worst, sum / bound);
    }
  }
  return {violations == 0 && scenarios > 0,
          std::to_string(checks) + " corrections on " + std::to_string(scenarios) + " scenarios, max |sum cs|/bound " +
              fmt("%.3f", worst)};
}

// ---------------------------------------------------------------------------

Outcome vb_ordinal() {
  const Scenario s = load("obstacle_open_loop");
  const PlanDocument plan = solve_scenario(s, SolverConfig{});
  const ReportDocument rep =
      analyze_plan(s, plan, parse_correction(read_text_file(scenario_file("obstacle_plus_v"))), SolverConfig{});
  const auto& r = rep.report;
  Eigen::Index min_c, max_c;
  r.totals.minCoeff(&min_c);
  r.totals.maxCoeff(&max_c);
  const Vector mag10 = r.cost_magnitudes.row(10).transpose().cwiseAbs();
  std::vector<int> order(kNumComponents);
  for (int i = 0; i < kNumComponents; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return mag10[a] > mag10[b]; });
  const bool top_two = (order[0] == col(CostComponentId::kReferenceSpeed) &&
                        order[1] == col(CostComponentId::kReferencePath)) ||
                       (order[0] == col(CostComponentId::kReferencePath) &&
                        order[1] == col(CostComponentId::kReferenceSpeed));
  const double obstacle10 = r.cost_magnitudes(10, col(CostComponentId::kObstacle));
  Outcome o;
  o.pass = plan.diagnostics.converged && min_c == col(CostComponentId::kObstacle) &&
           max_c == col(CostComponentId::kReferenceSpeed) && obstacle10 == 0.0 && top_two;
  o.detail = "min total " + r.components[min_c] + " (" + fmt("%.3g", r.totals[min_c]) + "), max total " +
             r.components[max_c] + " (" + fmt("%.3g", r.totals[max_c]) + "); stage-10 cost OBSTACLE " +
             fmt("%g", obstacle10) + ", largest " + r.components[order[0]] + " " + fmt("%.3g", mag10[order[0]]) +
             ", " + r.components[order[1]] + " " + fmt("%.3g", mag10[order[1]]);
  return o;
}

Outcome vb_intervention() {
  const Scenario s = load("obstacle_open_loop");
  const PlanDocument active = solve_scenario(s, SolverConfig{});
  const PlanDocument free = solve_scenario(s, SolverConfig{}, scaled_weights(s, {{"OBSTACLE", 0.0}}));
  const double v_active = active.plan.states[10][unicycle::kV];
  const double v_free = free.plan.states[10][unicycle::kV];
  const bool toward = std::abs(v_free - s.v_ref) < std::abs(v_active - s.v_ref);
  return {active.diagnostics.converged && free.diagnostics.converged && v_free - v_active > 0.5 && toward,
          "stage-10 speed " + fmt("%.3f", v_active) + " -> " + fmt("%.3f", v_free) + " m/s (v_ref " +
              fmt("%.1f", s.v_ref) + ")"};
}

// ---------------------------------------------------------------------------

Outcome vc_reproduction() {
  const Scenario s = load("lead_fault_closed_loop");
  const TraceDocument trace = simulate_scenario(s, SolverConfig{});
  if (!trace.trace.complete || trace.trace.duration() != 30) return {false, "incomplete run: " + trace.trace.failure};
  const ReportDocument rep =
      analyze_trace(s, trace, parse_correction(read_text_file(scenario_file("lead_fault_plus_v"))));
  const int h = col(CostComponentId::kHeadway);
  double worst_score = -std::numeric_limits<double>::infinity(), worst_cost = 0.0;
  for (int t = 10; t <= 19; ++t) {
    worst_score = std::max(worst_score, rep.report.scores(t, h));
    worst_cost = std::max(worst_cost, std::abs(rep.report.cost_magnitudes(t, h)));
  }
  return {worst_score < 0.0 && worst_cost < 1e-3,
          "HEADWAY score on cycles 10-19 at most " + fmt("%.3g", worst_score) + ", weighted cost at most " +
              fmt("%.3g", worst_cost) + "; ranked #1: " + rep.report.components[rep.report.ranking[0]]};
}

// ---------------------------------------------------------------------------

QuadraticCostModel lqr_costs() {
  QuadraticComponent position{"position", Matrix::Zero(2, 2), Vector::Zero(2), Matrix::Zero(1, 1)};
  position.Q(0, 0) = 1.0;
  position.x_ref = Vector::Zero(2);
  position.x_ref[0] = 4.0;
  QuadraticComponent speed{"speed", Matrix::Zero(2, 2), Vector::Zero(2), Matrix::Zero(1, 1)};
  speed.Q(1, 1) = 1.0;
  QuadraticComponent effort{"effort", Matrix::Zero(2, 2), Vector::Zero(2), Matrix::Identity(1, 1)};
  return QuadraticCostModel({position, speed, effort});
}

struct ProbeCount {
  int positive = 0;
  int descent_ok = 0;
  int resolve_ok = 0;
  double oracle_gap = 0.0;
};

// Rest-to-rest style LQR: drive a double integrator from x0 toward p = 4 with
// a speed penalty, then ask for more speed at `stage`.
ProbeCount probe_instance(const Vector& x0, int stage, int dim, double sign, bool verify_oracle) {
  const int N = 20;
  const LinearModel model = LinearModel::double_integrator(0.1);
  const QuadraticCostModel costs = lqr_costs();
  Vector w(3);
  w << 1.0, 0.3, 0.05;
  const WeightSchedule W = WeightSchedule::stage_uniform(N, w);
  SolverConfig cfg;
  cfg.grad_tol = 1e-9;
  const SolveResult sol = solve(model, x0, costs, W, cfg);
  const auto dense = oracle::dense_lqr(model, x0, costs, W, N);
  ProbeCount out;
  out.oracle_gap = (oracle::stack(sol.plan.inputs) - oracle::stack(dense.inputs)).lpNorm<Eigen::Infinity>();
  const Plan plan = sol.plan;
  Vector ax = Vector::Zero((N + 1) * 2);
  ax[2 * stage + dim] = sign;
  const DirectionalCorrection a(ax, Vector::Zero(N), 2, 1);
  const auto rep = score_open_loop(model, plan, costs, W, a);
  const Vector z_star = oracle::plan_vector(model, x0, plan.stacked_inputs());
  for (int k = 0; k <= N; ++k) {
    for (int r = 0; r < 3; ++r) {
      if (rep.scores(k, r) <= 0.0) continue;
      ++out.positive;
      const double delta = 0.1;
      WeightSchedule raised = W;
      raised.set(k, r, W(k, r) + delta);

      const DescentProbe p = descent_probe(model, plan, costs, W, k, r, a, delta);
      bool ok = p.epsilon > 0.0 && p.epsilon <= 1.0 && p.new_objective < p.old_objective &&
                p.correction_inner_product > 0.0;
      if (verify_oracle) {
        // Rebuild u^ from a finite-difference gradient and evaluate J^ directly.
        const Vector g = oracle::central_gradient(
            [&](const Vector& v) { return oracle::stage_cost(model, x0, costs, r, k, v); },
            plan.stacked_inputs(), 1e-6);
        const Vector u_hat = plan.stacked_inputs() - p.epsilon * delta * g;
        const double j_hat = oracle::objective(model, x0, costs, raised, unstack(u_hat, 1));
        const double j_star = oracle::objective(model, x0, costs, raised, plan.inputs);
        ok = ok && j_hat < j_star && a.stacked().dot(oracle::plan_vector(model, x0, u_hat) - z_star) > 0.0;
      }
      if (ok) ++out.descent_ok;

      const ResolveCheck rc = resolve_check(model, plan, costs, W, k, r, a, delta, cfg);
      bool resolved = rc.converged && rc.passed;
      if (verify_oracle) {
        const auto ref = oracle::dense_lqr(model, x0, costs, raised, N);
        const double ip = a.stacked().dot(oracle::plan_vector(model, x0, oracle::stack(ref.inputs)) - z_star);
        resolved = resolved && ip > 0.0 && std::abs(ip - rc.inner_product) <= 1e-8;
      }
      if (resolved) ++out.resolve_ok;
    }
  }
  return out;
}

Outcome proposition_probe() {
  Vector x0 = Vector::Zero(2);
  const ProbeCount main = probe_instance(x0, 5, 1, 1.0, true);

  // Not part of the verdict: how often the re-solve property holds over a
  // sweep of corrections on the same system.
  int swept = 0, swept_ok = 0, swept_descent_fail = 0;
  for (int stage = 2; stage <= 20; stage += 2) {
    for (int dim = 0; dim < 2; ++dim) {
      for (double sign : {1.0, -1.0}) {
        const ProbeCount c = probe_instance(x0, stage, dim, sign, false);
        swept += c.positive;
        swept_ok += c.resolve_ok;
        swept_descent_fail += c.positive - c.descent_ok;
      }
    }
  }
  Outcome o;
  o.pass = main.positive > 0 && main.descent_ok == main.positive && main.resolve_ok == main.positive &&
           main.oracle_gap <= 1e-6 && swept_descent_fail == 0;
  o.detail = "+v at stage 5: " + std::to_string(main.descent_ok) + "/" + std::to_string(main.positive) +
             " consistent (k,r) descend, " + std::to_string(main.resolve_ok) + "/" +
             std::to_string(main.positive) + " re-solves move along a (oracle gap " + fmt("%.1e", main.oracle_gap) +
             "); sweep: descent never fails, re-solve holds for " + std::to_string(swept_ok) + "/" +
             std::to_string(swept);
  return o;
}

// ---------------------------------------------------------------------------

Outcome weight_lp_solver() {
  std::mt19937 rng(20240611);
  double worst_grid = 0.0, worst_res = 0.0, worst_sub = 0.0;
  int optimal = 0;
  for (int i = 0; i < 50; ++i) {
    const LearningProblem p = oracle::random_small_problem(rng);
    const WeightSolveResult lp = solve_weight_lp(p);
    WeightSolveOptions so;
    so.method = WeightSolver::kSubgradient;
    const WeightSolveResult sub = solve_weight_lp(p, so);
    optimal += lp.optimal ? 1 : 0;
    worst_grid = std::max(worst_grid, std::abs(lp.objective - oracle::grid_hinge_minimum(p)));
    worst_res = std::max({worst_res, constraint_residual(p, lp.weights), -lp.weights.minCoeff()});
    worst_sub = std::max(worst_sub, std::abs(sub.objective - lp.objective));
  }
  return {optimal == 50 && worst_grid <= 1e-4 && worst_res <= 1e-9 && worst_sub <= 1e-4,
          std::to_string(optimal) + "/50 optimal; |LP - grid| " + fmt("%.1e", worst_grid) + ", residual " +
              fmt("%.1e", worst_res) + ", |LP - subgradient| " + fmt("%.1e", worst_sub)};
}

// ---------------------------------------------------------------------------

Outcome vd1_open_loop() {
  const Scenario s = load("learn_open_loop");
  const RequirementsFile req =
      parse_requirements(read_text_file(scenario_file("learn_open_loop_requirements")));
  const WeightsDocument w = learn_scenario(s, req, SolverConfig{});
  if (w.history.empty()) return {false, "no iterations: " + w.message};
  const auto& last = w.history.back();
  const Matrix initial = w.history.front().weights;
  bool grown = true;
  std::string agg;
  for (auto id : {CostComponentId::kBoundary, CostComponentId::kReferencePath, CostComponentId::kReferenceSpeed}) {
    const double before = initial.col(col(id)).sum(), after = w.weights.col(col(id)).sum();
    grown = grown && after > before;
    agg += std::string(component_name(id)) + " " + fmt("%.2f", before) + "->" + fmt("%.2f", after) + " ";
  }
  const bool in_band = last.status.speed_error <= req.requirements.speed->tolerance &&
                       last.status.path_error <= req.requirements.path->tolerance;
  return {w.converged && last.corrections == 0 && w.history.size() <= 40 && in_band && grown,
          std::to_string(w.history.size()) + " iterations, final speed error " + fmt("%.3f", last.status.speed_error) +
              " m/s, path error " + fmt("%.3f", last.status.path_error) + " m; " + agg};
}

Outcome vd2_closed_loop() {
  const Scenario s = load("learn_closed_loop");
  const RequirementsFile req =
      parse_requirements(read_text_file(scenario_file("learn_closed_loop_requirements")));
  const WeightsDocument w = learn_scenario(s, req, SolverConfig{});
  if (w.history.empty()) return {false, "no iterations: " + w.message};
  const double err = w.history.back().status.headway_error;
  double worst_ratio = 0.0;
  for (auto id : {CostComponentId::kHeadway, CostComponentId::kRelativeSpeed}) {
    const double w0 = w.weights(0, col(id));
    if (!(w0 > 0.0)) return {false, std::string(component_name(id)) + " has zero stage-0 weight"};
    for (int k = 10; k <= s.horizon; ++k) worst_ratio = std::max(worst_ratio, w.weights(k, col(id)) / w0);
  }
  return {w.converged && err < 0.15 && worst_ratio < 0.25,
          std::to_string(w.history.size()) + " iterations, headway error " + fmt("%.3f", err) +
              " m, max stage>=10 / stage-0 weight ratio " + fmt("%.3f", worst_ratio)};
}

// ---------------------------------------------------------------------------

int run_command(const std::string& cmd) {
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Outcome formats_and_identity() {
  int files = 0, mismatches = 0;
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(OCPLENS_SCENARIO_DIR)) paths.push_back(e.path());
  for (const auto& f : paths) {
    const std::string text = read_text_file(f.string());
    const Json j = parse_json(text);
    const std::string v = j.value("version", "");
    std::string again;
    if (v == kScenarioVersion) again = dump_scenario(parse_scenario(text));
    else if (v == kCorrectionVersion) again = dump_correction(parse_correction(text));
    else if (v == kRequirementsVersion) again = dump_requirements(parse_requirements(text));
    else continue;
    ++files;
    mismatches += again == text ? 0 : 1;
  }

  const fs::path dir = fs::temp_directory_path() / ("ocplens_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string plan = (dir / "plan.json").string(), report = (dir / "report.json").string();
  const std::string env = std::string("OCPLENS_SCENARIO_DIR='") + OCPLENS_SCENARIO_DIR + "' '" + OCPLENS_CLI + "' ";
  const int rc1 = run_command(env + "solve --scenario obstacle_open_loop --out '" + plan + "' >/dev/null");
  const int rc2 = run_command(env + "analyze --scenario obstacle_open_loop --artifact '" + plan +
                              "' --correction obstacle_plus_v --out '" + report + "' >/dev/null");
  if (rc1 != 0 || rc2 != 0) {
    fs::remove_all(dir);
    return {false, "CLI exit codes " + std::to_string(rc1) + ", " + std::to_string(rc2)};
  }
  const std::string cli_report = read_text_file(report);
  const std::string report_rt = dump_report(parse_report(cli_report));

  // Generated weight file round-trip.
  const Scenario s = load("obstacle_open_loop");
  WeightsDocument wd;
  wd.scenario_hash = scenario_hash(s);
  for (auto id : kAllComponents) wd.components.emplace_back(component_name(id));
  wd.weights = s.weight_schedule().matrix();
  wd.message = "fixed";
  const std::string wtext = dump_weights(wd);
  const bool weights_rt = dump_weights(parse_weights(wtext)) == wtext;

  Service svc(OCPLENS_SCENARIO_DIR);
  const int port = svc.start_background();
  httplib::Client client("127.0.0.1", port);
  const Json body{{"scenario_name", "obstacle_open_loop"},
                  {"correction", parse_json(read_text_file(scenario_file("obstacle_plus_v")))}};
  std::string served;
  if (auto res = client.Post("/analyze", canonical_dump(body), "application/json"); res && res->status == 200) {
    const std::string id = parse_json(res->body).at("report_id");
    if (auto got = client.Get("/report/" + id); got && got->status == 200) served = got->body;
  }
  Json with_plan = body;
  with_plan["plan"] = parse_json(read_text_file(plan));
  std::string served_plan;
  if (auto res = client.Post("/analyze", canonical_dump(with_plan), "application/json"); res && res->status == 200) {
    served_plan = canonical_dump(parse_json(res->body).at("report"));
  }
  svc.stop();
  fs::remove_all(dir);

  const bool identical = served == cli_report && served_plan == cli_report;
  return {mismatches == 0 && files > 0 && report_rt == cli_report && weights_rt && identical,
          std::to_string(files - mismatches) + "/" + std::to_string(files) +
              " input files byte-identical; report and weights round-trip " +
              (report_rt == cli_report && weights_rt ? "ok" : "FAILED") + "; CLI vs service report " +
              (identical ? "identical (" + std::to_string(cli_report.size()) + " bytes)" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const std::vector<Criterion> criteria = {
      {"gradient-suite", 10.0, gradient_suite},
      {"optimality-invariant", 0.0, optimality_invariant},
      {"vb-ordinal", 10.0, vb_ordinal},
      {"vb-intervention", 0.0, vb_intervention},
      {"vc-closed-loop", 60.0, vc_reproduction},
      {"proposition-probe", 0.0, proposition_probe},
      {"weight-lp", 0.0, weight_lp_solver},
      {"vd1-open-loop-learning", 300.0, vd1_open_loop},
      {"vd2-closed-loop-learning", 900.0, vd2_closed_loop},
      {"formats-roundtrip", 0.0, formats_and_identity},
  };
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!filter.empty() && c.id.find(filter) == std::string::npos) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.time_limit_s) + " s limit";
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << " [" << fmt("%.2f", secs) << " s] " << o.detail
              << std::endl;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
