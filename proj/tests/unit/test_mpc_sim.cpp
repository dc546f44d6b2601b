#include <doctest.h>

#include "fixtures.hpp"
#include "ocplens/errors.hpp"
#include "ocplens/mpc_sim.hpp"

using namespace ocplens;

namespace {

LeadAgentSpec faulty_lead() {
  LeadAgentSpec s;
  s.initial_arc_offset = 10.0;
  s.truth_speed = 10.0;
  s.fault_first = 10;
  s.fault_last = 19;
  s.fault_rate = -1.0;
  s.fault_onset_stage = 0;
  return s;
}

WeightSchedule straight_road_weights(int N) {
  WeightSchedule w = default_weights(N);
  for (int k = 0; k <= N; ++k) w.set(k, static_cast<int>(CostComponentId::kObstacle), 0.0);
  return w;
}

CostContext straight_road() {
  CostContext ctx;
  ctx.path = fixture::straight_path(1000.0);
  ctx.v_ref = 10.0;
  return ctx;
}

}  // namespace

TEST_CASE("lead predictions outside and inside the fault window") {
  const auto path = fixture::straight_path(1000.0);
  const PredictionModel pm(faulty_lead(), path, 0.1, 50);

  const auto ok = pm.predict(5, 20.0);
  REQUIRE(ok.speeds.size() == 51);
  for (int k = 0; k <= 50; ++k) {
    CHECK(ok.speeds[k] == 10.0);
    CHECK(ok.arc_lengths[k] == doctest::Approx(20.0 + k));
  }
  // The path starts at x = -10.
  CHECK(ok.positions[50].x() == doctest::Approx(60.0));

  const auto bad = pm.predict(12, 20.0);
  // v_k = 10 - 0.1 k until zero at stage 100, beyond this horizon.
  double s = 20.0;
  for (int k = 0; k <= 50; ++k) {
    CHECK(bad.speeds[k] == doctest::Approx(10.0 - 0.1 * k));
    CHECK(bad.arc_lengths[k] == doctest::Approx(s));
    s += bad.speeds[k] * 0.1;
  }
  CHECK_FALSE(faulty_lead().faulty(9));
  CHECK(faulty_lead().faulty(19));
  CHECK_FALSE(faulty_lead().faulty(20));
}

TEST_CASE("predicted speed clamps at zero") {
  LeadAgentSpec s = faulty_lead();
  s.fault_rate = -5.0;
  s.fault_onset_stage = 10;
  const PredictionModel pm(s, fixture::straight_path(1000.0), 0.1, 50);
  const auto p = pm.predict(10, 0.0);
  CHECK(p.speeds[10] == 10.0);
  CHECK(p.speeds[20] == doctest::Approx(5.0));
  CHECK(p.speeds[30] == 0.0);
  CHECK(p.speeds[50] == 0.0);
  CHECK(p.arc_lengths[50] == doctest::Approx(p.arc_lengths[30]));
}

TEST_CASE("warm start shifts by one input") {
  Plan p;
  p.states.assign(4, Vector::Zero(1));
  for (int j = 0; j < 3; ++j) p.inputs.push_back(Vector::Constant(1, j));
  const auto w = shift_warm_start(p);
  REQUIRE(w.size() == 3);
  CHECK(w[0][0] == 1.0);
  CHECK(w[1][0] == 2.0);
  CHECK(w[2][0] == 2.0);
  CHECK_THROWS_AS(shift_warm_start(Plan{}), InputError);
}

TEST_CASE("closed loop executes the first input of each plan") {
  const UnicycleModel model(0.1);
  const int N = 30;
  Vector x0 = Vector::Zero(7);
  x0[unicycle::kV] = 10.0;
  MpcConfig cfg;
  cfg.duration = 12;
  const MpcTrace t = run_mpc(model, x0, straight_road(), straight_road_weights(N), faulty_lead(), cfg);
  REQUIRE(t.complete);
  CHECK(t.duration() == 12);
  CHECK(t.closed_loop_states.size() == 13);
  CHECK(t.cycles.size() == 12);
  CHECK(t.lead_arc.size() == 13);
  for (int c = 0; c < 12; ++c) {
    CHECK(t.executed_inputs[c] == t.cycles[c].plan.inputs.front());
    CHECK(t.cycles[c].plan.states.front() == t.closed_loop_states[c]);
    CHECK((model.transition(t.closed_loop_states[c], t.executed_inputs[c]) - t.closed_loop_states[c + 1])
              .lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(t.cycles[c].converged);
    REQUIRE(t.cycles[c].context.lead.has_value());
    CHECK(t.cycles[c].context.lead->arc_lengths.front() == doctest::Approx(t.lead_arc[c]));
    // The true lead never changes speed; only the predictions are faulty.
    CHECK(t.lead_speed[c] == 10.0);
  }
  // Robot projects to arc 10; the lead starts 10 m ahead and covers 1 m per cycle.
  CHECK(t.lead_arc.front() == doctest::Approx(20.0));
  CHECK(t.lead_arc.back() == doctest::Approx(20.0 + 12 * 1.0));
  CHECK(t.cycles[11].context.lead->speeds[5] < 10.0);
  CHECK(t.cycles[9].context.lead->speeds[5] == 10.0);

  const MpcTrace again = run_mpc(model, x0, straight_road(), straight_road_weights(N), faulty_lead(), cfg);
  CHECK(again.closed_loop_states.back() == t.closed_loop_states.back());
}

TEST_CASE("run without a lead agent and invalid configurations") {
  const UnicycleModel model(0.1);
  Vector x0 = Vector::Zero(7);
  x0[unicycle::kV] = 8.0;
  WeightSchedule w = straight_road_weights(20);
  for (int k = 0; k <= 20; ++k) {
    w.set(k, static_cast<int>(CostComponentId::kHeadway), 0.0);
    w.set(k, static_cast<int>(CostComponentId::kRelativeSpeed), 0.0);
  }
  MpcConfig cfg;
  cfg.duration = 5;
  const MpcTrace t = run_mpc(model, x0, straight_road(), w, std::nullopt, cfg);
  CHECK(t.complete);
  CHECK(t.lead_arc.empty());
  // Speeds rise toward v_ref.
  CHECK(t.closed_loop_states.back()[unicycle::kV] > 8.0);

  cfg.duration = 0;
  CHECK_THROWS_AS(run_mpc(model, x0, straight_road(), w, std::nullopt, cfg), InputError);
  cfg.duration = 5;
  // HEADWAY weights without predictions are rejected by the cost model.
  const MpcTrace bad = run_mpc(model, x0, straight_road(), straight_road_weights(20), std::nullopt, cfg);
  CHECK_FALSE(bad.complete);
  CHECK(bad.failure.find("cycle 0") == 0);
}
