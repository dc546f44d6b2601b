#pragma once

#include <memory>
#include <random>

#include "ocplens/cost_library.hpp"
#include "ocplens/dynamics.hpp"
#include "ocplens/path_geometry.hpp"

namespace fixture {

using ocplens::Point2;
using ocplens::Vector;

inline std::shared_ptr<const ocplens::ReferencePath> straight_path(double length = 200.0) {
  return std::make_shared<ocplens::ReferencePath>(
      std::vector<Point2>{Point2(-10.0, 0.0), Point2(length, 0.0)});
}

/// Gentle S-curve sampled every 0.5 m.
inline std::shared_ptr<const ocplens::ReferencePath> s_curve() {
  std::vector<Point2> pts;
  for (double x = -10.0; x <= 120.0; x += 0.5) {
    pts.emplace_back(x, 3.0 * std::sin(x / 15.0));
  }
  return std::make_shared<ocplens::ReferencePath>(pts);
}

inline ocplens::CostContext planner_context(bool with_lead, int horizon) {
  ocplens::CostContext ctx;
  ctx.path = s_curve();
  ctx.v_ref = 10.0;
  ctx.d_w = 1.0;
  ctx.o_buffer = 2.0;
  ctx.t_h = 1.0;
  ctx.obstacles = {Point2(20.0, 1.5), Point2(45.0, -1.0)};
  if (with_lead) {
    ocplens::LeadAgentPrediction lead;
    for (int k = 0; k <= horizon; ++k) {
      const double s = 15.0 + 9.0 * 0.1 * k;
      lead.arc_lengths.push_back(s);
      lead.speeds.push_back(9.0);
      lead.positions.push_back(ctx.path->point_at(s));
    }
    ctx.lead = lead;
  }
  return ctx;
}

/// A unicycle state near the path with moderate speed and rates.
inline Vector random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vector x(7);
  x << 10.0 + 30.0 * (U(rng) + 1.0), 2.5 * U(rng), 0.4 * U(rng), 8.0 + 3.0 * U(rng),
      0.3 * U(rng), 0.8 * U(rng), 0.3 * U(rng);
  return x;
}

inline Vector random_input(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vector u(2);
  u << 2.0 * U(rng), 0.5 * U(rng);
  return u;
}

}  // namespace fixture
