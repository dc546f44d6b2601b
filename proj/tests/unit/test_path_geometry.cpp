#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "ocplens/errors.hpp"
#include "ocplens/path_geometry.hpp"
#include "oracles.hpp"

using namespace ocplens;

TEST_CASE("construction validates vertices") {
  CHECK_THROWS_AS(ReferencePath({Point2(0, 0)}), InputError);
  CHECK_THROWS_AS(ReferencePath({Point2(0, 0), Point2(0, 0)}), InputError);
  CHECK_THROWS_AS(ReferencePath({Point2(0, 0), Point2(NAN, 1)}), InputError);
  const ReferencePath path({Point2(0, 0), Point2(3, 4), Point2(3, 10)});
  CHECK(path.cumulative_lengths() == std::vector<double>{0.0, 5.0, 11.0});
}

TEST_CASE("projection onto straight and L-shaped paths") {
  const ReferencePath straight({Point2(0, 0), Point2(10, 0)});
  auto pr = straight.project(Point2(3, 2));
  CHECK(pr.point.isApprox(Point2(3, 0)));
  CHECK(pr.arc_length == doctest::Approx(3.0));
  CHECK(pr.distance == doctest::Approx(2.0));

  pr = straight.project(Point2(7.5, 0));
  CHECK(pr.point == Point2(7.5, 0));
  CHECK(pr.distance == 0.0);

  const std::vector<Point2> l_shape{Point2(0, 0), Point2(5, 0), Point2(5, 5)};
  const ReferencePath ell(l_shape);
  pr = ell.project(Point2(6, -1));
  CHECK(pr.point.isApprox(Point2(5, 0)));
  CHECK(pr.arc_length == doctest::Approx(5.0));
  const auto sampled = oracle::sampled_projection(l_shape, Point2(6, -1), 1e-3);
  CHECK(pr.distance == doctest::Approx(sampled.distance).epsilon(1e-9));
}

TEST_CASE("equidistant segments resolve to the lower index") {
  // Point on the bisector of a right-angle corner, inside the L.
  const ReferencePath ell({Point2(0, 0), Point2(5, 0), Point2(5, 5)});
  const auto pr = ell.project(Point2(4, 1));
  CHECK(pr.segment == 0);
  CHECK(pr.point.isApprox(Point2(4, 0)));
}

TEST_CASE("projection never loses to dense sampling") {
  const auto path = fixture::s_curve();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-5.0, 110.0), uy(-6.0, 6.0);
  for (int i = 0; i < 100; ++i) {
    const Point2 p(ux(rng), uy(rng));
    const auto pr = path->project(p);
    const auto sampled = oracle::sampled_projection(path->vertices(), p, 1e-3);
    CHECK(pr.distance <= sampled.distance + 1e-6);
    CHECK(pr.arc_length == doctest::Approx(sampled.arc_length).epsilon(1e-3));
    for (const auto& v : path->vertices()) CHECK(pr.distance <= (v - p).norm() + 1e-12);
  }
}

TEST_CASE("lateral offset gradient") {
  const ReferencePath straight({Point2(0, 0), Point2(10, 0)});
  auto off = straight.lateral_offset_gradient(Point2(3, 2));
  CHECK(off.distance == doctest::Approx(2.0));
  CHECK(off.grad.isApprox(Point2(0, 1)));
  off = straight.lateral_offset_gradient(Point2(3, 0));
  CHECK(off.distance == 0.0);
  CHECK(off.grad == Point2::Zero());
}

TEST_CASE("arc length gradient: tangents and vertex convention") {
  const ReferencePath along_x({Point2(0, 0), Point2(10, 0)});
  CHECK(along_x.arc_length_gradient(Point2(4, -3)).isApprox(Point2(1, 0)));
  const ReferencePath along_y({Point2(0, 0), Point2(0, 10)});
  CHECK(along_y.arc_length_gradient(Point2(2, 4)).isApprox(Point2(0, 1)));
  const ReferencePath ell({Point2(0, 0), Point2(5, 0), Point2(5, 5)});
  // Projects onto the corner vertex: use the succeeding segment.
  CHECK(ell.arc_length_gradient(Point2(6, -1)).isApprox(Point2(0, 1)));
}

TEST_CASE("distance and arc-length gradients match finite differences away from vertices") {
  const auto path = fixture::s_curve();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(0.0, 100.0), uy(-2.0, 2.0);
  int checked = 0;
  double worst_d = 0.0, worst_s = 0.0;
  while (checked < 100) {
    const Point2 p(ux(rng), uy(rng));
    const auto pr = path->project(p);
    bool near_vertex = false;
    for (const auto& v : path->vertices()) near_vertex |= (pr.point - v).norm() < 1e-2;
    if (near_vertex || pr.distance < 1e-2) continue;
    const Vector x = p;
    const Vector gd = oracle::central_gradient(
        [&](const Vector& q) { return path->project(Point2(q[0], q[1])).distance; }, x, 1e-6);
    const Vector gs = oracle::central_gradient(
        [&](const Vector& q) { return path->project(Point2(q[0], q[1])).arc_length; }, x, 1e-6);
    const Vector ad = path->lateral_offset_gradient(p).grad;
    const Vector as = path->arc_length_gradient(p);
    worst_d = std::max(worst_d, oracle::relative_error(ad, gd));
    worst_s = std::max(worst_s, oracle::relative_error(as, gs));
    ++checked;
  }
  CHECK(worst_d <= 1e-5);
  CHECK(worst_s <= 1e-5);
}

TEST_CASE("arc length is non-decreasing when moving forward along the path") {
  const auto path = fixture::s_curve();
  double prev = -1.0;
  for (double s = 0.0; s < path->length(); s += 0.37) {
    const Point2 n(-path->tangent_at(s).y(), path->tangent_at(s).x());
    const double d = path->project(path->point_at(s) + 0.2 * n).arc_length;
    CHECK(d >= prev - 1e-12);
    prev = d;
  }
}

TEST_CASE("point_at and tangent_at extrapolate past the ends") {
  const ReferencePath straight({Point2(0, 0), Point2(10, 0)});
  CHECK(straight.point_at(12.0).isApprox(Point2(12, 0)));
  CHECK(straight.point_at(-1.0).isApprox(Point2(-1, 0)));
  CHECK(straight.tangent_at(50.0).isApprox(Point2(1, 0)));
}
