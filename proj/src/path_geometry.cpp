#include "ocplens/path_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ocplens/errors.hpp"

namespace ocplens {

namespace {
constexpr double kMinSegmentLength = 1e-9;
constexpr double kZeroDistance = 1e-9;
}  // namespace

ReferencePath::ReferencePath(std::vector<Point2> vertices)
    : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) {
    throw InputError("reference path needs at least two vertices");
  }
  cumulative_.reserve(vertices_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
    if (!vertices_[i].allFinite() || !vertices_[i + 1].allFinite()) {
      throw InputError("reference path vertex is not finite");
    }
    const Point2 d = vertices_[i + 1] - vertices_[i];
    const double len = d.norm();
    if (len < kMinSegmentLength) {
      throw InputError("reference path has a degenerate segment at vertex " +
                       std::to_string(i));
    }
    tangents_.push_back(d / len);
    cumulative_.push_back(cumulative_.back() + len);
  }
}

PathProjection ReferencePath::project(const Point2& p) const {
  PathProjection best;
  double best_sq = std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_segments(); ++i) {
    const Point2& a = vertices_[i];
    const double len = cumulative_[i + 1] - cumulative_[i];
    const double along = std::clamp((p - a).dot(tangents_[i]), 0.0, len);
    const Point2 foot =
        (along >= len) ? vertices_[i + 1] : Point2(a + along * tangents_[i]);
    const double sq = (p - foot).squaredNorm();
    if (sq < best_sq) {
      best_sq = sq;
      best.point = foot;
      best.segment = i;
      best.fraction = along / len;
      best.arc_length = cumulative_[i] + along;
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

LateralOffset ReferencePath::lateral_offset_gradient(const Point2& p) const {
  const PathProjection proj = project(p);
  LateralOffset out;
  out.distance = proj.distance;
  if (proj.distance > kZeroDistance) {
    out.grad = (p - proj.point) / proj.distance;
  }
  return out;
}

Point2 ReferencePath::arc_length_gradient(const Point2& p) const {
  const PathProjection proj = project(p);
  int seg = proj.segment;
  if (proj.fraction >= 1.0 && seg + 1 < num_segments()) ++seg;
  return tangents_[seg];
}

Point2 ReferencePath::tangent(int segment) const { return tangents_.at(segment); }

int ReferencePath::segment_at(double s) const {
  if (s <= 0.0) return 0;
  if (s >= length()) return num_segments() - 1;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  return static_cast<int>(std::distance(cumulative_.begin(), it)) - 1;
}

Point2 ReferencePath::point_at(double s) const {
  const int seg = segment_at(s);
  return vertices_[seg] + (s - cumulative_[seg]) * tangents_[seg];
}

Point2 ReferencePath::tangent_at(double s) const { return tangents_[segment_at(s)]; }

}  // namespace ocplens
