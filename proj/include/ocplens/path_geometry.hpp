#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ocplens {

using Point2 = Eigen::Vector2d;

struct PathProjection {
  Point2 point;          // closest point P_ref(p) on the polyline
  int segment = 0;       // index of the segment holding `point`
  double fraction = 0;   // position of `point` along the segment, in [0, 1]
  double arc_length = 0; // D(p)
  double distance = 0;   // ||p - P_ref(p)||
};

struct LateralOffset {
  double distance = 0;
  Point2 grad = Point2::Zero();
};

/// Piecewise-linear reference path with closest-point projection and
/// along-path arc length. Immutable after construction.
class ReferencePath {
 public:
  /// Throws InputError for fewer than two vertices, non-finite vertices, or
  /// consecutive vertices closer than 1e-9 m.
  explicit ReferencePath(std::vector<Point2> vertices);

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<double>& cumulative_lengths() const { return cumulative_; }
  double length() const { return cumulative_.back(); }
  int num_segments() const { return static_cast<int>(vertices_.size()) - 1; }

  /// Closest point on the polyline. Equidistant segments resolve to the lower
  /// index.
  PathProjection project(const Point2& p) const;

  /// d(p) = ||P_ref(p) - p|| and its gradient (p - P_ref(p)) / d, zero when
  /// d <= 1e-9.
  LateralOffset lateral_offset_gradient(const Point2& p) const;

  /// dD/dp: unit tangent of the segment holding the projection. A projection
  /// onto the end vertex of a segment uses the succeeding segment's tangent.
  Point2 arc_length_gradient(const Point2& p) const;

  /// Unit tangent of segment `segment`.
  Point2 tangent(int segment) const;

  /// Point at arc length s. Values outside [0, length] extrapolate along the
  /// first/last segment.
  Point2 point_at(double s) const;

  /// Unit tangent at arc length s.
  Point2 tangent_at(double s) const;

 private:
  int segment_at(double s) const;

  std::vector<Point2> vertices_;
  std::vector<double> cumulative_;
  std::vector<Point2> tangents_;
};

}  // namespace ocplens
