#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace pankit {

using Point = Eigen::Vector2f;

/// Annotation polygon in image coordinates.
struct Polygon {
  std::vector<Point> points;
  bool ignore = false;
};

/// Shoelace area; positive for counter-clockwise vertex order (x right, y down
/// treated as a plain Cartesian frame).
double signed_area(const Polygon& poly);
inline double area(const Polygon& poly) { return std::abs(signed_area(poly)); }
double perimeter(const Polygon& poly);

/// True when no two non-adjacent edges touch and adjacent edges meet only at
/// their shared vertex.
bool is_simple(const Polygon& poly);

/// Validates (>= 3 vertices, simple, non-zero area) and returns the polygon
/// in counter-clockwise order. Throws std::invalid_argument otherwise.
Polygon normalized(Polygon poly);

Polygon scaled(const Polygon& poly, float factor);

/// Minimum-area enclosing rectangle. `angle_deg` is the direction of the
/// `width` side, in [0, 90).
struct RotatedRect {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double width = 0.0;
  double height = 0.0;
  double angle_deg = 0.0;

  double area() const { return width * height; }
  std::vector<Eigen::Vector2d> corners() const;
};

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
Scalar cross(const Vec2<Scalar>& o, const Vec2<Scalar>& a, const Vec2<Scalar>& b)
{
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
template <typename Scalar>
std::vector<Vec2<Scalar>> convex_hull(std::vector<Vec2<Scalar>> pts)
{
  std::sort(pts.begin(), pts.end(), [](const Vec2<Scalar>& a, const Vec2<Scalar>& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3)
    return pts;
  std::vector<Vec2<Scalar>> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= Scalar(0)) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= Scalar(0)) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Rotating calipers over hull edge directions.
RotatedRect min_area_rect(std::span<const Eigen::Vector2d> points);

/// Bounding rectangle of `points` in a frame rotated by `angle_rad`.
RotatedRect rect_at_angle(std::span<const Eigen::Vector2d> points, double angle_rad);

} // namespace pankit
