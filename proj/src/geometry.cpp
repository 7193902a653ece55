#include "pankit/geometry.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

namespace pankit {

namespace {

using Vec2d = Eigen::Vector2d;

Vec2d as_double(const Point& p) { return p.cast<double>(); }

int orientation(const Vec2d& a, const Vec2d& b, const Vec2d& c)
{
  const double v = cross<double>(a, b, c);
  return (v > 0) - (v < 0);
}

bool on_segment(const Vec2d& a, const Vec2d& b, const Vec2d& p)
{
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_touch(const Vec2d& a, const Vec2d& b, const Vec2d& c, const Vec2d& d)
{
  const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4)
    return true;
  return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d)) ||
         (o3 == 0 && on_segment(c, d, a)) || (o4 == 0 && on_segment(c, d, b));
}

} // namespace

double signed_area(const Polygon& poly)
{
  const auto& p = poly.points;
  double acc = 0.0;
  for (std::size_t i = 0, n = p.size(); i < n; ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % n];
    acc += static_cast<double>(a.x()) * b.y() - static_cast<double>(b.x()) * a.y();
  }
  return 0.5 * acc;
}

double perimeter(const Polygon& poly)
{
  const auto& p = poly.points;
  double acc = 0.0;
  for (std::size_t i = 0, n = p.size(); i < n; ++i)
    acc += (as_double(p[(i + 1) % n]) - as_double(p[i])).norm();
  return acc;
}

bool is_simple(const Polygon& poly)
{
  const std::size_t n = poly.points.size();
  if (n < 3)
    return false;
  std::vector<Vec2d> p(n);
  std::transform(poly.points.begin(), poly.points.end(), p.begin(), as_double);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2d& a = p[i];
    const Vec2d& b = p[(i + 1) % n];
    if (a == b)
      return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2d& c = p[j];
      const Vec2d& d = p[(j + 1) % n];
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges may only share their common vertex: reject folding back.
        const Vec2d& shared = (j == i + 1) ? b : a;
        const Vec2d& other_a = (j == i + 1) ? a : b;
        const Vec2d& other_c = (j == i + 1) ? d : c;
        if (orientation(other_a, shared, other_c) == 0 &&
            (other_a - shared).dot(other_c - shared) > 0)
          return false;
        continue;
      }
      if (segments_touch(a, b, c, d))
        return false;
    }
  }
  return true;
}

Polygon normalized(Polygon poly)
{
  if (poly.points.size() < 3)
    throw std::invalid_argument("polygon needs at least 3 vertices, got " +
                                std::to_string(poly.points.size()));
  for (const auto& p : poly.points)
    if (!p.allFinite())
      throw std::invalid_argument("polygon has non-finite coordinates");
  if (!is_simple(poly))
    throw std::invalid_argument("polygon is self-intersecting");
  const double a = signed_area(poly);
  if (a == 0.0)
    throw std::invalid_argument("polygon has zero area");
  if (a < 0.0)
    std::reverse(poly.points.begin(), poly.points.end());
  return poly;
}

Polygon scaled(const Polygon& poly, float factor)
{
  Polygon out = poly;
  for (auto& p : out.points)
    p *= factor;
  return out;
}

std::vector<Eigen::Vector2d> RotatedRect::corners() const
{
  const double t = angle_deg * std::numbers::pi / 180.0;
  const Vec2d u(std::cos(t), std::sin(t));
  const Vec2d v(-u.y(), u.x());
  const Vec2d hu = 0.5 * width * u, hv = 0.5 * height * v;
  return {center - hu - hv, center + hu - hv, center + hu + hv, center - hu + hv};
}

RotatedRect rect_at_angle(std::span<const Eigen::Vector2d> points, double angle_rad)
{
  const Vec2d u(std::cos(angle_rad), std::sin(angle_rad));
  const Vec2d v(-u.y(), u.x());
  double umin = INFINITY, umax = -INFINITY, vmin = INFINITY, vmax = -INFINITY;
  for (const auto& p : points) {
    const double a = p.dot(u), b = p.dot(v);
    umin = std::min(umin, a);
    umax = std::max(umax, a);
    vmin = std::min(vmin, b);
    vmax = std::max(vmax, b);
  }
  RotatedRect r;
  r.center = 0.5 * (umin + umax) * u + 0.5 * (vmin + vmax) * v;
  r.width = umax - umin;
  r.height = vmax - vmin;
  double deg = angle_rad * 180.0 / std::numbers::pi;
  deg = std::fmod(deg, 180.0);
  if (deg < 0) deg += 180.0;
  if (deg >= 90.0) {
    deg -= 90.0;
    std::swap(r.width, r.height);
  }
  r.angle_deg = deg;
  return r;
}

RotatedRect min_area_rect(std::span<const Eigen::Vector2d> points)
{
  if (points.empty())
    throw std::invalid_argument("min_area_rect: empty point set");
  const auto hull = convex_hull<double>({points.begin(), points.end()});
  if (hull.size() == 1)
    return rect_at_angle(hull, 0.0);

  RotatedRect best;
  bool first = true;
  const std::size_t n = hull.size();
  const std::size_t edges = n == 2 ? 1 : n;
  for (std::size_t i = 0; i < edges; ++i) {
    const Vec2d e = hull[(i + 1) % n] - hull[i];
    const RotatedRect r = rect_at_angle(hull, std::atan2(e.y(), e.x()));
    if (first || r.area() < best.area() - 1e-9) {
      best = r;
      first = false;
    }
  }
  return best;
}

} // namespace pankit
