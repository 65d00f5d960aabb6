#include "fco/geometry.hpp"

#include <algorithm>

namespace fco::geometry {

std::array<Vec2, 4> OrientedRect::corners() const {
  const Vec2 forward = heading_vector(heading) * (0.5 * length);
  const Vec2 left = Vec2(-std::sin(heading), std::cos(heading)) * (0.5 * width);
  return {center + forward + left, center + forward - left, center - forward - left,
          center - forward + left};
}

bool OrientedRect::contains(const Vec2& p) const {
  const Vec2 d = p - center;
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const double along = c * d.x() + s * d.y();
  const double across = -s * d.x() + c * d.y();
  return std::abs(along) <= 0.5 * length && std::abs(across) <= 0.5 * width;
}

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

namespace {

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

}  // namespace

bool segments_intersect(const Vec2& p0, const Vec2& p1, const Vec2& q0, const Vec2& q1) {
  const int o1 = orientation(p0, p1, q0);
  const int o2 = orientation(p0, p1, q1);
  const int o3 = orientation(q0, q1, p0);
  const int o4 = orientation(q0, q1, p1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p0, p1, q0)) return true;
  if (o2 == 0 && on_segment(p0, p1, q1)) return true;
  if (o3 == 0 && on_segment(q0, q1, p0)) return true;
  if (o4 == 0 && on_segment(q0, q1, p1)) return true;
  return false;
}

bool polygon_contains(const Polygon& poly, const Vec2& p) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if (orientation(a, b, p) == 0 && on_segment(a, b, p)) return true;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_at = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x_at) inside = !inside;
    }
  }
  return inside;
}

bool segment_intersects_polygon(const Vec2& p0, const Vec2& p1, const Polygon& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (segments_intersect(p0, p1, poly[j], poly[i])) return true;
  }
  return polygon_contains(poly, p0) || polygon_contains(poly, p1);
}

bool segment_intersects_rect(const Vec2& p0, const Vec2& p1, const OrientedRect& rect) {
  const auto c = rect.corners();
  for (std::size_t i = 0; i < 4; ++i) {
    if (segments_intersect(p0, p1, c[i], c[(i + 1) % 4])) return true;
  }
  return rect.contains(p0) || rect.contains(p1);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double point_rect_distance(const Vec2& p, const OrientedRect& rect) {
  const Vec2 d = p - rect.center;
  const double c = std::cos(rect.heading);
  const double s = std::sin(rect.heading);
  const double along = std::abs(c * d.x() + s * d.y()) - 0.5 * rect.length;
  const double across = std::abs(-s * d.x() + c * d.y()) - 0.5 * rect.width;
  return std::hypot(std::max(along, 0.0), std::max(across, 0.0));
}

Vec2 perimeter_point(const OrientedRect& rect, double s) {
  const auto c = rect.corners();
  const std::array<double, 4> edge = {rect.width, rect.length, rect.width, rect.length};
  const double perimeter = 2.0 * (rect.length + rect.width);
  s = std::fmod(s, perimeter);
  if (s < 0.0) s += perimeter;
  for (std::size_t i = 0; i < 4; ++i) {
    if (s <= edge[i] || i == 3) {
      const double f = edge[i] > 0.0 ? std::min(s / edge[i], 1.0) : 0.0;
      return c[i] + f * (c[(i + 1) % 4] - c[i]);
    }
    s -= edge[i];
  }
  return c[0];
}

std::vector<Vec2> perimeter_samples(const OrientedRect& rect, int count) {
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  const double perimeter = 2.0 * (rect.length + rect.width);
  for (int i = 0; i < count; ++i) out.push_back(perimeter_point(rect, perimeter * i / count));
  return out;
}

Polygon axis_aligned_box(const Vec2& min_corner, const Vec2& max_corner) {
  return {min_corner, Vec2(max_corner.x(), min_corner.y()), max_corner,
          Vec2(min_corner.x(), max_corner.y())};
}

}  // namespace fco::geometry
