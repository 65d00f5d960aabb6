#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "fco/common.hpp"

namespace fco::geometry {

using Polygon = std::vector<Vec2>;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Angle wrapped into [0, 2*pi).
inline double normalize_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a = 0.0;
  return a;
}

/// Signed smallest difference a - b, in (-pi, pi].
inline double angle_difference(double a, double b) {
  double d = normalize_angle(a - b);
  if (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
  return d;
}

inline Vec2 heading_vector(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Rectangle of the given length (along heading) and width, centered at `center`.
struct OrientedRect {
  Vec2 center = Vec2::Zero();
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  /// Corners in order front-left, front-right, rear-right, rear-left.
  std::array<Vec2, 4> corners() const;

  /// Closed containment: boundary points count as inside.
  bool contains(const Vec2& p) const;

  double circumradius() const { return 0.5 * std::hypot(length, width); }
};

/// Orientation of c relative to the directed line a->b: +1 left, -1 right, 0 collinear.
int orientation(const Vec2& a, const Vec2& b, const Vec2& c);

/// Closed segment intersection: touching endpoints and collinear overlap intersect.
bool segments_intersect(const Vec2& p0, const Vec2& p1, const Vec2& q0, const Vec2& q1);

/// Closed point-in-polygon for simple polygons (boundary inclusive).
bool polygon_contains(const Polygon& poly, const Vec2& p);

/// True if the closed segment touches the closed polygon region.
bool segment_intersects_polygon(const Vec2& p0, const Vec2& p1, const Polygon& poly);

bool segment_intersects_rect(const Vec2& p0, const Vec2& p1, const OrientedRect& rect);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Smallest distance from p to the closed rectangle region (0 when inside).
double point_rect_distance(const Vec2& p, const OrientedRect& rect);

/// Point at arc length `s` along the rectangle perimeter, starting at the front-left
/// corner and walking front-left -> front-right -> rear-right -> rear-left.
Vec2 perimeter_point(const OrientedRect& rect, double s);

/// `count` perimeter points evenly spaced by arc length.
std::vector<Vec2> perimeter_samples(const OrientedRect& rect, int count);

Polygon axis_aligned_box(const Vec2& min_corner, const Vec2& max_corner);

}  // namespace fco::geometry
