#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fco/geometry.hpp"
#include "support.hpp"

using namespace fco;
using namespace fco::geometry;

TEST_CASE("corners run front-left, front-right, rear-right, rear-left") {
  const OrientedRect r{Vec2(1.0, 2.0), 0.0, 4.0, 2.0};
  const auto c = r.corners();
  CHECK(c[0].isApprox(Vec2(3.0, 3.0)));
  CHECK(c[1].isApprox(Vec2(3.0, 1.0)));
  CHECK(c[2].isApprox(Vec2(-1.0, 1.0)));
  CHECK(c[3].isApprox(Vec2(-1.0, 3.0)));
}

TEST_CASE("rectangle containment is closed") {
  const OrientedRect r{Vec2::Zero(), 0.0, 4.0, 2.0};
  CHECK(r.contains(Vec2(2.0, 1.0)));
  CHECK(r.contains(Vec2(0.0, 0.0)));
  CHECK_FALSE(r.contains(Vec2(2.0001, 0.0)));
  const OrientedRect turned{Vec2::Zero(), std::numbers::pi / 2, 4.0, 2.0};
  CHECK(turned.contains(Vec2(0.0, 1.9)));
  CHECK_FALSE(turned.contains(Vec2(1.9, 0.0)));
}

TEST_CASE("angles wrap into [0, 2pi) and differences into (-pi, pi]") {
  CHECK(normalize_angle(-std::numbers::pi / 2) == doctest::Approx(1.5 * std::numbers::pi));
  CHECK(normalize_angle(2 * std::numbers::pi) == 0.0);
  CHECK(angle_difference(0.1, 2 * std::numbers::pi - 0.1) == doctest::Approx(0.2));
  CHECK(angle_difference(std::numbers::pi, 0.0) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("segment intersection counts touching and collinear overlap") {
  CHECK(segments_intersect(Vec2(0, 0), Vec2(2, 2), Vec2(0, 2), Vec2(2, 0)));
  CHECK(segments_intersect(Vec2(0, 0), Vec2(1, 0), Vec2(1, 0), Vec2(1, 5)));  // endpoint touch
  CHECK(segments_intersect(Vec2(0, 0), Vec2(3, 0), Vec2(1, 0), Vec2(5, 0)));  // overlap
  CHECK_FALSE(segments_intersect(Vec2(0, 0), Vec2(1, 0), Vec2(2, 0), Vec2(3, 0)));
  CHECK_FALSE(segments_intersect(Vec2(0, 0), Vec2(1, 1), Vec2(0, 1), Vec2(0.4, 0.6) + Vec2(0, 0.1)));
}

TEST_CASE("polygon containment and segment tests are closed") {
  const Polygon box = axis_aligned_box(Vec2(0, 0), Vec2(2, 2));
  CHECK(polygon_contains(box, Vec2(1, 1)));
  CHECK(polygon_contains(box, Vec2(2, 1)));
  CHECK(polygon_contains(box, Vec2(0, 0)));
  CHECK_FALSE(polygon_contains(box, Vec2(3, 1)));
  CHECK(segment_intersects_polygon(Vec2(-1, 1), Vec2(3, 1), box));
  CHECK(segment_intersects_polygon(Vec2(0.5, 0.5), Vec2(1.5, 1.5), box));  // fully inside
  CHECK(segment_intersects_polygon(Vec2(-1, 2), Vec2(3, 2), box));         // grazes the top edge
  CHECK_FALSE(segment_intersects_polygon(Vec2(-1, 2.01), Vec2(3, 2.01), box));

  const OrientedRect r{Vec2(5, 0), 0.0, 2.0, 2.0};
  CHECK(segment_intersects_rect(Vec2(0, 0), Vec2(10, 0), r));
  CHECK(segment_intersects_rect(Vec2(0, 1), Vec2(10, 1), r));
  CHECK_FALSE(segment_intersects_rect(Vec2(0, 1.1), Vec2(10, 1.1), r));
  CHECK_FALSE(segment_intersects_rect(Vec2(0, 0), Vec2(3.9, 0), r));
}

TEST_CASE("distances to segments and rectangles") {
  CHECK(point_segment_distance(Vec2(0, 1), Vec2(-1, 0), Vec2(1, 0)) == doctest::Approx(1.0));
  CHECK(point_segment_distance(Vec2(3, 0), Vec2(-1, 0), Vec2(1, 0)) == doctest::Approx(2.0));
  const OrientedRect r{Vec2::Zero(), 0.0, 4.0, 2.0};
  CHECK(point_rect_distance(Vec2(0.5, 0.5), r) == 0.0);
  CHECK(point_rect_distance(Vec2(5, 0), r) == doctest::Approx(3.0));
  CHECK(point_rect_distance(Vec2(5, 5), r) == doctest::Approx(5.0));
}

TEST_CASE("perimeter samples start at front-left and are evenly spaced") {
  const OrientedRect r{Vec2::Zero(), 0.0, 4.0, 2.0};
  const auto pts = perimeter_samples(r, 6);  // perimeter 12, spacing 2
  REQUIRE(pts.size() == 6);
  CHECK(pts[0].isApprox(Vec2(2, 1)));
  CHECK(pts[1].isApprox(Vec2(2, -1)));
  CHECK(pts[2].isApprox(Vec2(0, -1)));
  CHECK(pts[3].isApprox(Vec2(-2, -1)));
  CHECK(pts[4].isApprox(Vec2(-2, 1)));
  CHECK(pts[5].isApprox(Vec2(0, 1)));
}

TEST_CASE("property: perimeter samples lie on the rectangle boundary") {
  testing::Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = gen.pose(0, 50.0);
    const auto rect = v.footprint();
    for (const auto& p : perimeter_samples(rect, 16)) {
      CHECK(point_rect_distance(p, rect) == doctest::Approx(0.0).epsilon(1e-9));
      const Vec2 d = p - rect.center;
      const double along = std::abs(std::cos(rect.heading) * d.x() + std::sin(rect.heading) * d.y());
      const double across = std::abs(-std::sin(rect.heading) * d.x() + std::cos(rect.heading) * d.y());
      const bool on_edge = std::abs(along - 0.5 * rect.length) < 1e-9 || std::abs(across - 0.5 * rect.width) < 1e-9;
      CHECK(on_edge);
    }
  }
}
