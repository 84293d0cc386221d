#include "forge/geometry.hpp"

#include <doctest.h>

#include "oracles.hpp"

using namespace forge;

namespace {
Polygon square(double s) { return {{0, 0}, {s, 0}, {s, s}, {0, s}}; }
}  // namespace

TEST_CASE("signed area and orientation") {
  CHECK(signed_area(square(2)) == doctest::Approx(4.0));
  Polygon cw = square(2);
  std::reverse(cw.begin(), cw.end());
  CHECK(signed_area(cw) == doctest::Approx(-4.0));
  CHECK(is_ccw(square(2)));
  CHECK(!is_ccw(cw));
}

TEST_CASE("simplicity check") {
  CHECK(polygon_is_simple(square(1)));
  const Polygon bowtie = {{0, 0}, {2, 2}, {2, 0}, {0, 2}};
  CHECK(!polygon_is_simple(bowtie));
  const Polygon lshape = {{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 3}, {0, 3}};
  CHECK(polygon_is_simple(lshape));
}

TEST_CASE("point in polygon includes the boundary") {
  const Polygon sq = square(2);
  CHECK(point_in_polygon(sq, {1, 1}));
  CHECK(point_in_polygon(sq, {0, 1}));   // on edge
  CHECK(point_in_polygon(sq, {2, 2}));   // corner
  CHECK(!point_in_polygon(sq, {3, 1}));
  CHECK(!point_in_polygon(sq, {-0.001, 1}));
}

TEST_CASE("triangulation covers the polygon area") {
  const Polygon lshape = {{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 3}, {0, 3}};
  const auto tris = triangulate(lshape);
  CHECK(tris.size() == lshape.size() - 2);
  const Vec2 inside = interior_point(lshape);
  CHECK(point_in_polygon(lshape, inside));
}

TEST_CASE("overlap area") {
  const Polygon a = square(2);
  Polygon b = square(2);
  for (auto& v : b) v += Vec2(1, 1);
  CHECK(overlap_area(a, b) == doctest::Approx(1.0).epsilon(1e-9));

  Polygon touching = square(2);
  for (auto& v : touching) v += Vec2(2, 0);  // shares an edge only
  CHECK(overlap_area(a, touching) == doctest::Approx(0.0).scale(1).epsilon(1e-9));

  Polygon contained = {{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}, {0.5, 1.5}};
  CHECK(overlap_area(a, contained) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(overlap_area(contained, a) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("per-edge offsetting with miter joins") {
  const Polygon sq = square(2);
  const double offs[4] = {0.5, 0.5, 0.5, 0.5};
  const Polygon grown = offset_polygon(sq, offs);
  CHECK(signed_area(grown) == doctest::Approx(9.0).epsilon(1e-12));  // 3x3

  const double one_side[4] = {0.5, 0.0, 0.0, 0.0};  // only the bottom edge (y=0)
  const Polygon bottom = offset_polygon(sq, one_side);
  CHECK(signed_area(bottom) == doctest::Approx(5.0).epsilon(1e-12));  // 2x2.5
  double min_y = 1e9;
  for (const auto& v : bottom) min_y = std::min(min_y, v.y());
  CHECK(min_y == doctest::Approx(-0.5));
}

TEST_CASE("ray casting distance") {
  const Polygon sq = square(2);
  auto hit = ray_hit_distance({-1, 1}, {1, 0}, sq, 100);
  REQUIRE(hit.has_value());
  CHECK(*hit == doctest::Approx(1.0));
  CHECK(!ray_hit_distance({-1, 1}, {-1, 0}, sq, 100).has_value());
  CHECK(!ray_hit_distance({-1, 5}, {1, 0}, sq, 100).has_value());
}

TEST_CASE("rigid transforms preserve area and orientation") {
  oracles::Rng rng(5);
  const Polygon sq = square(3);
  for (int i = 0; i < 10; ++i) {
    RigidTransform t;
    t.rotation = rng.uniform(-3, 3);
    t.translation = Vec2(rng.uniform(-50, 50), rng.uniform(-50, 50));
    t.mirrored = (i % 2 == 0);
    const Polygon moved = t.apply(sq);
    CHECK(signed_area(moved) == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(is_ccw(moved));
  }
}
