#include "forge/field.hpp"

#include "forge/components.hpp"
#include "forge/errors.hpp"
#include "forge/layout.hpp"

#include <doctest.h>

#include "oracles.hpp"

using namespace forge;

namespace {

Polygon rect(double x0, double x1, double y0, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

TrapLayout tiling_layout(int nx, int ny, double cell) {
  Component comp;
  comp.name = "tiles";
  comp.nets["rf"] = ElectrodeRole::rf;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const std::string id = "t" + std::to_string(i) + "_" + std::to_string(j);
      if (i == 0 && j == 0) {
        comp.electrodes.push_back(
            Electrode::make(id, "rf", rect(i * cell, (i + 1) * cell, j * cell, (j + 1) * cell)));
      } else {
        comp.nets[id] = ElectrodeRole::control;
        comp.electrodes.push_back(
            Electrode::make(id, id, rect(i * cell, (i + 1) * cell, j * cell, (j + 1) * cell)));
      }
    }
  return TrapLayout::from_component(comp, "g");
}

}  // namespace

TEST_CASE("unit square potential matches the quadrature oracle and the exact cube value") {
  const Polygon sq = rect(0, 1, 0, 1);
  // From the cube's center, one face subtends exactly 1/6 of the sphere.
  CHECK(patch_potential(sq, Vec3(0.5, 0.5, 0.5)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const double q = oracles::quadrature_potential(sq, Vec3(0.5, 0.5, 0.5));
  CHECK(patch_potential(sq, Vec3(0.5, 0.5, 0.5)) == doctest::Approx(q).epsilon(1e-6));
}

TEST_CASE("random rectangles and convex polygons match the quadrature oracle") {
  oracles::Rng rng(12345);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const double x0 = rng.uniform(-80, 40), y0 = rng.uniform(-80, 40);
    const double w = rng.uniform(5, 120), h = rng.uniform(5, 120);
    const Polygon r = rect(x0, x0 + w, y0, y0 + h);

    // Convex polygon: points on an ellipse.
    Polygon conv;
    const int nv = 3 + (trial % 5);
    const double cx = rng.uniform(-40, 40), cy = rng.uniform(-40, 40);
    const double ax = rng.uniform(10, 70), by = rng.uniform(10, 70);
    const double phase = rng.uniform(0, 1);
    for (int k = 0; k < nv; ++k) {
      const double th = 2 * constants::pi * (k + phase) / nv;
      conv.push_back(Vec2(cx + ax * std::cos(th), cy + by * std::sin(th)));
    }

    for (const Polygon& poly : {r, conv}) {
      for (int pt = 0; pt < 5; ++pt) {
        const Vec3 obs(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(0.5, 80));
        const double got = patch_potential(poly, obs);
        const double want = oracles::quadrature_potential(poly, obs);
        if (want > 1e-12) {
          CHECK(got == doctest::Approx(want).epsilon(1e-6));
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 60);
}

TEST_CASE("whole-plane limit: a huge electrode pins the potential to 1") {
  const Polygon big = rect(-1e5, 1e5, -1e5, 1e5);
  CHECK(patch_potential(big, Vec3(0, 0, 10)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("far-field decay is monotone to zero") {
  const Polygon sq = rect(-10, 10, -10, 10);
  double prev = 1.0;
  for (double z : {20.0, 50.0, 120.0, 300.0, 800.0, 2000.0}) {
    const double phi = patch_potential(sq, Vec3(3, -4, z));
    CHECK(phi < prev);
    prev = phi;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("0 <= phi <= 1 above the plane") {
  oracles::Rng rng(777);
  const Polygon sq = rect(-30, 20, -10, 50);
  for (int i = 0; i < 200; ++i) {
    const Vec3 r(rng.uniform(-200, 200), rng.uniform(-200, 200), rng.uniform(0.01, 150));
    const double phi = patch_potential(sq, r);
    CHECK(phi >= 0.0);
    CHECK(phi <= 1.0);
  }
}

TEST_CASE("gradient and hessian agree with finite differences; Laplace holds") {
  oracles::Rng rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    const double x0 = rng.uniform(-60, 0), y0 = rng.uniform(-60, 0);
    const Polygon poly = rect(x0, x0 + rng.uniform(10, 80), y0, y0 + rng.uniform(10, 80));
    for (int pt = 0; pt < 10; ++pt) {
      const Vec3 r(rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(2, 60));
      double phi;
      Vec3 g;
      Mat3 h;
      patch_sample(poly, r, phi, g, h);

      const Vec3 g_fd =
          oracles::fd_gradient([&](const Vec3& q) { return patch_potential(poly, q); }, r, 1e-3);
      for (int k = 0; k < 3; ++k)
        CHECK(g(k) == doctest::Approx(g_fd(k)).epsilon(1e-5).scale(g.norm() + 1e-9));

      const Mat3 h_fd = oracles::fd_hessian_of(
          [&](const Vec3& q) {
            double p2;
            Vec3 g2;
            Mat3 h2;
            patch_sample(poly, q, p2, g2, h2);
            return g2;
          },
          r, 1e-3);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          CHECK(h(a, b) == doctest::Approx(h_fd(a, b)).epsilon(1e-4).scale(h.norm() + 1e-9));

      CHECK(std::abs(h.trace()) <= 1e-5 * h.norm());  // harmonicity
    }
  }
}

TEST_CASE("boundary values: phi -> 1 over the electrode, -> 0 over distant ground") {
  const Polygon sq = rect(-50, 50, -40, 40);
  const double zmin = 1e-3 * 80.0;  // 1e-3 x min dimension
  CHECK(patch_potential(sq, Vec3(0, 0, zmin)) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(patch_potential(sq, Vec3(500, 500, zmin)) == doctest::Approx(0.0).scale(1).epsilon(1e-3));
}

TEST_CASE("gapless tiling sums to 1 near the plane") {
  const TrapLayout grid = tiling_layout(3, 3, 40.0);
  const FieldBasis basis = FieldBasis::build(grid, GapPolicy::grounded_gaps);
  const Vec3 r(60.0, 55.0, 0.05);  // above the middle of the 3x3 block
  double sum = 0;
  for (int j = 0; j < basis.net_count(); ++j) sum += basis.potential(j, r);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("rectangle equals the sum of its two halves") {
  const Polygon whole = rect(-20, 30, -10, 25);
  const Polygon left = rect(-20, 5, -10, 25);
  const Polygon right = rect(5, 30, -10, 25);
  oracles::Rng rng(99);
  for (int i = 0; i < 20; ++i) {
    const Vec3 r(rng.uniform(-40, 60), rng.uniform(-30, 50), rng.uniform(1, 50));
    const double a = patch_potential(whole, r);
    const double b = patch_potential(left, r) + patch_potential(right, r);
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
  }
}

TEST_CASE("evaluate: linearity, superposition, below-plane guard") {
  const Component sec = make_straight_section(40, 60, 50, 60, 3);
  const TrapLayout layout = TrapLayout::from_component(sec, "s");
  const FieldBasis basis = unit_basis(layout);
  const Vec3 r(90, 3, 40);

  std::map<std::string, double> zero;
  const FieldSample s0 = basis.evaluate(zero, r);
  CHECK(s0.potential == 0.0);
  CHECK(s0.field.norm() == 0.0);

  std::map<std::string, double> v1{{"rf", 1.0}, {"s.c01", -0.5}};
  std::map<std::string, double> v2{{"s.c00", 0.25}, {"s.t01", 2.0}};
  std::map<std::string, double> v12 = v1;
  for (auto& [k, v] : v2) v12[k] += v;
  std::map<std::string, double> v1x2;
  for (auto& [k, v] : v1) v1x2[k] = 2 * v;

  const FieldSample a = basis.evaluate(v1, r);
  const FieldSample b = basis.evaluate(v2, r);
  const FieldSample ab = basis.evaluate(v12, r);
  const FieldSample a2 = basis.evaluate(v1x2, r);

  CHECK(a2.potential == doctest::Approx(2 * a.potential).epsilon(1e-14));
  CHECK((a2.field - 2 * a.field).norm() <= 1e-12 * a.field.norm());
  CHECK(ab.potential == doctest::Approx(a.potential + b.potential).epsilon(1e-12));
  CHECK((ab.field - a.field - b.field).norm() <= 1e-12 * (a.field.norm() + b.field.norm()));
  CHECK((ab.hessian - a.hessian - b.hessian).norm() <=
        1e-12 * (a.hessian.norm() + b.hessian.norm()));

  CHECK_THROWS_AS(basis.evaluate(v1, Vec3(0, 0, -1)), BelowPlane);
  CHECK_THROWS_AS(basis.evaluate(v1, Vec3(0, 0, 0)), BelowPlane);
}

TEST_CASE("field equals -grad(potential) via finite differences") {
  const Component sec = make_straight_section(40, 60, 50, 60, 3);
  const TrapLayout layout = TrapLayout::from_component(sec, "s");
  const FieldBasis basis = unit_basis(layout);
  std::map<std::string, double> volts{{"rf", 10.0}, {"s.c01", -2.0}, {"s.t00", 1.5}};

  oracles::Rng rng(31);
  for (int i = 0; i < 12; ++i) {
    const Vec3 r(rng.uniform(20, 160), rng.uniform(-30, 30), rng.uniform(15, 60));
    const FieldSample s = basis.evaluate(volts, r);
    const Vec3 grad_um = oracles::fd_gradient(
        [&](const Vec3& q) { return basis.evaluate(volts, q).potential; }, r, 1e-3);
    const Vec3 e_fd = -grad_um * 1e6;  // V/um -> V/m
    for (int k = 0; k < 3; ++k)
      CHECK(s.field(k) == doctest::Approx(e_fd(k)).epsilon(1e-5).scale(s.field.norm()));
  }
}

TEST_CASE("midline-split annexes half of each gap") {
  // Two squares separated by a 4 um gap: after the split both reach the gap
  // midline, so the summed potential just above the midline approaches 1.
  Component comp;
  comp.name = "pair";
  comp.nets["rf"] = ElectrodeRole::rf;
  comp.nets["c"] = ElectrodeRole::control;
  comp.electrodes.push_back(Electrode::make("a", "rf", rect(-44, -2, -40, 40)));
  comp.electrodes.push_back(Electrode::make("b", "c", rect(2, 44, -40, 40)));
  const TrapLayout layout = TrapLayout::from_component(comp, "p");

  const FieldBasis split = FieldBasis::build(layout, GapPolicy::midline_split);
  const FieldBasis grounded = FieldBasis::build(layout, GapPolicy::grounded_gaps);

  const Vec3 just_above_midline(0, 0, 0.05);
  double sum_split = 0, sum_grounded = 0;
  for (int j = 0; j < split.net_count(); ++j) sum_split += split.potential(j, just_above_midline);
  for (int j = 0; j < grounded.net_count(); ++j)
    sum_grounded += grounded.potential(j, just_above_midline);

  CHECK(sum_split == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(sum_grounded < 0.6);  // grounded gap under the point

  // Outward-facing edges are never annexed.
  const auto& pa = split.net_patches(split.net_index("rf"))[0];
  double min_x = 1e9;
  for (const auto& v : pa) min_x = std::min(min_x, v.x());
  CHECK(min_x == doctest::Approx(-44.0).epsilon(1e-12));
}
