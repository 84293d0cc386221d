#include "forge/pseudo.hpp"

#include "forge/components.hpp"
#include "forge/errors.hpp"

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"

using namespace forge;

namespace {

struct FiveWire {
  TrapLayout layout;
  FieldBasis basis;
  RfDrive drive;

  explicit FiveWire(double wa = 40, double wb = 60, double gap = 50, int segments = 20)
      : layout(TrapLayout::from_component(
            make_straight_section(wa, wb, gap, 60, segments), "s")),
        basis(unit_basis(layout)),
        drive(RfDrive::mg24(113.0, 90.7e6)) {}
};

}  // namespace

TEST_CASE("pseudopotential formula against the frozen arithmetic oracle") {
  // Single square patch; scale the drive so |E| at the probe is exactly 1e5 V/m.
  Component comp;
  comp.name = "patch";
  comp.nets["rf"] = ElectrodeRole::rf;
  comp.electrodes.push_back(
      Electrode::make("e", "rf", Polygon{{-50, -50}, {50, -50}, {50, 50}, {-50, 50}}));
  const TrapLayout layout = TrapLayout::from_component(comp, "p");
  const FieldBasis basis = unit_basis(layout);

  const Vec3 r(10, 5, 30);
  const double grad_norm = basis.gradient(basis.rf_net_index(), r).norm();  // 1/um
  const double amplitude = 1e5 / (grad_norm * 1e6);
  const RfDrive drive = RfDrive::mg24(amplitude, 90.7e6);

  // Independent arithmetic: e * (1e5)^2 / (4 m Omega^2) = 0.0309468 eV.
  CHECK(pseudopotential(basis, drive, r) ==
        doctest::Approx(0.030946800297968525).epsilon(1e-9));
}

TEST_CASE("pseudopotential scalings: amplitude^2, 1/Omega^2, 1/mass") {
  const FiveWire fw;
  const Vec3 r(600, 10, 30);
  const double base = pseudopotential(fw.basis, fw.drive, r);
  CHECK(base > 0);

  RfDrive d2 = fw.drive;
  d2.amplitude *= 2.0;
  CHECK(pseudopotential(fw.basis, d2, r) == doctest::Approx(4.0 * base).epsilon(1e-12));

  RfDrive d3 = fw.drive;
  d3.omega_rf *= 3.0;
  CHECK(pseudopotential(fw.basis, d3, r) == doctest::Approx(base / 9.0).epsilon(1e-12));

  RfDrive d4 = fw.drive;
  d4.ion_mass *= 2.5;
  CHECK(pseudopotential(fw.basis, d4, r) == doctest::Approx(base / 2.5).epsilon(1e-12));

  CHECK_THROWS_AS(pseudopotential(fw.basis, fw.drive, Vec3(0, 0, -1)), BelowPlane);
}

TEST_CASE("pseudopotential gradient and hessian match finite differences") {
  const FiveWire fw;
  oracles::Rng rng(11);
  for (int i = 0; i < 6; ++i) {
    const Vec3 r(rng.uniform(500, 700), rng.uniform(-15, 15), rng.uniform(25, 55));

    const Vec3 g = pseudopotential_gradient(fw.basis, fw.drive, r);
    const Vec3 g_fd = oracles::fd_gradient(
        [&](const Vec3& q) { return pseudopotential(fw.basis, fw.drive, q); }, r, 1e-3);
    for (int k = 0; k < 3; ++k)
      CHECK(g(k) == doctest::Approx(g_fd(k)).epsilon(1e-5).scale(g.norm() + 1e-18));

    // Hessian vs direct second differences of the pseudopotential values.
    const Mat3 h = pseudopotential_hessian(fw.basis, fw.drive, r);
    const double step = 0.05;
    Mat3 h_fd;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        Vec3 pp = r, pm = r, mp = r, mm = r;
        pp(a) += step; pp(b) += step;
        pm(a) += step; pm(b) -= step;
        mp(a) -= step; mp(b) += step;
        mm(a) -= step; mm(b) -= step;
        h_fd(a, b) = (pseudopotential(fw.basis, fw.drive, pp) -
                      pseudopotential(fw.basis, fw.drive, pm) -
                      pseudopotential(fw.basis, fw.drive, mp) +
                      pseudopotential(fw.basis, fw.drive, mm)) /
                     (4 * step * step);
      }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        CHECK(h(a, b) == doctest::Approx(h_fd(a, b)).epsilon(1e-4).scale(h.norm()));
  }
}

TEST_CASE("find_null: symmetric rails put the null on the symmetry plane") {
  const FiveWire fw(50, 50, 50, 20);
  const NullPoint null = find_null(fw.basis, fw.drive, Vec3(600, 3, 35));
  CHECK(null.true_null);
  CHECK(std::abs(null.position.y()) < 1e-3);

  // 1-D bisection oracle on |E| along the symmetry line x=600, y=0.
  const int rf = fw.basis.rf_net_index();
  auto e_norm = [&](double z) { return fw.basis.gradient(rf, Vec3(600, 0, z)).norm(); };
  double lo = 10, hi = 100;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (e_norm(m1) < e_norm(m2)) hi = m2; else lo = m1;
  }
  const double z_oracle = 0.5 * (lo + hi);
  CHECK(null.position.z() == doctest::Approx(z_oracle).epsilon(0.01 / z_oracle));

  // Pseudopotential vanishes at the null.
  CHECK(pseudopotential(fw.basis, fw.drive, null.position) < 1e-12);
}

TEST_CASE("find_null: asymmetric rails shift the null and rotate the quadrupole") {
  const FiveWire fw;  // 40/60
  const NullPoint null = find_null(fw.basis, fw.drive, Vec3(600, 0, 40));
  CHECK(null.true_null);
  CHECK(std::abs(null.position.y()) > 0.5);  // off the gap centerline

  // Transverse principal axes of the rf curvature, rotated away from y/z.
  const Mat3 h = fw.basis.hessian(fw.basis.rf_net_index(), null.position);
  Eigen::SelfAdjointEigenSolver<Mat3> es(h);
  double min_angle_deg = 90;
  for (int i = 0; i < 3; ++i) {
    const Vec3 axis = es.eigenvectors().col(i);
    if (std::abs(axis.x()) > 0.5) continue;  // the axial direction
    const double to_y = std::acos(std::min(1.0, std::abs(axis.y()))) * 180 / constants::pi;
    const double to_z = std::acos(std::min(1.0, std::abs(axis.z()))) * 180 / constants::pi;
    min_angle_deg = std::min({min_angle_deg, to_y, to_z});
  }
  CHECK(min_angle_deg > 5.0);

  // Symmetric rails for contrast: axes aligned with y/z.
  const FiveWire sym(50, 50, 50, 20);
  const NullPoint sn = find_null(sym.basis, sym.drive, Vec3(600, 0, 40));
  const Mat3 hs = sym.basis.hessian(sym.basis.rf_net_index(), sn.position);
  Eigen::SelfAdjointEigenSolver<Mat3> es2(hs);
  double max_misalign = 0;
  for (int i = 0; i < 3; ++i) {
    const Vec3 axis = es2.eigenvectors().col(i).cwiseAbs();
    max_misalign = std::max(max_misalign, 1.0 - axis.maxCoeff());
  }
  CHECK(max_misalign < 1e-3);
}

TEST_CASE("find_null: seed far outside the basin fails to converge") {
  const FiveWire fw;
  CHECK_THROWS_AS(find_null(fw.basis, fw.drive, Vec3(50000, 50000, 5), 50), NoConvergence);
}

TEST_CASE("trace_tube: straight section stays straight, spacing and counting hold") {
  const FiveWire fw;  // 1200 um long
  const NullPoint null = find_null(fw.basis, fw.drive, Vec3(350, 0, 40));
  const TubePath path = trace_tube(fw.basis, fw.drive, null.position, 1.0, 500.0, Vec3(1, 0, 0));

  CHECK(path.points.size() == 501);

  // Straightness: all points within 0.05 um of the first point's (y, z).
  double max_dev = 0;
  for (const auto& p : path.points)
    max_dev = std::max(max_dev, (Vec2(p.y(), p.z()) -
                                 Vec2(path.points[0].y(), path.points[0].z())).norm());
  CHECK(max_dev < 0.05);

  // Spacing within 1 percent of nominal.
  for (size_t i = 1; i < path.points.size(); ++i) {
    const double d = (path.points[i] - path.points[i - 1]).norm();
    CHECK(std::abs(d - 1.0) < 0.01);
  }

  // Tangent continuity and right-handed frames.
  for (size_t i = 0; i < path.frames.size(); ++i) {
    const Mat3& f = path.frames[i];
    CHECK(std::abs(f.determinant() - 1.0) < 1e-9);
    if (i > 0) CHECK(f.col(0).dot(path.frames[i - 1].col(0)) > std::cos(10 * constants::pi / 180));
  }
}

TEST_CASE("trace_tube: 850 um at 1 um steps gives 851 points") {
  const FiveWire fw;
  const NullPoint null = find_null(fw.basis, fw.drive, Vec3(175, 0, 40));
  const TubePath path = trace_tube(fw.basis, fw.drive, null.position, 1.0, 850.0, Vec3(1, 0, 0));
  CHECK(path.points.size() == 851);
}

TEST_CASE("trace_tube is direction-reversible") {
  const FiveWire fw;
  const NullPoint null = find_null(fw.basis, fw.drive, Vec3(500, 0, 40));
  const TubePath fwd = trace_tube(fw.basis, fw.drive, null.position, 1.0, 100.0, Vec3(1, 0, 0));
  const TubePath back =
      trace_tube(fw.basis, fw.drive, fwd.points.back(), 1.0, 100.0, Vec3(-1, 0, 0));
  CHECK((back.points.back() - fwd.points.front()).norm() < 0.1);
}

TEST_CASE("bump profile is flat and tiny far from any junction") {
  const FiveWire fw;
  const NullPoint null = find_null(fw.basis, fw.drive, Vec3(450, 0, 40));
  const TubePath path = trace_tube(fw.basis, fw.drive, null.position, 1.0, 300.0, Vec3(1, 0, 0));
  const BumpProfile profile = bump_profile(path);
  CHECK(profile.samples.size() == path.points.size());
  CHECK(profile.max_eV < 1e-6);
  // Arclength is measured from the path end.
  CHECK(profile.samples.front().first == doctest::Approx(0.0));
  CHECK(profile.samples.back().first == doctest::Approx(path.total_length()).epsilon(1e-6));
}

TEST_CASE("a closed ~1 meV pseudopotential contour surrounds the null at the test drive") {
  const FiveWire fw;  // 113 V, 90.7 MHz, Mg24
  const NullPoint null = find_null(fw.basis, fw.drive, Vec3(600, 0, 40));
  CHECK(pseudopotential(fw.basis, fw.drive, null.position) < 1e-6);

  // On some transverse ring around the null every sample exceeds 1 meV, so the
  // 1 meV sublevel set around the null is bounded (a closed contour exists).
  bool found_ring = false;
  for (double radius : {4.0, 6.0, 8.0, 12.0, 16.0}) {
    double ring_min = 1e300;
    for (int k = 0; k < 48; ++k) {
      const double th = 2 * constants::pi * k / 48;
      const Vec3 r = null.position + radius * (std::cos(th) * Vec3::UnitY() +
                                               std::sin(th) * Vec3::UnitZ());
      if (r.z() <= 0.5) { ring_min = 0; break; }
      ring_min = std::min(ring_min, pseudopotential(fw.basis, fw.drive, r));
    }
    if (ring_min > 1e-3) {
      found_ring = true;
      break;
    }
  }
  CHECK(found_ring);
}

TEST_CASE("secular modes from an analytic quadrupole curvature") {
  const double m = 24 * constants::atomic_mass_unit;
  Mat3 h = Mat3::Zero();
  const double kx = 1e-12, ky = 4e-12, kz = 9e-12;  // J/m^2
  h(0, 0) = kx;
  h(1, 1) = ky;
  h(2, 2) = kz;
  const SecularModes modes = secular_from_curvature(h, m);
  CHECK(modes.frequencies_hz[0] ==
        doctest::Approx(std::sqrt(kx / m) / (2 * constants::pi)).epsilon(1e-9));
  CHECK(modes.frequencies_hz[1] ==
        doctest::Approx(std::sqrt(ky / m) / (2 * constants::pi)).epsilon(1e-9));
  CHECK(modes.frequencies_hz[2] ==
        doctest::Approx(std::sqrt(kz / m) / (2 * constants::pi)).epsilon(1e-9));

  h(0, 0) = -1e-12;
  CHECK_THROWS_AS(secular_from_curvature(h, m), NotAMinimum);
  try {
    secular_from_curvature(h, m);
  } catch (const NotAMinimum& e) {
    CHECK(e.unstable_axis == 0);
  }
}
