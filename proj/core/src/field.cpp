#include "forge/field.hpp"

#include "forge/constants.hpp"
#include "forge/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace forge {

namespace {

using constants::pi;

// Solid-angle fraction of one CCW polygon seen from r = (X, Y, Z), Z > 0.
// phi = (1/2pi) * sum_edges 2*atan2(num, den); den > 0 for Z > 0, so every
// term stays on the principal branch.
double kernel_potential(const Polygon& poly, double X, double Y, double Z) {
  const size_t n = poly.size();
  double acc = 0.0;
  double uj = poly[n - 1].x() - X;
  double vj = poly[n - 1].y() - Y;
  double Rj = std::sqrt(uj * uj + vj * vj + Z * Z);
  const double Z2 = Z * Z;
  for (size_t i = 0; i < n; ++i) {
    const double ui = uj, vi = vj, Ri = Rj;
    uj = poly[i].x() - X;
    vj = poly[i].y() - Y;
    Rj = std::sqrt(uj * uj + vj * vj + Z2);
    const double num = ui * vj - uj * vi;
    const double den = Ri * Rj + ui * uj + vi * vj + Z2 + Z * (Ri + Rj);
    acc += std::atan2(num, den);
  }
  return acc / pi;
}

// Potential, gradient and Hessian of one patch in a single pass.
//
// grad(phi) = -(1/2pi) sum_e (L x a) J3
// hess(phi) = -(1/2pi) sum_e [ (L x e_k)_m J3 - 3 (L x a)_m (a_k J5 - L_k K5) ]
// with a = r - A (A edge start), L = B - A, and the segment integrals
// Jp = int_0^1 dt |a - tL|^-p, K5 = int_0^1 t dt |a - tL|^-5 in closed form.
void kernel_sample(const Polygon& poly, double X, double Y, double Z, double& phi, Vec3& grad,
                   Mat3& hess) {
  const size_t n = poly.size();
  double acc = 0.0;
  grad.setZero();
  hess.setZero();
  const double Z2 = Z * Z;

  double ax = poly[n - 1].x() - X;  // -(a) components: a = r - A, store A - r
  double ay = poly[n - 1].y() - Y;
  double Ra = std::sqrt(ax * ax + ay * ay + Z2);
  for (size_t i = 0; i < n; ++i) {
    const double bx_prev = ax, by_prev = ay, Rb_prev = Ra;
    ax = poly[i].x() - X;
    ay = poly[i].y() - Y;
    Ra = std::sqrt(ax * ax + ay * ay + Z2);

    // Edge runs from vertex (i-1) to vertex i: A - r = (bx_prev, by_prev, -Z)... careful:
    // relative coordinates store vertex - r, so a = -(vertex_prev - r) etc.
    const double u1 = bx_prev, v1 = by_prev, R1 = Rb_prev;  // A - r
    const double u2 = ax, v2 = ay, R2 = Ra;                 // B - r

    const double num = u1 * v2 - u2 * v1;
    const double den = R1 * R2 + u1 * u2 + v1 * v2 + Z2 + Z * (R1 + R2);
    acc += std::atan2(num, den);

    // a = r - A = (-u1, -v1, Z); b = r - B; L = B - A (in-plane).
    const Vec3 a(-u1, -v1, Z);
    const Vec3 L(u2 - u1, v2 - v1, 0.0);
    const double alpha = a.squaredNorm();
    const double beta = a.dot(L);
    const double gamma = L.squaredNorm();
    const double na = R1, nb = R2;  // |a|, |b|
    const double delta = alpha * gamma - beta * beta;  // |a x L|^2 > 0 for Z > 0

    const double inv_na3 = 1.0 / (na * na * na);
    const double inv_nb3 = 1.0 / (nb * nb * nb);
    const double J3 = ((gamma - beta) / nb + beta / na) / delta;
    const double J5 = ((gamma - beta) * inv_nb3 + beta * inv_na3 + 2.0 * gamma * J3) / (3.0 * delta);
    const double K5 = (inv_na3 - inv_nb3) / (3.0 * gamma) + (beta / gamma) * J5;

    const Vec3 LxA = L.cross(a);
    grad += LxA * J3;
    // (L x e_k) columns: e_x -> (0, Lz, -Ly) = (0, 0, -Ly); e_y -> (Lz?,...)
    // L is in-plane, Lz = 0: L x e_x = (0, 0, -Ly), L x e_y = (0, 0, Lx)... compute generically.
    for (int k = 0; k < 3; ++k) {
      Vec3 ek = Vec3::Zero();
      ek[k] = 1.0;
      const Vec3 Lxe = L.cross(ek);
      const double ak_term = a[k] * J5 - L[k] * K5;
      for (int m = 0; m < 3; ++m) hess(m, k) += Lxe[m] * J3 - 3.0 * LxA[m] * ak_term;
    }
  }
  phi = acc / pi;
  grad *= -1.0 / (2.0 * pi);
  hess *= -1.0 / (2.0 * pi);
  // The closed form is symmetric up to roundoff; enforce it exactly.
  hess = 0.5 * (hess + hess.transpose()).eval();
}

// midline-split: push every edge that faces another electrode outward by half the
// measured clearance. Edges facing open ground are left in place.
std::vector<Polygon> apply_midline_split(const std::vector<Polygon>& polys) {
  constexpr double kMaxAnnex = 25.0;  // µm; gaps in these layouts are a few µm
  std::vector<Polygon> out;
  out.reserve(polys.size());
  for (size_t pi = 0; pi < polys.size(); ++pi) {
    const Polygon& poly = polys[pi];
    const size_t n = poly.size();
    std::vector<double> offsets(n, 0.0);
    for (size_t e = 0; e < n; ++e) {
      const Vec2 a = poly[e], b = poly[(e + 1) % n];
      const Vec2 d = (b - a).normalized();
      const Vec2 outward(d.y(), -d.x());
      const Vec2 mid = 0.5 * (a + b);
      double clearance = kMaxAnnex;
      bool found = false;
      for (size_t qi = 0; qi < polys.size(); ++qi) {
        if (qi == pi) continue;
        if (auto hit = ray_hit_distance(mid, outward, polys[qi], clearance)) {
          clearance = std::min(clearance, *hit);
          found = true;
        }
      }
      if (found) offsets[e] = 0.5 * clearance;
    }
    out.push_back(offset_polygon(poly, offsets));
  }
  return out;
}

}  // namespace

double patch_potential(const Polygon& poly, const Vec3& r) {
  return kernel_potential(poly, r.x(), r.y(), r.z());
}

void patch_sample(const Polygon& poly, const Vec3& r, double& phi, Vec3& grad, Mat3& hess) {
  kernel_sample(poly, r.x(), r.y(), r.z(), phi, grad, hess);
}

FieldBasis FieldBasis::build(const TrapLayout& layout, GapPolicy policy) {
  FieldBasis basis;
  std::vector<Polygon> all_polys;
  std::vector<int> poly_net;

  for (const auto& [net, role] : layout.nets()) {
    basis.nets_.push_back(net);
    basis.roles_.push_back(role);
  }
  basis.patches_.resize(basis.nets_.size());

  auto index_of = [&](const std::string& net) {
    for (size_t i = 0; i < basis.nets_.size(); ++i)
      if (basis.nets_[i] == net) return static_cast<int>(i);
    return -1;
  };

  for (const auto& e : layout.electrodes()) {
    all_polys.push_back(e.polygon);
    poly_net.push_back(index_of(e.net));
  }

  std::vector<Polygon> solver_polys =
      (policy == GapPolicy::midline_split) ? apply_midline_split(all_polys) : all_polys;

  for (size_t i = 0; i < solver_polys.size(); ++i)
    basis.patches_[poly_net[i]].push_back(std::move(solver_polys[i]));

  basis.rf_index_ = index_of(layout.rf_net());
  return basis;
}

int FieldBasis::net_index(const std::string& net) const {
  for (size_t i = 0; i < nets_.size(); ++i)
    if (nets_[i] == net) return static_cast<int>(i);
  throw Error("unknown net " + net);
}

std::vector<std::string> FieldBasis::control_nets() const {
  std::vector<std::string> out;
  for (size_t i = 0; i < nets_.size(); ++i)
    if (roles_[i] == ElectrodeRole::control) out.push_back(nets_[i]);
  return out;
}

double FieldBasis::potential(int net, const Vec3& r) const {
  double acc = 0;
  for (const auto& p : patches_[net]) acc += kernel_potential(p, r.x(), r.y(), r.z());
  return acc;
}

Vec3 FieldBasis::gradient(int net, const Vec3& r) const {
  double phi;
  Vec3 g, acc = Vec3::Zero();
  Mat3 h;
  for (const auto& p : patches_[net]) {
    kernel_sample(p, r.x(), r.y(), r.z(), phi, g, h);
    acc += g;
  }
  return acc;
}

Mat3 FieldBasis::hessian(int net, const Vec3& r) const {
  double phi;
  Vec3 g;
  Mat3 h, acc = Mat3::Zero();
  for (const auto& p : patches_[net]) {
    kernel_sample(p, r.x(), r.y(), r.z(), phi, g, h);
    acc += h;
  }
  return acc;
}

void FieldBasis::sample(int net, const Vec3& r, double& phi, Vec3& grad, Mat3& hess) const {
  phi = 0;
  grad.setZero();
  hess.setZero();
  double p;
  Vec3 g;
  Mat3 h;
  for (const auto& patch : patches_[net]) {
    kernel_sample(patch, r.x(), r.y(), r.z(), p, g, h);
    phi += p;
    grad += g;
    hess += h;
  }
}

FieldSample FieldBasis::evaluate(std::span<const double> voltages, const Vec3& r) const {
  if (r.z() <= 0) throw BelowPlane("evaluate: z must be > 0 (got z=" + std::to_string(r.z()) + ")");
  if (static_cast<int>(voltages.size()) != net_count())
    throw Error("evaluate: voltage vector size mismatch");
  FieldSample s;
  double phi;
  Vec3 g;
  Mat3 h;
  for (int j = 0; j < net_count(); ++j) {
    const double v = voltages[j];
    if (v == 0.0) continue;
    sample(j, r, phi, g, h);
    s.potential += v * phi;
    s.field -= v * g * constants::per_micron_to_per_meter;
    s.hessian += v * h * constants::per_micron_to_per_meter * constants::per_micron_to_per_meter;
  }
  return s;
}

FieldSample FieldBasis::evaluate(const std::map<std::string, double>& voltages,
                                 const Vec3& r) const {
  std::vector<double> v(net_count(), 0.0);
  for (const auto& [net, volt] : voltages) v[net_index(net)] = volt;
  return evaluate(std::span<const double>(v), r);
}

}  // namespace forge
