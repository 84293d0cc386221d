#include "forge/pseudo.hpp"

#include "forge/constants.hpp"
#include "forge/errors.hpp"
#include "forge/optim.hpp"

#include <Eigen/Geometry>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace forge {

namespace {

using constants::elementary_charge;
using constants::per_micron_to_per_meter;
using constants::pi;

// q^2 A^2 / (4 m Omega^2 e) with the µm->m gradient conversion folded in, so that
// phi_pp_eV = prefactor * |grad_um(phi_rf)|^2.
double pseudo_prefactor_eV(const RfDrive& d) {
  const double e_scale = d.amplitude * per_micron_to_per_meter;  // V/m per (1/µm)
  return d.ion_charge * d.ion_charge * e_scale * e_scale /
         (4.0 * d.ion_mass * d.omega_rf * d.omega_rf * elementary_charge);
}

void require_above_plane(const Vec3& r) {
  if (r.z() <= 0) throw BelowPlane("pseudopotential: z must be > 0");
}

}  // namespace

RfDrive RfDrive::mg24(double amplitude_V, double rf_freq_Hz) {
  return RfDrive{amplitude_V, 2.0 * pi * rf_freq_Hz, 24.0 * constants::atomic_mass_unit,
                 elementary_charge};
}

void RfDrive::validate() const {
  if (amplitude <= 0 || omega_rf <= 0 || ion_mass <= 0 || ion_charge <= 0)
    throw Error("RfDrive: all parameters must be positive");
}

double pseudopotential(const FieldBasis& basis, const RfDrive& drive, const Vec3& r) {
  require_above_plane(r);
  const Vec3 g = basis.gradient(basis.rf_net_index(), r);
  return pseudo_prefactor_eV(drive) * g.squaredNorm();
}

Vec3 pseudopotential_gradient(const FieldBasis& basis, const RfDrive& drive, const Vec3& r) {
  require_above_plane(r);
  double phi;
  Vec3 g;
  Mat3 h;
  basis.sample(basis.rf_net_index(), r, phi, g, h);
  return 2.0 * pseudo_prefactor_eV(drive) * (h * g);
}

Mat3 pseudopotential_hessian(const FieldBasis& basis, const RfDrive& drive, const Vec3& r,
                             double fd_step_um) {
  require_above_plane(r);
  Mat3 out;
  for (int k = 0; k < 3; ++k) {
    Vec3 rp = r, rm = r;
    rp(k) += fd_step_um;
    rm(k) -= fd_step_um;
    out.col(k) =
        (pseudopotential_gradient(basis, drive, rp) - pseudopotential_gradient(basis, drive, rm)) /
        (2.0 * fd_step_um);
  }
  return 0.5 * (out + out.transpose()).eval();
}

double rf_field_norm(const FieldBasis& basis, const RfDrive& drive, const Vec3& r) {
  return drive.amplitude * per_micron_to_per_meter *
         basis.gradient(basis.rf_net_index(), r).norm();
}

NullPoint find_null(const FieldBasis& basis, const RfDrive& drive, const Vec3& seed,
                    int max_iters) {
  require_above_plane(seed);
  const int rf = basis.rf_net_index();

  const double seed_norm = basis.gradient(rf, seed).norm();
  const double target = 1e-4 * seed_norm;
  const double travel_limit = 50.0 * std::max(seed.z(), 10.0);

  Vec3 r = seed;
  double phi;
  Vec3 g;
  Mat3 h;
  basis.sample(rf, r, phi, g, h);
  double step_cap = 0.5 * std::max(seed.z(), 5.0);

  // Truncated Gauss-Newton on E(r) ~ g + H dr. Near the null the curvature is
  // rank-deficient along the tube; truncating small singular values keeps the
  // iterate at the seed's station instead of sliding down the tube.
  auto solve_step = [&](const Mat3& hess, const Vec3& grad) {
    Eigen::JacobiSVD<Mat3> svd(hess, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = 0.05 * sv(0);
    Vec3 scaled = svd.matrixU().transpose() * (-grad);
    for (int i = 0; i < 3; ++i) scaled(i) = (sv(i) > cutoff) ? scaled(i) / sv(i) : 0.0;
    return Vec3(svd.matrixV() * scaled);
  };

  for (int it = 0; it < max_iters; ++it) {
    const bool is_null = g.norm() < target;
    Vec3 step = solve_step(h, g);
    if (!step.allFinite())
      throw NoConvergence("find_null: singular curvature at the iterate");
    if (is_null && step.norm() < 1e-7)
      return {r, drive.amplitude * per_micron_to_per_meter * g.norm(), true};
    if (step.norm() > step_cap) step *= step_cap / step.norm();

    bool accepted = false;
    for (int halving = 0; halving < 25; ++halving) {
      const Vec3 cand = r + step;
      if (cand.z() <= 1e-3 || (cand - seed).norm() > travel_limit)
        throw NoConvergence("find_null: left the search region (seed outside basin?)");
      double cphi;
      Vec3 cg;
      Mat3 ch;
      basis.sample(rf, cand, cphi, cg, ch);
      if (cg.squaredNorm() < g.squaredNorm()) {
        r = cand;
        g = cg;
        h = ch;
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step.norm() < 1e-12) break;
    }
    if (!accepted) {
      // Stationary without reaching the target: a residual minimum (no true null).
      if (g.norm() < target)
        return {r, drive.amplitude * per_micron_to_per_meter * g.norm(), true};
      const double grad_obj = (h.transpose() * g).norm();
      if (grad_obj < 1e-6 * std::max(1e-12, g.norm() * h.norm()))
        return {r, drive.amplitude * per_micron_to_per_meter * g.norm(), false};
      throw NoConvergence("find_null: no descent direction (seed outside basin?)");
    }
  }
  throw NoConvergence("find_null: iteration limit reached");
}

namespace {

// Minimize |E_rf|^2 within the plane through p normal to `tangent`.
// 2-D Newton with a Nelder-Mead fallback; returns false when lost.
bool transverse_correct(const FieldBasis& basis, int rf, Vec3& p, const Vec3& tangent,
                        double max_excursion) {
  // Transverse frame.
  Vec3 n1 = std::abs(tangent.z()) < 0.9 ? tangent.cross(Vec3::UnitZ()) : tangent.cross(Vec3::UnitX());
  n1.normalize();
  const Vec3 n2 = tangent.cross(n1);
  Eigen::Matrix<double, 3, 2> U;
  U.col(0) = n1;
  U.col(1) = n2;

  const Vec3 origin = p;
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  double phi;
  Vec3 g;
  Mat3 h;

  auto position = [&](const Eigen::Vector2d& t) -> Vec3 { return origin + U * t; };
  basis.sample(rf, origin, phi, g, h);
  double f = g.squaredNorm();

  bool newton_ok = true;
  for (int it = 0; it < 20; ++it) {
    const Eigen::Matrix<double, 3, 2> JU = h * U;
    const Eigen::Matrix2d A = JU.transpose() * JU;
    const Eigen::Vector2d b = -JU.transpose() * g;
    Eigen::Vector2d step = A.ldlt().solve(b);
    if (!step.allFinite()) {
      newton_ok = false;
      break;
    }
    // Keep the corrector transverse and local.
    if ((d + step).norm() > max_excursion) {
      newton_ok = false;
      break;
    }
    const Vec3 cand = position(d + step);
    if (cand.z() <= 1e-3) return false;
    double cphi;
    Vec3 cg;
    Mat3 ch;
    basis.sample(rf, cand, cphi, cg, ch);
    const double cf = cg.squaredNorm();
    if (cf <= f) {
      d += step;
      g = cg;
      h = ch;
      const bool tiny = step.norm() < 1e-9;
      f = cf;
      if (tiny) break;
    } else {
      // Newton overshoot: halve once, then give up on Newton.
      step *= 0.5;
      const Vec3 cand2 = position(d + step);
      if (cand2.z() <= 1e-3) return false;
      basis.sample(rf, cand2, cphi, cg, ch);
      if (cg.squaredNorm() <= f) {
        d += step;
        g = cg;
        h = ch;
        f = cg.squaredNorm();
      } else {
        newton_ok = (it > 0);  // already made progress earlier
        break;
      }
    }
  }

  if (!newton_ok) {
    // Derivative-free fallback in the transverse plane.
    SimplexConfig cfg;
    cfg.initial_step = {0.05 * max_excursion};
    cfg.f_tol = 1e-24;
    cfg.x_tol = 1e-9;
    cfg.max_evals = 400;
    auto obj = [&](const Eigen::VectorXd& t) {
      const Vec3 q = origin + U * Eigen::Vector2d(t(0), t(1));
      if (q.z() <= 1e-3 || Eigen::Vector2d(t(0), t(1)).norm() > max_excursion)
        return std::numeric_limits<double>::infinity();
      return basis.gradient(rf, q).squaredNorm();
    };
    Eigen::VectorXd t0 = d;
    const auto res = nelder_mead(obj, t0, cfg);
    if (!std::isfinite(res.f)) return false;
    d = res.x;
  }

  p = position(d);
  return true;
}

Vec3 smallest_curvature_direction(const Mat3& h, const Vec3& hint) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(h);
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(es.eigenvalues()(i)) < std::abs(es.eigenvalues()(best))) best = i;
  Vec3 dir = es.eigenvectors().col(best);
  if (dir.dot(hint) < 0) dir = -dir;
  return dir;
}

}  // namespace

double TubePath::arclength(size_t i) const {
  double s = 0;
  for (size_t k = 1; k <= i && k < points.size(); ++k) s += (points[k] - points[k - 1]).norm();
  return s;
}

Vec3 TubePath::at_arclength(double s) const {
  if (points.size() < 2) return points.empty() ? Vec3::Zero() : points.front();
  double acc = 0;
  for (size_t k = 1; k < points.size(); ++k) {
    const double seg = (points[k] - points[k - 1]).norm();
    if (acc + seg >= s || k + 1 == points.size()) {
      const double t = seg > 0 ? (s - acc) / seg : 0.0;
      return points[k - 1] + t * (points[k] - points[k - 1]);
    }
    acc += seg;
  }
  return points.back();
}

TubePath TubePath::reversed() const {
  TubePath out = *this;
  std::reverse(out.points.begin(), out.points.end());
  std::reverse(out.pseudopotential.begin(), out.pseudopotential.end());
  std::reverse(out.frames.begin(), out.frames.end());
  for (auto& f : out.frames) {
    f.col(0) = -f.col(0);
    f.col(2) = -f.col(2);  // keep the triad right-handed
  }
  return out;
}

TubePath trace_tube_until(const FieldBasis& basis, const RfDrive& drive, const Vec3& start,
                          double step, double max_length, const Vec3& direction_hint,
                          const std::function<bool(const Vec3&)>& stop) {
  drive.validate();
  require_above_plane(start);
  if (step <= 0 || max_length <= 0) throw Error("trace_tube: step and length must be > 0");
  const int rf = basis.rf_net_index();
  const double max_excursion = std::max(4.0 * step, 8.0);

  TubePath path;
  path.nominal_spacing = step;
  const size_t n_points = static_cast<size_t>(std::llround(max_length / step)) + 1;

  // Settle the start point transversely, then pick the flat direction of |E|^2.
  Vec3 p = start;
  Vec3 t = direction_hint.normalized();
  if (!transverse_correct(basis, rf, p, t, max_excursion))
    throw TubeLost("trace_tube: no transverse minimum at the start point");
  t = smallest_curvature_direction(basis.hessian(rf, p), t);

  Vec3 n1 = std::abs(t.z()) < 0.9 ? t.cross(Vec3::UnitZ()).normalized()
                                  : t.cross(Vec3::UnitX()).normalized();

  auto push_point = [&](const Vec3& q, const Vec3& tangent) {
    n1 = (n1 - n1.dot(tangent) * tangent).normalized();  // parallel transport
    Mat3 frame;
    frame.col(0) = tangent;
    frame.col(1) = n1;
    frame.col(2) = tangent.cross(n1);
    path.points.push_back(q);
    path.frames.push_back(frame);
    path.pseudopotential.push_back(pseudopotential(basis, drive, q));
  };

  push_point(p, t);
  if (stop && stop(p)) return path;

  for (size_t i = 1; i < n_points; ++i) {
    double predictor = step;
    Vec3 next;
    // One resizing pass keeps |next - p| within the 1% spacing contract.
    for (int attempt = 0; attempt < 3; ++attempt) {
      next = p + predictor * t;
      if (!transverse_correct(basis, rf, next, t, max_excursion))
        throw TubeLost("trace_tube: corrector lost the tube at arclength " +
                       std::to_string(path.arclength(path.points.size() - 1)));
      const double actual = (next - p).norm();
      if (std::abs(actual - step) <= 0.005 * step) break;
      predictor *= step / actual;
    }
    const Vec3 t_new = (next - p).normalized();
    const double angle = std::acos(std::clamp(t.dot(t_new), -1.0, 1.0));
    if (angle > 10.0 * pi / 180.0)
      throw TubeLost("trace_tube: tangent kink exceeds 10 degrees");
    p = next;
    t = t_new;
    push_point(p, t);
    if (stop && stop(p)) return path;
  }
  return path;
}

TubePath trace_tube(const FieldBasis& basis, const RfDrive& drive, const Vec3& start, double step,
                    double length, const Vec3& direction_hint) {
  return trace_tube_until(basis, drive, start, step, length, direction_hint, nullptr);
}

BumpProfile bump_profile(const TubePath& path) {
  BumpProfile out;
  const size_t n = path.points.size();
  if (n == 0) return out;
  const double end_s = path.arclength(n - 1);
  out.samples.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    const size_t idx = n - 1 - k;
    const double s = end_s - path.arclength(idx);
    out.samples.emplace_back(s, path.pseudopotential[idx]);
    if (path.pseudopotential[idx] >= out.max_eV) {
      out.max_eV = path.pseudopotential[idx];
      out.argmax_arclength = s;
    }
  }
  return out;
}

SecularModes secular_from_curvature(const Mat3& hessian_J_per_m2, double mass_kg) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (hessian_J_per_m2 + hessian_J_per_m2.transpose()));
  SecularModes out;
  for (int i = 0; i < 3; ++i) {
    const double lambda = es.eigenvalues()(i);
    if (lambda <= 0)
      throw NotAMinimum("secular_frequencies: non-positive curvature along axis " +
                            std::to_string(i),
                        i);
    out.frequencies_hz[i] = std::sqrt(lambda / mass_kg) / (2.0 * pi);
  }
  out.axes = es.eigenvectors();
  return out;
}

SecularModes secular_frequencies(const FieldBasis& basis, const RfDrive& drive,
                                 const std::map<std::string, double>& control_voltages,
                                 const Vec3& r) {
  drive.validate();
  require_above_plane(r);

  // Pseudopotential curvature: eV/µm^2 -> J/m^2.
  const Mat3 h_pp = pseudopotential_hessian(basis, drive, r) * elementary_charge *
                    per_micron_to_per_meter * per_micron_to_per_meter;

  // Static curvature: unit-basis 1/µm^2 superposed -> V/m^2, times q.
  Mat3 h_static = Mat3::Zero();
  for (const auto& [net, v] : control_voltages) {
    if (v == 0.0) continue;
    h_static += v * basis.hessian(basis.net_index(net), r);
  }
  h_static *= per_micron_to_per_meter * per_micron_to_per_meter;  // V/m^2

  const Mat3 total = h_pp + drive.ion_charge * h_static;
  return secular_from_curvature(total, drive.ion_mass);
}

}  // namespace forge
