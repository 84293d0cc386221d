#pragma once

#include "forge/geometry.hpp"
#include "forge/layout.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace forge {

/// How inter-electrode gaps enter the gapless plane approximation.
enum class GapPolicy {
  midline_split,  // each gap is bisected and annexed to the adjacent electrodes
  grounded_gaps,  // gaps stay grounded plane
};

/// Potential, field and curvature of the static potential at one point, in SI.
struct FieldSample {
  double potential = 0.0;        // V
  Vec3 field = Vec3::Zero();     // V/m, E = -grad(potential)
  Mat3 hessian = Mat3::Zero();   // V/m^2, Hessian of the potential (trace ~ 0)
};

/// Per-net unit-potential evaluators above the electrode plane.
///
/// Each net's basis function is the Laplace solution with that net's metal at 1 V
/// and the rest of the z=0 plane grounded, evaluated by the exact solid-angle
/// formula for polygonal patches (per-edge arctangent terms); gradient and Hessian
/// come from the closed-form edge line integrals, not numerical differentiation.
///
/// Geometry is in micrometers: potential is dimensionless (V per V), gradient is
/// per-µm, Hessian per-µm². evaluate() converts to SI.
///
/// Immutable after construction; all evaluation is pure and reentrant.
class FieldBasis {
 public:
  static FieldBasis build(const TrapLayout& layout, GapPolicy policy = GapPolicy::midline_split);

  int net_count() const { return static_cast<int>(nets_.size()); }
  const std::vector<std::string>& nets() const { return nets_; }
  const std::vector<ElectrodeRole>& roles() const { return roles_; }
  int net_index(const std::string& net) const;
  int rf_net_index() const { return rf_index_; }
  std::vector<std::string> control_nets() const;

  // Unit-potential evaluators (µm coordinates, z > 0 required upstream).
  double potential(int net, const Vec3& r) const;
  Vec3 gradient(int net, const Vec3& r) const;       // 1/µm
  Mat3 hessian(int net, const Vec3& r) const;        // 1/µm^2
  void sample(int net, const Vec3& r, double& phi, Vec3& grad, Mat3& hess) const;

  /// Superposed sample in SI units. Missing nets default to 0 V; throws BelowPlane.
  FieldSample evaluate(const std::map<std::string, double>& voltages, const Vec3& r) const;
  /// Same, voltages indexed by net_index (size net_count()).
  FieldSample evaluate(std::span<const double> voltages, const Vec3& r) const;

  /// Geometry actually used by the solver for one net (post gap policy), for inspection.
  const std::vector<Polygon>& net_patches(int net) const { return patches_[net]; }

 private:
  std::vector<std::string> nets_;
  std::vector<ElectrodeRole> roles_;
  std::vector<std::vector<Polygon>> patches_;  // per net
  int rf_index_ = -1;
};

/// Spec-level alias for FieldBasis::build.
inline FieldBasis unit_basis(const TrapLayout& layout,
                             GapPolicy policy = GapPolicy::midline_split) {
  return FieldBasis::build(layout, policy);
}

/// Kernel entry points for a single polygon patch at unit potential (exposed for
/// tests and benchmarks; coordinates in µm, z > 0).
double patch_potential(const Polygon& poly, const Vec3& r);
void patch_sample(const Polygon& poly, const Vec3& r, double& phi, Vec3& grad, Mat3& hess);

}  // namespace forge
