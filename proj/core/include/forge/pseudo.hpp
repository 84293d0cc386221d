#pragma once

#include "forge/field.hpp"
#include "forge/geometry.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace forge {

/// rf drive and ion species. Energies derived from these are reported in eV,
/// frequencies in Hz.
struct RfDrive {
  double amplitude;   // V, peak
  double omega_rf;    // rad/s
  double ion_mass;    // kg
  double ion_charge;  // C

  static RfDrive mg24(double amplitude_V, double rf_freq_Hz);
  void validate() const;
};

/// Time-averaged ponderomotive energy q^2 |E_rf|^2 / (4 m Omega^2), in eV.
double pseudopotential(const FieldBasis& basis, const RfDrive& drive, const Vec3& r);

/// Analytic gradient of the pseudopotential, eV/µm.
Vec3 pseudopotential_gradient(const FieldBasis& basis, const RfDrive& drive, const Vec3& r);

/// Curvature of the pseudopotential, eV/µm^2. Central differences of the analytic
/// gradient (the potential itself is differentiated twice analytically upstream;
/// this adds the one extra order the ponderomotive form needs).
Mat3 pseudopotential_hessian(const FieldBasis& basis, const RfDrive& drive, const Vec3& r,
                             double fd_step_um = 1e-2);

/// |E_rf| in V/m at the drive amplitude.
double rf_field_norm(const FieldBasis& basis, const RfDrive& drive, const Vec3& r);

struct NullPoint {
  Vec3 position;
  double field_residual;  // V/m at drive amplitude
  bool true_null;         // residual below 1e-4 of the seed field
};

/// Damped Gauss-Newton descent of |E_rf|^2 from `seed`. Returns the true null or
/// the residual |E|-minimizing point; throws NoConvergence outside the basin.
NullPoint find_null(const FieldBasis& basis, const RfDrive& drive, const Vec3& seed,
                    int max_iters = 200);

/// Discretized rf-minimum curve with per-point frames (tangent + two transverse axes)
/// and pseudopotential samples.
struct TubePath {
  std::vector<Vec3> points;            // µm
  std::vector<Mat3> frames;            // columns: tangent, n1, n2
  std::vector<double> pseudopotential; // eV at each point
  double nominal_spacing = 1.0;        // µm

  double arclength(size_t i) const;
  double total_length() const { return arclength(points.size() - 1); }
  /// Point at arclength s (linear interpolation, straight-line extrapolation at ends).
  Vec3 at_arclength(double s) const;
  TubePath reversed() const;
};

/// Marches along the tube from `start` (already a transverse minimum) by
/// tangent predictor / transverse-minimization corrector, sampling every `step`.
TubePath trace_tube(const FieldBasis& basis, const RfDrive& drive, const Vec3& start, double step,
                    double length, const Vec3& direction_hint);

/// Same march, but stops after the first point satisfying `stop` (that point is
/// kept) or once max_length is exhausted.
TubePath trace_tube_until(const FieldBasis& basis, const RfDrive& drive, const Vec3& start,
                          double step, double max_length, const Vec3& direction_hint,
                          const std::function<bool(const Vec3&)>& stop);

struct BumpProfile {
  std::vector<std::pair<double, double>> samples;  // (arclength from path end, eV)
  double max_eV = 0.0;
  double argmax_arclength = 0.0;
};

/// Pseudopotential along the path, re-indexed so s = 0 at the path's last point
/// (the junction center when the path was traced inward) increasing outward.
BumpProfile bump_profile(const TubePath& path);

struct SecularModes {
  std::array<double, 3> frequencies_hz;  // ascending
  Mat3 axes;                             // unit eigenvectors, one per column
};

/// Normal modes from a total-potential curvature in J/m^2.
SecularModes secular_from_curvature(const Mat3& hessian_J_per_m2, double mass_kg);

/// Diagonalizes pseudopotential + static curvature at r. Throws NotAMinimum when
/// any principal curvature is non-positive.
SecularModes secular_frequencies(const FieldBasis& basis, const RfDrive& drive,
                                 const std::map<std::string, double>& control_voltages,
                                 const Vec3& r);

}  // namespace forge
