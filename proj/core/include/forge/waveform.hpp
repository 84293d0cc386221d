#pragma once

#include "forge/field.hpp"
#include "forge/optim.hpp"
#include "forge/pseudo.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace forge {

/// One harmonic well to synthesize: zero static field at `center`, target axial
/// frequency along `tangent`, fit over fit_points samples spanning +/-fit_halfwidth.
struct WellSpec {
  Vec3 center = Vec3::Zero();
  Vec3 tangent = Vec3::UnitX();
  double target_axial_freq = 3.5e6;  // Hz
  double fit_halfwidth = 50.0;       // µm
  int fit_points = 10;
  double voltage_bound = 5.0;        // V
  double freq_tol_rel = 0.02;        // feasibility threshold on the fitted frequency
  double participation_radius = 300.0;  // µm: control nets farther out are excluded

  void validate() const;
};

/// 3 x n matrix of field contributions: column j is the E field (V/m) at the well
/// center from participating net j at 1 V.
struct FieldConstraintMatrix {
  Eigen::Matrix3Xd A;
  std::vector<std::string> nets;
};

FieldConstraintMatrix build_constraint_matrix(const FieldBasis& basis, const Vec3& center,
                                              const std::vector<std::string>& participating);

/// Control nets with electrode metal within `radius` (in-plane) of the well center.
std::vector<std::string> participating_nets(const FieldBasis& basis, const Vec3& center,
                                            double radius);

struct WellSolution {
  std::vector<std::string> nets;  // participating nets
  Eigen::VectorXd voltages;       // V, same order
  double residual_field = 0.0;    // V/m, ||A v||
  double fitted_freq = 0.0;       // Hz, from the quadratic fit over the window
  double rms_residual = 0.0;      // V, fit residual
  int evals = 0;
};

SimplexConfig default_well_simplex();

/// Two-step well solve: exact null-space reparameterization of the zero-field
/// constraint, then Nelder-Mead over null-space coefficients to match the target
/// harmonic within the +/-voltage_bound box (barrier).
WellSolution solve_well(const FieldBasis& basis, const RfDrive& drive, const WellSpec& spec,
                        const std::vector<std::string>& participating,
                        const SimplexConfig& cfg = default_well_simplex());

struct FrameDiagnostics {
  double residual_field = 0.0;  // V/m at solve time
  double fitted_freq = 0.0;     // Hz at solve time
  double rms_residual = 0.0;    // V
};

/// Position-indexed voltage sequence. Frames cover every control net of the basis
/// (non-participating nets hold 0 V).
struct Waveform {
  std::vector<std::string> nets;
  std::vector<Eigen::VectorXd> frames;
  std::vector<double> arclengths;  // µm along the tube
  double spacing = 1.0;            // µm
  double voltage_bound = 5.0;
  int smoothing_levels = 0;
  std::vector<FrameDiagnostics> diagnostics;
};

/// One frame per path point; each frame satisfies solve_well's contract at its
/// center. Per-point failures carry the failing arclength.
Waveform synth_transport(const FieldBasis& basis, const RfDrive& drive, const TubePath& path,
                         const WellSpec& spec_template,
                         const SimplexConfig& cfg = default_well_simplex());

/// Alternating-average smoothing: per level, interior frames of one parity (odd
/// first, parity alternating per level) are replaced by the mean of their two
/// neighbors. Endpoints are never modified.
Waveform smooth(const Waveform& wf, int levels = 10);

struct FrameReport {
  double residual_field = 0.0;   // V/m static field at the nominal center
  double displacement = 0.0;     // µm from nominal center to the actual well minimum
  double axial_freq = 0.0;       // Hz secular frequency along the tube at the minimum
  bool flagged = false;          // displacement > 1 µm
};

struct WaveformReport {
  std::vector<FrameReport> frames;
  double max_residual_field = 0.0;
  double max_displacement = 0.0;
  int flagged_count = 0;
};

WaveformReport verify_waveform(const FieldBasis& basis, const RfDrive& drive, const Waveform& wf,
                               const TubePath& path);

/// CSV: header "index, s_um, <net ids...>", voltages with 6 significant digits.
void write_waveform_csv(const Waveform& wf, std::ostream& os);
Waveform read_waveform_csv(std::istream& is);

/// JSON sidecar with spacing, drive, smoothing level and per-frame diagnostics.
std::string waveform_metadata_json(const Waveform& wf, const RfDrive& drive);

}  // namespace forge
