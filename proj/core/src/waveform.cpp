#include "forge/waveform.hpp"

#include "forge/constants.hpp"
#include "forge/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace forge {

namespace {

using constants::elementary_charge;
using constants::per_micron_to_per_meter;
using constants::pi;

double point_to_polygon_distance(const Vec2& p, const Polygon& poly) {
  if (point_in_polygon(poly, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 &a = poly[i], &b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    const double t = std::clamp(e.squaredNorm() > 0 ? (p - a).dot(e) / e.squaredNorm() : 0.0, 0.0, 1.0);
    best = std::min(best, (p - (a + t * e)).norm());
  }
  return best;
}

}  // namespace

void WellSpec::validate() const {
  if (target_axial_freq <= 0) throw Error("WellSpec: target frequency must be > 0");
  if (fit_points < 4) throw Error("WellSpec: fit_points must be >= 4");
  if (voltage_bound <= 0) throw Error("WellSpec: voltage bound must be > 0");
  if (fit_halfwidth <= 0) throw Error("WellSpec: fit halfwidth must be > 0");
}

SimplexConfig default_well_simplex() {
  SimplexConfig cfg;
  cfg.initial_step = {0.5};
  cfg.f_tol = 1e-12;
  cfg.x_tol = 1e-10;
  cfg.max_evals = 60000;
  return cfg;
}

std::vector<std::string> participating_nets(const FieldBasis& basis, const Vec3& center,
                                            double radius) {
  std::vector<std::string> out;
  const Vec2 c2(center.x(), center.y());
  for (int j = 0; j < basis.net_count(); ++j) {
    if (basis.roles()[j] != ElectrodeRole::control) continue;
    for (const auto& poly : basis.net_patches(j)) {
      if (point_to_polygon_distance(c2, poly) <= radius) {
        out.push_back(basis.nets()[j]);
        break;
      }
    }
  }
  return out;
}

FieldConstraintMatrix build_constraint_matrix(const FieldBasis& basis, const Vec3& center,
                                              const std::vector<std::string>& participating) {
  if (center.z() <= 0) throw BelowPlane("build_constraint_matrix: center must be above the plane");
  FieldConstraintMatrix m;
  m.nets = participating;
  m.A.resize(3, static_cast<Eigen::Index>(participating.size()));
  for (size_t j = 0; j < participating.size(); ++j) {
    const Vec3 e = -basis.gradient(basis.net_index(participating[j]), center) *
                   per_micron_to_per_meter;  // V/m at 1 V
    m.A.col(static_cast<Eigen::Index>(j)) = e;
  }
  return m;
}

WellSolution solve_well(const FieldBasis& basis, const RfDrive& drive, const WellSpec& spec,
                        const std::vector<std::string>& participating, const SimplexConfig& cfg) {
  spec.validate();
  drive.validate();
  const int n = static_cast<int>(participating.size());
  if (n < 4)
    throw InsufficientElectrodes("solve_well: need at least 4 participating electrodes, got " +
                                 std::to_string(n));

  const FieldConstraintMatrix fcm = build_constraint_matrix(basis, spec.center, participating);
  NullSpaceBasis ns;
  try {
    ns = null_space(fcm.A);
  } catch (const EmptyNullSpace&) {
    throw InsufficientElectrodes("solve_well: zero-field constraint leaves no freedom");
  }
  const Eigen::MatrixXd& W = ns.vectors;  // n x k
  const int k = static_cast<int>(W.cols());

  // Potential samples of each participating net along the tube direction.
  const Vec3 t = spec.tangent.normalized();
  Eigen::MatrixXd P(spec.fit_points, n);
  Eigen::VectorXd s_m(spec.fit_points);  // sample offsets in meters
  for (int i = 0; i < spec.fit_points; ++i) {
    const double s_um =
        -spec.fit_halfwidth + 2.0 * spec.fit_halfwidth * i / (spec.fit_points - 1);
    s_m(i) = s_um * constants::meters_per_micron;
    const Vec3 r = spec.center + s_um * t;
    for (int j = 0; j < n; ++j) P(i, j) = basis.potential(basis.net_index(participating[j]), r);
  }

  // Target harmonic potential (in volts): (m w^2 / 2q) s^2, offset free.
  const double omega = 2.0 * pi * spec.target_axial_freq;
  const double curvature_coef = drive.ion_mass * omega * omega / (2.0 * drive.ion_charge);
  Eigen::VectorXd target(spec.fit_points);
  for (int i = 0; i < spec.fit_points; ++i) target(i) = curvature_coef * s_m(i) * s_m(i);

  auto rms_of = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd diff = P * v - target;
    const double offset = diff.mean();
    return std::sqrt((diff.array() - offset).square().mean());
  };
  auto objective = [&](const Eigen::VectorXd& c) {
    const Eigen::VectorXd v = W * c;
    if (v.lpNorm<Eigen::Infinity>() > spec.voltage_bound)
      return std::numeric_limits<double>::infinity();
    return rms_of(v);
  };

  const SimplexResult res = nelder_mead(objective, Eigen::VectorXd::Zero(k), cfg);
  const Eigen::VectorXd v = W * res.x;

  WellSolution sol;
  sol.nets = participating;
  sol.voltages = v;
  sol.residual_field = (fcm.A * v).norm();
  sol.rms_residual = res.f;
  sol.evals = res.evals;

  // Fitted frequency from the LLS quadratic over the window.
  Eigen::MatrixXd X(spec.fit_points, 3);
  for (int i = 0; i < spec.fit_points; ++i) {
    X(i, 0) = s_m(i) * s_m(i);
    X(i, 1) = s_m(i);
    X(i, 2) = 1.0;
  }
  const Eigen::VectorXd phi = P * v;
  const Eigen::Vector3d coef = X.colPivHouseholderQr().solve(phi);
  const double a = coef(0);  // V/m^2
  if (a > 0)
    sol.fitted_freq = std::sqrt(2.0 * a * drive.ion_charge / drive.ion_mass) / (2.0 * pi);

  const double depth = curvature_coef * std::pow(spec.fit_halfwidth * constants::meters_per_micron, 2);
  const bool freq_ok =
      std::abs(sol.fitted_freq - spec.target_axial_freq) <= spec.freq_tol_rel * spec.target_axial_freq;
  const bool rms_ok = sol.rms_residual <= 0.05 * depth;
  if (!freq_ok || !rms_ok)
    throw NoFeasibleWell("solve_well: cannot reach " + std::to_string(spec.target_axial_freq) +
                             " Hz within +/-" + std::to_string(spec.voltage_bound) +
                             " V (best " + std::to_string(sol.fitted_freq) + " Hz, rms " +
                             std::to_string(sol.rms_residual) + " V)",
                         sol.fitted_freq);
  return sol;
}

Waveform synth_transport(const FieldBasis& basis, const RfDrive& drive, const TubePath& path,
                         const WellSpec& spec_template, const SimplexConfig& cfg) {
  if (path.points.empty()) throw Error("synth_transport: empty path");

  Waveform wf;
  wf.nets = basis.control_nets();
  wf.spacing = path.nominal_spacing;
  wf.voltage_bound = spec_template.voltage_bound;

  std::vector<int> net_pos(basis.net_count(), -1);
  for (size_t i = 0; i < wf.nets.size(); ++i) net_pos[basis.net_index(wf.nets[i])] = static_cast<int>(i);

  for (size_t i = 0; i < path.points.size(); ++i) {
    WellSpec spec = spec_template;
    spec.center = path.points[i];
    spec.tangent = path.frames[i].col(0);
    const auto participating =
        participating_nets(basis, spec.center, spec.participation_radius);
    try {
      const WellSolution sol = solve_well(basis, drive, spec, participating, cfg);
      Eigen::VectorXd frame = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(wf.nets.size()));
      for (size_t j = 0; j < sol.nets.size(); ++j)
        frame(net_pos[basis.net_index(sol.nets[j])]) = sol.voltages(static_cast<Eigen::Index>(j));
      wf.frames.push_back(std::move(frame));
      wf.arclengths.push_back(path.arclength(i));
      wf.diagnostics.push_back({sol.residual_field, sol.fitted_freq, sol.rms_residual});
    } catch (const Error& e) {
      throw NoFeasibleWell("synth_transport: failure at arclength " +
                               std::to_string(path.arclength(i)) + " um: " + e.what(),
                           0.0);
    }
  }
  return wf;
}

Waveform smooth(const Waveform& wf, int levels) {
  if (levels < 0) throw Error("smooth: levels must be >= 0");
  Waveform out = wf;
  const size_t n = out.frames.size();
  if (n < 3) {
    out.smoothing_levels += levels;
    return out;
  }
  for (int level = 1; level <= levels; ++level) {
    const auto prev = out.frames;
    const size_t start = (level % 2 == 1) ? 1 : 2;  // odd interior indices first
    for (size_t i = start; i + 1 < n; i += 2)
      out.frames[i] = 0.5 * (prev[i - 1] + prev[i + 1]);
  }
  out.smoothing_levels += levels;
  return out;
}

WaveformReport verify_waveform(const FieldBasis& basis, const RfDrive& drive, const Waveform& wf,
                               const TubePath& path) {
  if (wf.frames.size() != path.points.size())
    throw Error("verify_waveform: frame count does not match path");

  WaveformReport report;
  const double q_over_e = drive.ion_charge / elementary_charge;

  std::vector<int> net_index(wf.nets.size());
  for (size_t j = 0; j < wf.nets.size(); ++j) net_index[j] = basis.net_index(wf.nets[j]);

  for (size_t i = 0; i < wf.frames.size(); ++i) {
    const Vec3 nominal = path.points[i];
    const Eigen::VectorXd& v = wf.frames[i];

    auto static_sample = [&](const Vec3& r, double& phi, Vec3& grad, Mat3& hess) {
      phi = 0;
      grad.setZero();
      hess.setZero();
      double p;
      Vec3 g;
      Mat3 h;
      for (size_t j = 0; j < wf.nets.size(); ++j) {
        if (v(static_cast<Eigen::Index>(j)) == 0.0) continue;
        basis.sample(net_index[j], r, p, g, h);
        phi += v(j) * p;
        grad += v(j) * g;
        hess += v(j) * h;
      }
    };

    FrameReport fr;
    {
      double phi;
      Vec3 g;
      Mat3 h;
      static_sample(nominal, phi, g, h);
      fr.residual_field = g.norm() * per_micron_to_per_meter;
    }

    // Walk to the actual total-potential minimum (energies in eV, lengths in µm).
    Vec3 r = nominal;
    bool ok = true;
    for (int it = 0; it < 40; ++it) {
      double phi;
      Vec3 g_static;
      Mat3 h_static;
      static_sample(r, phi, g_static, h_static);
      const Vec3 grad_u = pseudopotential_gradient(basis, drive, r) + q_over_e * g_static;
      const Mat3 hess_u = pseudopotential_hessian(basis, drive, r) + q_over_e * h_static;
      Vec3 step = hess_u.ldlt().solve(-grad_u);
      if (!step.allFinite()) {
        ok = false;
        break;
      }
      if (step.norm() > 2.0) step *= 2.0 / step.norm();
      r += step;
      if ((r - nominal).norm() > 5.0) {
        ok = false;
        break;
      }
      if (step.norm() < 1e-7) break;
    }
    fr.displacement = ok ? (r - nominal).norm() : std::numeric_limits<double>::infinity();

    if (ok) {
      std::map<std::string, double> volts;
      for (size_t j = 0; j < wf.nets.size(); ++j)
        if (v(static_cast<Eigen::Index>(j)) != 0.0) volts[wf.nets[j]] = v(j);
      try {
        const SecularModes modes = secular_frequencies(basis, drive, volts, r);
        const Vec3 tangent = path.frames[i].col(0);
        int axial = 0;
        double best = -1;
        for (int m = 0; m < 3; ++m) {
          const double align = std::abs(modes.axes.col(m).dot(tangent));
          if (align > best) {
            best = align;
            axial = m;
          }
        }
        fr.axial_freq = modes.frequencies_hz[axial];
      } catch (const NotAMinimum&) {
        fr.axial_freq = 0.0;
        ok = false;
      }
    }

    fr.flagged = !(fr.displacement <= 1.0);  // the fabrication-precision yardstick
    report.max_residual_field = std::max(report.max_residual_field, fr.residual_field);
    if (std::isfinite(fr.displacement))
      report.max_displacement = std::max(report.max_displacement, fr.displacement);
    else
      report.max_displacement = std::numeric_limits<double>::infinity();
    if (fr.flagged) ++report.flagged_count;
    report.frames.push_back(fr);
  }
  return report;
}

void write_waveform_csv(const Waveform& wf, std::ostream& os) {
  os << "index, s_um";
  for (const auto& net : wf.nets) os << ", " << net;
  os << "\n";
  char buf[64];
  for (size_t i = 0; i < wf.frames.size(); ++i) {
    os << i;
    std::snprintf(buf, sizeof buf, "%.6g", wf.arclengths.empty() ? i * wf.spacing : wf.arclengths[i]);
    os << ", " << buf;
    for (Eigen::Index j = 0; j < wf.frames[i].size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.6g", wf.frames[i](j));
      os << ", " << buf;
    }
    os << "\n";
  }
}

Waveform read_waveform_csv(std::istream& is) {
  Waveform wf;
  std::string line;
  if (!std::getline(is, line)) throw Error("waveform csv: empty file");
  std::stringstream header(line);
  std::string cell;
  std::vector<std::string> cols;
  while (std::getline(header, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t\r");
    cols.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (cols.size() < 3 || cols[0] != "index" || cols[1] != "s_um")
    throw Error("waveform csv: bad header");
  wf.nets.assign(cols.begin() + 2, cols.end());

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != cols.size()) throw Error("waveform csv: ragged row");
    wf.arclengths.push_back(vals[1]);
    Eigen::VectorXd frame(static_cast<Eigen::Index>(wf.nets.size()));
    for (size_t j = 0; j < wf.nets.size(); ++j) frame(static_cast<Eigen::Index>(j)) = vals[j + 2];
    wf.frames.push_back(std::move(frame));
  }
  if (wf.arclengths.size() > 1) wf.spacing = wf.arclengths[1] - wf.arclengths[0];
  return wf;
}

std::string waveform_metadata_json(const Waveform& wf, const RfDrive& drive) {
  nlohmann::json j;
  j["spacing_um"] = wf.spacing;
  j["voltage_bound"] = wf.voltage_bound;
  j["smoothing_levels"] = wf.smoothing_levels;
  j["frames"] = wf.frames.size();
  j["drive"] = {{"amplitude_V", drive.amplitude},
                {"omega_rf_rad_s", drive.omega_rf},
                {"ion_mass_kg", drive.ion_mass},
                {"ion_charge_C", drive.ion_charge}};
  nlohmann::json diag = nlohmann::json::array();
  for (const auto& d : wf.diagnostics)
    diag.push_back({{"residual_field_V_m", d.residual_field},
                    {"fitted_freq_hz", d.fitted_freq},
                    {"rms_residual_V", d.rms_residual}});
  j["per_frame"] = diag;
  return j.dump(2);
}

}  // namespace forge
