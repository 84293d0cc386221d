// forge: surface-electrode trap design and transport-waveform toolchain.
#include "forge/analysis.hpp"
#include "forge/components.hpp"
#include "forge/constants.hpp"
#include "forge/errors.hpp"
#include "forge/field.hpp"
#include "forge/junction.hpp"
#include "forge/layout_io.hpp"
#include "forge/optim.hpp"
#include "forge/pseudo.hpp"
#include "forge/waveform.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace forge;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

// "113V,90.7MHz,Mg24" -> RfDrive. The ion token is <element><mass number>, singly charged.
RfDrive parse_drive(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 3) throw Error("drive format: <amp>V,<freq>MHz,<Ion><A> e.g. 113V,90.7MHz,Mg24");

  auto strip_suffix = [](std::string s, const std::string& suffix) {
    if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
      s.erase(s.size() - suffix.size());
    return s;
  };
  const double amp = std::stod(strip_suffix(parts[0], "V"));
  const double freq_mhz = std::stod(strip_suffix(parts[1], "MHz"));

  size_t digits = 0;
  while (digits < parts[2].size() && !std::isdigit(static_cast<unsigned char>(parts[2][digits])))
    ++digits;
  if (digits == parts[2].size()) throw Error("ion token needs a mass number, e.g. Mg24");
  const double mass_u = std::stod(parts[2].substr(digits));

  RfDrive d{amp, 2.0 * constants::pi * freq_mhz * 1e6, mass_u * constants::atomic_mass_unit,
            constants::elementary_charge};
  d.validate();
  return d;
}

IonSpecies parse_ion(const std::string& token) {
  size_t digits = 0;
  while (digits < token.size() && !std::isdigit(static_cast<unsigned char>(token[digits]))) ++digits;
  if (digits == token.size()) throw Error("ion token needs a mass number, e.g. Mg24");
  return {std::stod(token.substr(digits)) * constants::atomic_mass_unit,
          constants::elementary_charge};
}

Vec3 parse_point(const std::string& text) {
  std::stringstream ss(text);
  std::string item;
  std::vector<double> v;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 3) throw Error("point format: x,y,z");
  return {v[0], v[1], v[2]};
}

// Anchor for --from/--to: an open port name or a component instance name.
Vec2 resolve_anchor(const TrapLayout& layout, const std::string& name) {
  for (const auto& p : layout.open_ports())
    if (p.name == name) return p.position;
  for (const auto& pl : layout.placements()) {
    if (pl.instance != name) continue;
    Vec2 acc = Vec2::Zero();
    int count = 0;
    for (const auto& e : pl.component.electrodes)
      for (const auto& v : e.polygon) {
        acc += pl.transform.apply(v);
        ++count;
      }
    return acc / count;
  }
  throw Error("no port or component named '" + name + "'");
}

nlohmann::json junction_param_json(const JunctionParam& p) {
  nlohmann::json j;
  j["shape"] = {{"rail_width_a", p.shape.rail_width_a},
                {"rail_width_b", p.shape.rail_width_b},
                {"center_gap", p.shape.center_gap},
                {"leg_length", p.shape.leg_length},
                {"inner_vertices", p.shape.inner_vertices},
                {"outer_vertices", p.shape.outer_vertices},
                {"vertex_window", p.shape.vertex_window},
                {"max_offset", p.shape.max_offset},
                {"spline", p.shape.spline},
                {"chord_tolerance", p.shape.chord_tolerance}};
  j["vertex_offsets"] = std::vector<double>(
      p.vertex_offsets.data(), p.vertex_offsets.data() + p.vertex_offsets.size());
  return j;
}

JunctionParam junction_param_from_json(const nlohmann::json& j) {
  JunctionParam p;
  const auto& s = j.at("shape");
  p.shape.rail_width_a = s.at("rail_width_a").get<double>();
  p.shape.rail_width_b = s.at("rail_width_b").get<double>();
  p.shape.center_gap = s.at("center_gap").get<double>();
  p.shape.leg_length = s.at("leg_length").get<double>();
  p.shape.inner_vertices = s.at("inner_vertices").get<int>();
  p.shape.outer_vertices = s.at("outer_vertices").get<int>();
  p.shape.vertex_window = s.at("vertex_window").get<double>();
  p.shape.max_offset = s.at("max_offset").get<double>();
  p.shape.spline = s.value("spline", false);
  p.shape.chord_tolerance = s.value("chord_tolerance", 0.1);
  const auto offsets = j.at("vertex_offsets").get<std::vector<double>>();
  p.vertex_offsets = Eigen::Map<const Eigen::VectorXd>(offsets.data(), offsets.size());
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surface-electrode ion trap design toolchain"};
  app.require_subcommand(1);

  // ---- validate ----
  std::string val_file;
  auto* validate = app.add_subcommand("validate", "check a layout document's invariants");
  validate->add_option("layout", val_file, "layout document")->required();

  // ---- report ----
  std::string rep_file;
  auto* report = app.add_subcommand("report", "summarize a layout");
  report->add_option("layout", rep_file, "layout document")->required();

  // ---- heating ----
  double ndot = 0, ndot_err = 0, hfreq = 0;
  std::string ion_token = "Mg24";
  auto* heating = app.add_subcommand("heating", "convert a heating rate to field noise density");
  heating->add_option("--ndot", ndot, "phonons/s")->required();
  heating->add_option("--ndot-err", ndot_err, "uncertainty, phonons/s");
  heating->add_option("--freq", hfreq, "axial frequency, Hz")->required();
  heating->add_option("--ion", ion_token, "ion species, e.g. Mg24");

  // ---- field-map ----
  std::string fm_file, fm_voltages, fm_plane = "y=0", fm_range;
  double fm_step = 1.0;
  auto* fieldmap = app.add_subcommand("field-map", "grid of potential and field on a plane");
  fieldmap->add_option("layout", fm_file)->required();
  fieldmap->add_option("--voltages", fm_voltages, "JSON file {net: volts}")->required();
  fieldmap->add_option("--plane", fm_plane, "fixed axis, e.g. y=0 or z=40");
  fieldmap->add_option("--range", fm_range, "a0:a1,b0:b1 for the two free axes")->required();
  fieldmap->add_option("--step", fm_step, "grid step, um");

  // ---- trace-tube ----
  std::string tt_file, tt_drive = "113V,90.7MHz,Mg24", tt_seed = "0,0,40", tt_dir = "1,0,0";
  double tt_step = 1.0, tt_length = 850.0;
  auto* trace = app.add_subcommand("trace-tube", "trace the rf pseudopotential tube");
  trace->add_option("layout", tt_file)->required();
  trace->add_option("--drive", tt_drive, "e.g. 113V,90.7MHz,Mg24");
  trace->add_option("--seed", tt_seed, "x,y,z start guess, um");
  trace->add_option("--dir", tt_dir, "march direction hint");
  trace->add_option("--step", tt_step, "sample spacing, um");
  trace->add_option("--length", tt_length, "trace length, um");

  // ---- optimize-junction ----
  std::string oj_layout, oj_out = "junction_design.json", oj_trace_csv, oj_drive = "113V,90.7MHz,Mg24";
  double oj_wa = 40, oj_wb = 60, oj_gap = 50, oj_step0 = 2.0;
  int oj_max_evals = 5000;
  auto* optjun = app.add_subcommand("optimize-junction", "minimize pseudopotential bumps of a Y junction");
  optjun->add_option("--layout", oj_layout, "resume from a design file written by this command");
  optjun->add_option("--rail-a", oj_wa, "rail width a, um");
  optjun->add_option("--rail-b", oj_wb, "rail width b, um");
  optjun->add_option("--gap", oj_gap, "center gap, um");
  optjun->add_option("--drive", oj_drive);
  optjun->add_option("--max-evals", oj_max_evals);
  optjun->add_option("--initial-step", oj_step0, "simplex initial step, um");
  optjun->add_option("--out", oj_out, "output design document");
  optjun->add_option("--trace", oj_trace_csv, "objective trace CSV");

  // ---- synth-waveform ----
  std::string sw_file, sw_from, sw_to, sw_drive = "113V,90.7MHz,Mg24", sw_out = "wf.csv";
  double sw_freq = 3.5e6, sw_height = 40.0, sw_spacing = 1.0;
  int sw_smooth = 10;
  bool sw_verify = false;
  auto* synth = app.add_subcommand("synth-waveform", "transport waveform between two anchors");
  synth->add_option("layout", sw_file)->required();
  synth->add_option("--from", sw_from, "port or component instance")->required();
  synth->add_option("--to", sw_to, "port or component instance")->required();
  synth->add_option("--freq", sw_freq, "target axial frequency, Hz");
  synth->add_option("--smooth", sw_smooth, "smoothing levels");
  synth->add_option("--drive", sw_drive);
  synth->add_option("--height", sw_height, "seed height for the rf null, um");
  synth->add_option("--spacing", sw_spacing, "well spacing, um");
  synth->add_flag("--verify", sw_verify, "run verify_waveform and print a summary");
  synth->add_option("--out", sw_out, "output CSV (sidecar: <out>.meta.json)");

  // ---- generators ----
  std::string mk_out = "layout.json";
  double mk_wa = 40, mk_wb = 60, mk_gap = 50, mk_seg = 60;
  int mk_n = 5;
  auto* mksec = app.add_subcommand("make-section", "write a five-wire straight section layout");
  mksec->add_option("--rail-a", mk_wa);
  mksec->add_option("--rail-b", mk_wb);
  mksec->add_option("--gap", mk_gap);
  mksec->add_option("--segment", mk_seg);
  mksec->add_option("--segments", mk_n);
  mksec->add_option("--out", mk_out);

  std::string mj_out = "junction.json";
  double mj_wa = 40, mj_wb = 60, mj_gap = 50, mj_leg = 300;
  auto* mkjun = app.add_subcommand("make-junction", "write a straight-rail Y junction layout");
  mkjun->add_option("--rail-a", mj_wa);
  mkjun->add_option("--rail-b", mj_wb);
  mkjun->add_option("--gap", mj_gap);
  mkjun->add_option("--leg", mj_leg);
  mkjun->add_option("--out", mj_out);

  std::string mh_out = "hexagon.json";
  auto* mkhex = app.add_subcommand("make-hexagon", "write the six-junction hexagonal ring layout");
  mkhex->add_option("--out", mh_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto problems = validate_layout_document(slurp(val_file));
      for (const auto& p : problems) std::cout << p << "\n";
      if (problems.empty()) std::cout << "ok\n";
      return problems.empty() ? 0 : 1;
    }

    if (*report) {
      std::cout << layout_report(load_layout(slurp(rep_file)));
      return 0;
    }

    if (*heating) {
      HeatingMeasurement m{ndot, ndot_err, hfreq, 1.0, parse_ion(ion_token)};
      const NoiseDensity s = heating_to_noise(m);
      std::printf("S_E = %.4g +/- %.1g V^2 m^-2 Hz^-1\n", s.value, s.err);
      return 0;
    }

    if (*fieldmap) {
      const TrapLayout layout = load_layout(slurp(fm_file));
      const FieldBasis basis = unit_basis(layout);
      const auto vj = nlohmann::json::parse(slurp(fm_voltages));
      std::map<std::string, double> volts;
      for (const auto& [net, v] : vj.items()) volts[net] = v.get<double>();

      const auto eq = fm_plane.find('=');
      if (eq == std::string::npos) throw Error("plane format: y=0");
      const std::string axis = fm_plane.substr(0, eq);
      const double value = std::stod(fm_plane.substr(eq + 1));
      int fixed = axis == "x" ? 0 : axis == "y" ? 1 : 2;
      const int a0 = (fixed == 0) ? 1 : 0;
      const int a1 = (fixed == 2) ? 1 : 2;

      double r0lo, r0hi, r1lo, r1hi;
      if (std::sscanf(fm_range.c_str(), "%lf:%lf,%lf:%lf", &r0lo, &r0hi, &r1lo, &r1hi) != 4)
        throw Error("range format: a0:a1,b0:b1");

      const char* names = "xyz";
      std::printf("%c, %c, potential, Ex, Ey, Ez\n", names[a0], names[a1]);
      for (double u = r0lo; u <= r0hi + 1e-9; u += fm_step)
        for (double w = r1lo; w <= r1hi + 1e-9; w += fm_step) {
          Vec3 r;
          r(fixed) = value;
          r(a0) = u;
          r(a1) = w;
          const FieldSample s = basis.evaluate(volts, r);
          std::printf("%.6g, %.6g, %.6g, %.6g, %.6g, %.6g\n", u, w, s.potential, s.field.x(),
                      s.field.y(), s.field.z());
        }
      return 0;
    }

    if (*trace) {
      const TrapLayout layout = load_layout(slurp(tt_file));
      const FieldBasis basis = unit_basis(layout);
      const RfDrive drive = parse_drive(tt_drive);
      const NullPoint null = find_null(basis, drive, parse_point(tt_seed));
      const TubePath path =
          trace_tube(basis, drive, null.position, tt_step, tt_length, parse_point(tt_dir));
      std::printf("s, x, y, z, phi_pp_eV\n");
      for (size_t i = 0; i < path.points.size(); ++i)
        std::printf("%.6g, %.6g, %.6g, %.6g, %.6g\n", path.arclength(i), path.points[i].x(),
                    path.points[i].y(), path.points[i].z(), path.pseudopotential[i]);
      return 0;
    }

    if (*optjun) {
      JunctionParam start;
      if (!oj_layout.empty()) {
        const auto doc = nlohmann::json::parse(slurp(oj_layout));
        if (!doc.contains("junction_param"))
          throw Error("--layout file has no junction_param block");
        start = junction_param_from_json(doc["junction_param"]);
      } else {
        start = initial_junction(oj_wa, oj_wb, oj_gap);
      }
      const RfDrive drive = parse_drive(oj_drive);

      SimplexConfig cfg;
      cfg.initial_step = {oj_step0};
      cfg.max_evals = oj_max_evals;
      cfg.f_tol = 1e-9;
      cfg.x_tol = 1e-7;

      const JunctionDesign design = optimize_junction(start, drive, cfg);
      std::printf("objective: %.6g eV after %d evals (%s)\n", design.objective_eV, design.evals,
                  design.converged ? "converged" : "budget exhausted");

      const Component comp = junction_component(design.param);
      const TrapLayout layout = TrapLayout::from_component(comp, "junction");
      auto doc = nlohmann::json::parse(save_layout(layout));
      doc["junction_param"] = junction_param_json(design.param);
      doc["objective_eV"] = design.objective_eV;
      spit(oj_out, doc.dump(2) + "\n");

      if (!oj_trace_csv.empty()) {
        std::ostringstream csv;
        csv << "eval, objective_eV\n";
        for (const auto& [idx, val] : design.trace) csv << idx << ", " << val << "\n";
        spit(oj_trace_csv, csv.str());
      }
      return 0;
    }

    if (*synth) {
      const TrapLayout layout = load_layout(slurp(sw_file));
      const FieldBasis basis = unit_basis(layout);
      const RfDrive drive = parse_drive(sw_drive);

      const Vec2 from = resolve_anchor(layout, sw_from);
      const Vec2 to = resolve_anchor(layout, sw_to);
      const Vec2 dir2 = (to - from).normalized();
      const double span = (to - from).norm();

      const NullPoint null =
          find_null(basis, drive, Vec3(from.x(), from.y(), sw_height));
      const Vec3 hint(dir2.x(), dir2.y(), 0.0);
      const Vec3 origin = null.position;
      const TubePath path = trace_tube_until(
          basis, drive, origin, sw_spacing, span * 1.2, hint, [&](const Vec3& r) {
            return (Vec2(r.x(), r.y()) - from).dot(dir2) >= span;
          });

      WellSpec spec;
      spec.target_axial_freq = sw_freq;
      Waveform wf = synth_transport(basis, drive, path, spec);
      wf = smooth(wf, sw_smooth);

      std::ostringstream csv;
      write_waveform_csv(wf, csv);
      spit(sw_out, csv.str());
      spit(sw_out + ".meta.json", waveform_metadata_json(wf, drive));
      std::printf("%zu frames -> %s\n", wf.frames.size(), sw_out.c_str());

      if (sw_verify) {
        const WaveformReport rep = verify_waveform(basis, drive, wf, path);
        std::printf("max residual field: %.4g V/m\n", rep.max_residual_field);
        std::printf("max well displacement: %.4g um (%d frames over 1 um)\n",
                    rep.max_displacement, rep.flagged_count);
      }
      return 0;
    }

    if (*mksec) {
      const Component sec = make_straight_section(mk_wa, mk_wb, mk_gap, mk_seg, mk_n);
      spit(mk_out, save_layout(TrapLayout::from_component(sec, "s0")));
      return 0;
    }
    if (*mkjun) {
      const Component jun = make_y_junction(mj_wa, mj_wb, mj_gap, mj_leg);
      spit(mj_out, save_layout(TrapLayout::from_component(jun, "j0")));
      return 0;
    }
    if (*mkhex) {
      spit(mh_out, save_layout(assemble_hexagon_ring()));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
