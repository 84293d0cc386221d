#include "forge/junction.hpp"

#include "forge/constants.hpp"
#include "forge/errors.hpp"
#include "forge/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace forge {

namespace {

using constants::pi;

Vec2 rotated(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Vec2 line_intersect(const Vec2& p1, const Vec2& d1, const Vec2& p2, const Vec2& d2) {
  const double denom = cross2(d1, d2);
  if (std::abs(denom) < 1e-12) throw Error("junction: parallel rail edges cannot meet");
  const double t = cross2(p2 - p1, d2) / denom;
  return p1 + t * d1;
}

struct Polyline {
  std::vector<Vec2> pts;

  double length() const {
    double s = 0;
    for (size_t i = 1; i < pts.size(); ++i) s += (pts[i] - pts[i - 1]).norm();
    return s;
  }
  Vec2 at(double s) const {
    double acc = 0;
    for (size_t i = 1; i < pts.size(); ++i) {
      const double seg = (pts[i] - pts[i - 1]).norm();
      if (acc + seg >= s || i + 1 == pts.size()) {
        const double t = std::clamp(seg > 0 ? (s - acc) / seg : 0.0, 0.0, 1.0);
        return pts[i - 1] + t * (pts[i] - pts[i - 1]);
      }
      acc += seg;
    }
    return pts.back();
  }
  /// Outward normal of the segment containing arclength s (right normal; the
  /// polyline runs in CCW polygon order). At interior vertices, the bisector.
  Vec2 normal_at(double s) const {
    double acc = 0;
    for (size_t i = 1; i < pts.size(); ++i) {
      const double seg = (pts[i] - pts[i - 1]).norm();
      if (acc + seg >= s - 1e-9 || i + 1 == pts.size()) {
        const Vec2 d = (pts[i] - pts[i - 1]).normalized();
        Vec2 n(d.y(), -d.x());
        // Vertex hit: average with the next segment's normal.
        if (std::abs(s - (acc + seg)) < 1e-9 && i + 1 < pts.size()) {
          const Vec2 d2 = (pts[i + 1] - pts[i]).normalized();
          n = (n + Vec2(d2.y(), -d2.x())).normalized();
        }
        return n;
      }
      acc += seg;
    }
    return {0, 0};
  }
};

struct WedgeFrame {
  Vec2 v1, v2, v3, v4, v5, v6;
  Polyline outer;   // v2 -> v3 -> v4, polygon order
  Polyline inner;   // v5 -> v6 -> v1
  double s_outer_miter, s_inner_miter;
};

// Wedge 0 sits between leg 0 (+x) and leg 1 (120 deg); rails are straight.
WedgeFrame base_wedge(const JunctionShape& sh) {
  const double c2 = 0.5 * sh.center_gap;
  const double p = sh.rail_width_a, q = sh.rail_width_b, lam = sh.leg_length;
  const Vec2 d0(1, 0), l0(0, 1);
  const Vec2 d1 = rotated(d0, 2 * pi / 3), l1 = rotated(l0, 2 * pi / 3);

  WedgeFrame w;
  w.v1 = lam * d0 + c2 * l0;
  w.v2 = lam * d0 + (c2 + q) * l0;
  w.v4 = lam * d1 - (c2 + p) * l1;
  w.v5 = lam * d1 - c2 * l1;
  w.v3 = line_intersect(w.v2, d0, w.v4, d1);
  w.v6 = line_intersect(w.v1, d0, w.v5, d1);
  w.outer.pts = {w.v2, w.v3, w.v4};
  w.inner.pts = {w.v5, w.v6, w.v1};
  w.s_outer_miter = (w.v3 - w.v2).norm();
  w.s_inner_miter = (w.v6 - w.v5).norm();
  return w;
}

struct ControlVertex {
  double s;     // arclength along the polyline
  Vec2 base;    // undisplaced position
  Vec2 normal;  // displacement direction (outward of the polygon)
};

std::vector<ControlVertex> window_vertices(const Polyline& line, double s_center, int count,
                                           double window, double margin) {
  std::vector<ControlVertex> out;
  const double lo = std::max(margin, s_center - window);
  const double hi = std::min(line.length() - margin, s_center + window);
  if (hi <= lo) throw Error("junction: vertex window does not fit on the rail edge");
  for (int j = 0; j < count; ++j) {
    const double s = (count == 1) ? 0.5 * (lo + hi) : lo + (hi - lo) * j / (count - 1);
    out.push_back({s, line.at(s), line.normal_at(s)});
  }
  return out;
}

// Outline between two endpoint vertices: control vertices (displaced), keeping the
// original miter corner when no control vertex sits on it.
std::vector<Vec2> build_run(const Polyline& line, double s_miter,
                            const std::vector<ControlVertex>& ctl,
                            std::span<const double> offsets, bool spline, double chord_tol) {
  struct Entry {
    double s;
    Vec2 p;
  };
  std::vector<Entry> entries;
  bool miter_covered = false;
  for (size_t j = 0; j < ctl.size(); ++j) {
    entries.push_back({ctl[j].s, ctl[j].base + offsets[j] * ctl[j].normal});
    if (std::abs(ctl[j].s - s_miter) < 1e-6) miter_covered = true;
  }
  if (!miter_covered) entries.push_back({s_miter, line.at(s_miter)});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.s < b.s; });

  std::vector<Vec2> pts;
  pts.push_back(line.pts.front());
  for (const auto& e : entries) pts.push_back(e.p);
  pts.push_back(line.pts.back());

  if (!spline) return pts;

  // Centripetal-free uniform Catmull-Rom through the control points, endpoints pinned,
  // flattened to the chord tolerance.
  std::vector<Vec2> smooth;
  auto cr = [&](int i, double t) {
    auto P = [&](int k) { return pts[std::clamp(k, 0, static_cast<int>(pts.size()) - 1)]; };
    const Vec2 p0 = P(i - 1), p1 = P(i), p2 = P(i + 1), p3 = P(i + 2);
    const double t2 = t * t, t3 = t2 * t;
    return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
  };
  smooth.push_back(pts.front());
  for (int i = 0; i + 1 < static_cast<int>(pts.size()); ++i) {
    // Adaptive bisection per span.
    std::vector<std::pair<double, double>> spans{{0.0, 1.0}};
    std::vector<double> knots{0.0, 1.0};
    bool refined = true;
    int guard = 0;
    while (refined && guard++ < 12) {
      refined = false;
      std::vector<double> next{knots.front()};
      for (size_t k = 1; k < knots.size(); ++k) {
        const double a = knots[k - 1], b = knots[k], m = 0.5 * (a + b);
        const Vec2 pa = cr(i, a), pb = cr(i, b), pm = cr(i, m);
        const Vec2 chord_mid = 0.5 * (pa + pb);
        if ((pm - chord_mid).norm() > chord_tol) {
          next.push_back(m);
          refined = true;
        }
        next.push_back(b);
      }
      knots = std::move(next);
    }
    for (size_t k = 1; k < knots.size(); ++k) smooth.push_back(cr(i, knots[k]));
  }
  smooth.back() = pts.back();
  return smooth;
}

Port leg_port(const JunctionShape& sh, int k) {
  const double angle = 2 * pi / 3 * k;
  Port port;
  port.name = "leg" + std::to_string(k);
  port.direction = rotated(Vec2(1, 0), angle);
  port.position = sh.leg_length * port.direction;
  port.rail_profile = {{"rf", sh.rail_width_a},
                       {"control", sh.center_gap},
                       {"rf", sh.rail_width_b}};
  return port;
}

}  // namespace

JunctionParam initial_junction(double rail_width_a, double rail_width_b, double center_gap,
                               const JunctionShape& shape_defaults) {
  if (rail_width_a <= 0 || rail_width_b <= 0 || center_gap <= 0)
    throw NonPositiveDimension("initial_junction: widths and gap must be > 0");
  JunctionParam param;
  param.shape = shape_defaults;
  param.shape.rail_width_a = rail_width_a;
  param.shape.rail_width_b = rail_width_b;
  param.shape.center_gap = center_gap;
  param.vertex_offsets = Eigen::VectorXd::Zero(param.parameter_count());
  return param;
}

std::vector<Polygon> junction_rf_polygons(const JunctionParam& param) {
  const auto& sh = param.shape;
  if (param.vertex_offsets.size() != param.parameter_count())
    throw Error("junction: offset vector size mismatch");
  for (int i = 0; i < param.vertex_offsets.size(); ++i)
    if (std::abs(param.vertex_offsets(i)) > sh.max_offset)
      throw Error("junction: vertex offset exceeds bound");

  const WedgeFrame w = base_wedge(sh);
  constexpr double kPortMargin = 15.0;  // keep ports' rail widths exact

  const auto inner_ctl =
      window_vertices(w.inner, w.s_inner_miter, sh.inner_vertices, sh.vertex_window, kPortMargin);
  const auto outer_ctl =
      window_vertices(w.outer, w.s_outer_miter, sh.outer_vertices, sh.vertex_window, kPortMargin);

  const auto off_inner =
      std::span<const double>(param.vertex_offsets.data(), sh.inner_vertices);
  const auto off_outer = std::span<const double>(
      param.vertex_offsets.data() + sh.inner_vertices, sh.outer_vertices);

  const auto outer_run =
      build_run(w.outer, w.s_outer_miter, outer_ctl, off_outer, sh.spline, sh.chord_tolerance);
  const auto inner_run =
      build_run(w.inner, w.s_inner_miter, inner_ctl, off_inner, sh.spline, sh.chord_tolerance);

  Polygon wedge;
  wedge.push_back(w.v1);
  for (const auto& p : outer_run) wedge.push_back(p);   // v2 ... v4
  for (const auto& p : inner_run) wedge.push_back(p);   // v5 ... v1-side end
  wedge.pop_back();                                     // inner run ends at v1, already first

  // Electrode::make validates simplicity / spacing; rotated copies are exact.
  std::vector<Polygon> out;
  out.push_back(wedge);
  for (int k = 1; k < 3; ++k) {
    Polygon rot;
    rot.reserve(wedge.size());
    for (const auto& v : wedge) rot.push_back(rotated(v, 2 * pi / 3 * k));
    out.push_back(std::move(rot));
  }
  return out;
}

TrapLayout junction_rf_layout(const JunctionParam& param) {
  const auto polys = junction_rf_polygons(param);
  Component comp;
  comp.name = "y_junction_rf";
  comp.nets["rf"] = ElectrodeRole::rf;
  for (size_t i = 0; i < polys.size(); ++i)
    comp.electrodes.push_back(Electrode::make("rfw" + std::to_string(i), "rf", polys[i]));
  for (int k = 0; k < 3; ++k) comp.ports.push_back(leg_port(param.shape, k));
  return TrapLayout::from_component(comp, "j");
}

double junction_objective(const JunctionParam& param, const RfDrive& drive,
                          const JunctionPathSpec& path) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  try {
    const TrapLayout layout = junction_rf_layout(param);
    const FieldBasis basis = FieldBasis::build(layout, path.gap_policy);

    const Vec3 seed(path.start_arclength, 0.0, path.seed_height);
    const NullPoint start = find_null(basis, drive, seed);

    // March down the leg until the projection onto the leg axis reaches the center.
    const TubePath tube =
        trace_tube_until(basis, drive, start.position, path.step,
                         path.start_arclength + 10.0 * path.step, Vec3(-1, 0, 0),
                         [](const Vec3& r) { return r.x() <= 0.0; });
    double peak = 0.0;
    for (double v : tube.pseudopotential) peak = std::max(peak, v);
    return peak;
  } catch (const Error&) {
    return kInf;
  }
}

JunctionDesign optimize_junction(const JunctionParam& start, const RfDrive& drive,
                                 const SimplexConfig& cfg, const JunctionPathSpec& path) {
  drive.validate();
  JunctionDesign design;
  design.param = start;

  int eval_index = 0;
  auto objective = [&](const Eigen::VectorXd& offsets) {
    JunctionParam p = start;
    p.vertex_offsets = offsets;
    const double value = junction_objective(p, drive, path);
    design.trace.emplace_back(eval_index++, value);
    return value;
  };

  const SimplexResult res = nelder_mead(objective, start.vertex_offsets, cfg);
  design.param.vertex_offsets = res.x;
  design.objective_eV = res.f;
  design.evals = res.evals;
  design.converged = res.converged;
  return design;
}

}  // namespace forge
