#include "forge/components.hpp"

#include "forge/constants.hpp"
#include "forge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace forge {

namespace {

using constants::pi;

Polygon rect(double x0, double x1, double y0, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

std::string two_digits(int k) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d", k);
  return buf;
}

void check_section_args(double a, double b, double c, double seg, int n, double gap) {
  if (a <= 0 || b <= 0 || c <= 0 || seg <= 0)
    throw NonPositiveDimension("section: all dimensions must be > 0");
  if (n < 1) throw NonPositiveDimension("section: n_segments must be >= 1");
  if (gap <= 0 || seg <= 2 * gap || c <= 2 * gap + 1.0)
    throw NonPositiveDimension("section: electrode gap incompatible with geometry");
}

Component straight_body(const std::string& name, double wa, double wb, double c, double seg,
                        int n, const SectionOptions& opt, bool experiment_middle) {
  check_section_args(wa, wb, c, seg, n, opt.electrode_gap);
  const double g = opt.electrode_gap;
  const double L = n * seg;
  const double c2 = 0.5 * c;

  Component comp;
  comp.name = name;
  comp.nets["rf"] = ElectrodeRole::rf;
  comp.electrodes.push_back(Electrode::make("rfa", "rf", rect(0, L, -c2 - wa, -c2)));
  comp.electrodes.push_back(Electrode::make("rfb", "rf", rect(0, L, c2, c2 + wb)));

  auto add_control = [&](const std::string& id, Polygon poly) {
    comp.nets[id] = ElectrodeRole::control;
    comp.electrodes.push_back(Electrode::make(id, id, std::move(poly)));
  };

  const int mid = n / 2;
  for (int k = 0; k < n; ++k) {
    const double x0 = k * seg + 0.5 * g;
    const double x1 = (k + 1) * seg - 0.5 * g;
    if (experiment_middle && k == mid) {
      // Finer center segmentation where ion pairs are combined and separated.
      const double w3 = (x1 - x0 - 2 * g) / 3.0;
      for (int j = 0; j < 3; ++j) {
        const double lo = x0 + j * (w3 + g);
        add_control("c" + two_digits(k) + char('a' + j), rect(lo, lo + w3, -(c2 - g), c2 - g));
      }
    } else {
      add_control("c" + two_digits(k), rect(x0, x1, -(c2 - g), c2 - g));
    }
    add_control("t" + two_digits(k), rect(x0, x1, c2 + wb + g, c2 + wb + g + opt.outer_width));
    add_control("b" + two_digits(k), rect(x0, x1, -c2 - wa - g - opt.outer_width, -c2 - wa - g));
  }

  comp.ports = {
      {"west", {0, 0}, {-1, 0}, {{"rf", wb}, {"control", c}, {"rf", wa}}},
      {"east", {L, 0}, {1, 0}, {{"rf", wa}, {"control", c}, {"rf", wb}}},
  };
  return comp;
}

}  // namespace

Component make_straight_section(double rail_width_a, double rail_width_b, double center_gap,
                                double segment_length, int n_segments,
                                const SectionOptions& opt) {
  return straight_body("straight_section", rail_width_a, rail_width_b, center_gap,
                       segment_length, n_segments, opt, false);
}

Component make_load_zone(double rail_width_a, double rail_width_b, double center_gap,
                         double segment_length, int n_segments, const SectionOptions& opt) {
  return straight_body("load_zone", rail_width_a, rail_width_b, center_gap, segment_length,
                       n_segments, opt, false);
}

Component make_experiment_section(double rail_width_a, double rail_width_b, double center_gap,
                                  double segment_length, int n_segments,
                                  const SectionOptions& opt) {
  return straight_body("experiment_section", rail_width_a, rail_width_b, center_gap,
                       segment_length, n_segments, opt, true);
}

namespace {

Vec2 rotated(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

Polygon rotated_rect(double x0, double x1, double y0, double y1, double angle) {
  Polygon out = rect(x0, x1, y0, y1);
  for (auto& v : out) v = rotated(v, angle);
  return out;
}

// Clearance from (x, 0) of a leg to the nearest rf edge, cast in local +/-y.
double channel_clearance(const std::vector<Polygon>& wedges, double angle, double x, int side,
                         double fallback) {
  const Vec2 origin = rotated(Vec2(x, 0), angle);
  const Vec2 dir = rotated(Vec2(0, side), angle);
  double best = fallback;
  for (const auto& w : wedges)
    if (auto hit = ray_hit_distance(origin, dir, w, best)) best = std::min(best, *hit);
  return best;
}

// Outermost rf boundary (measured from the leg axis) near station x on one side.
double rail_outer_extent(const std::vector<Polygon>& wedges, double angle, double x, int side,
                         double probe_from, double fallback) {
  const Vec2 origin = rotated(Vec2(x, side * probe_from), angle);
  const Vec2 dir = rotated(Vec2(0, -side), angle);
  double nearest = probe_from + fallback;
  bool found = false;
  for (const auto& w : wedges) {
    if (auto hit = ray_hit_distance(origin, dir, w, nearest)) {
      nearest = std::min(nearest, *hit);
      found = true;
    }
  }
  return found ? probe_from - nearest : fallback;
}

}  // namespace

Component junction_component(const JunctionParam& param, const JunctionControlOptions& opt) {
  const auto& sh = param.shape;
  const auto wedges = junction_rf_polygons(param);
  const double g = opt.electrode_gap;
  const double c2 = 0.5 * sh.center_gap;
  const double lam = sh.leg_length;

  Component comp;
  comp.name = "y_junction";
  comp.nets["rf"] = ElectrodeRole::rf;
  for (size_t i = 0; i < wedges.size(); ++i)
    comp.electrodes.push_back(Electrode::make("rfw" + std::to_string(i), "rf", wedges[i]));

  auto add_control = [&](const std::string& id, Polygon poly) {
    comp.nets[id] = ElectrodeRole::control;
    comp.electrodes.push_back(Electrode::make(id, id, std::move(poly)));
  };

  for (int k = 0; k < 3; ++k) {
    const double angle = 2 * pi / 3 * k;
    const std::string leg = "l" + std::to_string(k);

    // Channel electrodes, narrow pitch near the center, conforming to the rf edges.
    double hi = lam;
    int idx = 0;
    while (hi > opt.channel_start + 0.5) {
      const double pitch = (hi > opt.narrow_extent + 1e-9) ? opt.segment_pitch : opt.narrow_pitch;
      const double lo = std::max(opt.channel_start, hi - pitch);
      // Narrow with the rails when they bow inward, but never widen past nominal.
      double up = c2, dn = c2;
      for (int s = 0; s <= 4; ++s) {
        const double x = lo + 0.5 * g + (hi - lo - g) * s / 4.0;
        up = std::min(up, channel_clearance(wedges, angle, x, +1, c2));
        dn = std::min(dn, channel_clearance(wedges, angle, x, -1, c2));
      }
      const double y1 = up - g, y0 = -(dn - g);
      if (y1 - y0 > 2.0)
        add_control(leg + "c" + two_digits(idx),
                    rotated_rect(lo + 0.5 * g, hi - 0.5 * g, y0, y1, angle));
      ++idx;
      hi = lo;
    }

    // Outer rows on both sides of the leg, inner edge conforming to the rail edge.
    const double far_probe = c2 + std::max(sh.rail_width_a, sh.rail_width_b) + sh.max_offset + 2 * g;
    for (int side : {+1, -1}) {
      const double nominal = c2 + (side > 0 ? sh.rail_width_b : sh.rail_width_a);
      int j = 0;
      for (double x0 = opt.outer_row_start; x0 + 1.0 < lam; x0 += opt.segment_pitch) {
        const double x1 = std::min(x0 + opt.segment_pitch, lam);
        double edge = nominal;
        for (int s = 0; s <= 4; ++s) {
          const double x = x0 + 0.5 * g + (x1 - x0 - g) * s / 4.0;
          edge = std::max(edge, rail_outer_extent(wedges, angle, x, side, far_probe, nominal));
        }
        const double y_in = edge + g;
        Polygon poly =
            side > 0
                ? rotated_rect(x0 + 0.5 * g, x1 - 0.5 * g, y_in, y_in + opt.outer_width, angle)
                : rotated_rect(x0 + 0.5 * g, x1 - 0.5 * g, -y_in - opt.outer_width, -y_in, angle);
        add_control(leg + (side > 0 ? "t" : "b") + two_digits(j), std::move(poly));
        ++j;
      }
    }
  }

  for (int k = 0; k < 3; ++k) {
    Port port;
    port.name = "leg" + std::to_string(k);
    port.direction = rotated(Vec2(1, 0), 2 * pi / 3 * k);
    port.position = lam * port.direction;
    port.rail_profile = {{"rf", sh.rail_width_a}, {"control", sh.center_gap},
                         {"rf", sh.rail_width_b}};
    comp.ports.push_back(port);
  }
  comp.validate();
  return comp;
}

Component make_y_junction(double rail_width_a, double rail_width_b, double center_gap,
                          double leg_length, const JunctionControlOptions& opt) {
  JunctionShape shape;
  shape.leg_length = leg_length;
  JunctionParam param = initial_junction(rail_width_a, rail_width_b, center_gap, shape);
  return junction_component(param, opt);
}

TrapLayout assemble_hexagon_ring(const HexagonRingSpec& spec) {
  JunctionParam jparam = spec.has_junction
                             ? spec.junction
                             : [&] {
                                 JunctionShape sh;
                                 sh.leg_length = spec.leg_length;
                                 return initial_junction(spec.rail_width_a, spec.rail_width_b,
                                                         spec.center_gap, sh);
                               }();
  jparam.shape.leg_length = spec.leg_length;

  const Component jn = junction_component(jparam);
  const Component jm = jn.mirrored();

  const double a = spec.rail_width_a, b = spec.rail_width_b, c = spec.center_gap;
  const Component sec_n =
      make_straight_section(a, b, c, spec.segment_length, spec.section_segments);
  const Component sec_m =
      make_straight_section(b, a, c, spec.segment_length, spec.section_segments);
  const Component exp_n =
      make_experiment_section(a, b, c, spec.segment_length, spec.section_segments);
  const Component exp_m =
      make_experiment_section(b, a, c, spec.segment_length, spec.section_segments);
  const Component load_n = make_load_zone(a, b, c, spec.segment_length, spec.load_zone_segments);
  const Component load_m = make_load_zone(b, a, c, spec.segment_length, spec.load_zone_segments);

  // Going around the ring: N junctions exit one leg index down from the entry,
  // M junctions one up; edge sections alternate rail handedness to mate.
  TrapLayout ring = TrapLayout::from_component(jn, "j0");
  std::string exit_port = "j0.leg1";
  for (int k = 0; k < 6; ++k) {
    const bool mirrored = (k % 2 == 0);  // j1, j3, j5 are mirrored
    const Component& sec = (k == 2) ? exp_n : (k == 5) ? exp_m : (k % 2 == 0 ? sec_n : sec_m);
    const std::string e = "e" + std::to_string(k);
    ring = attach(ring, sec, exit_port, "west", e);
    if (k == 5) {
      exit_port = e + ".east";
      break;  // closure: the last edge meets j0's open leg
    }
    const std::string j = "j" + std::to_string(k + 1);
    ring = attach(ring, mirrored ? jm : jn, e + ".east", "leg0", j);
    exit_port = j + (mirrored ? ".leg1" : ".leg2");
  }

  // Geometric closure check: the final edge's east port faces j0.leg2.
  const Port& tail = ring.port(exit_port);
  const Port& head = ring.port("j0.leg2");
  if ((tail.position - head.position).norm() > 1e-6 ||
      (tail.direction + head.direction).norm() > 1e-9)
    throw Error("hexagon ring failed to close");

  // Load zones on the outward legs of two opposite junctions.
  ring = attach(ring, load_n, "j0.leg0", "west", "load0");
  ring = attach(ring, load_m, "j3.leg2", "west", "load1");
  return ring;
}

}  // namespace forge
