#include "forge/layout.hpp"

#include "forge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace forge {

namespace {

constexpr double kMinVertexSpacing = 0.01;  // µm
constexpr double kProfileTol = 0.01;        // µm
constexpr double kOverlapAreaTol = 1e-6;    // µm², boundary contact rounds to ~0

std::string qualify(const std::string& instance, const std::string& local) {
  return instance.empty() ? local : instance + "." + local;
}

}  // namespace

std::string to_string(ElectrodeRole role) {
  switch (role) {
    case ElectrodeRole::rf: return "rf";
    case ElectrodeRole::control: return "control";
    case ElectrodeRole::ground: return "ground";
  }
  return "?";
}

ElectrodeRole role_from_string(const std::string& s) {
  if (s == "rf") return ElectrodeRole::rf;
  if (s == "control") return ElectrodeRole::control;
  if (s == "ground") return ElectrodeRole::ground;
  throw SchemaError("unknown electrode role '" + s + "'", "nets");
}

Electrode Electrode::make(std::string id, std::string net, Polygon polygon) {
  if (polygon.size() < 3)
    throw InvariantError("polygon simple", id + ": fewer than 3 vertices");
  for (const auto& v : polygon)
    if (!std::isfinite(v.x()) || !std::isfinite(v.y()))
      throw InvariantError("vertices finite", id + ": non-finite vertex");
  for (size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    if ((b - a).norm() < kMinVertexSpacing)
      throw InvariantError("vertex spacing", id + ": consecutive vertices closer than 0.01 um");
  }
  if (!is_ccw(polygon)) std::reverse(polygon.begin(), polygon.end());
  if (!polygon_is_simple(polygon))
    throw InvariantError("polygon simple", id + ": self-intersecting polygon");
  return Electrode{std::move(id), std::move(net), std::move(polygon)};
}

const Port& Component::port(const std::string& port_name) const {
  for (const auto& p : ports)
    if (p.name == port_name) return p;
  throw Error("component '" + name + "' has no port '" + port_name + "'");
}

Component Component::mirrored() const {
  Component out = *this;
  out.name = name + "_m";
  RigidTransform mirror;
  mirror.mirrored = true;
  for (auto& e : out.electrodes) e.polygon = mirror.apply(e.polygon);
  for (auto& p : out.ports) {
    p.position = mirror.apply(p.position);
    p.direction = mirror.apply_direction(p.direction);
    std::reverse(p.rail_profile.begin(), p.rail_profile.end());
  }
  return out;
}

void Component::validate() const {
  for (const auto& e : electrodes) {
    if (!polygon_is_simple(e.polygon))
      throw InvariantError("polygon simple", name + "/" + e.id);
    if (!nets.count(e.net))
      throw InvariantError("net declared", name + "/" + e.id + " references undeclared net " + e.net);
  }
  for (size_t i = 0; i < electrodes.size(); ++i)
    for (size_t j = i + 1; j < electrodes.size(); ++j) {
      if (overlap_area(electrodes[i].polygon, electrodes[j].polygon) > kOverlapAreaTol)
        throw OverlapError(name + ": electrodes " + electrodes[i].id + " and " +
                           electrodes[j].id + " overlap in area");
    }
  for (const auto& p : ports) {
    if (std::abs(p.direction.norm() - 1.0) > 1e-9)
      throw InvariantError("port direction unit", name + "/" + p.name);
    for (const auto& seg : p.rail_profile)
      if (seg.width <= 0) throw InvariantError("rail profile widths > 0", name + "/" + p.name);
  }
}

TrapLayout TrapLayout::from_component(const Component& comp, const std::string& instance,
                                      const RigidTransform& transform) {
  comp.validate();
  TrapLayout out;
  out.placements_.push_back({instance, transform, comp});
  out.flatten_and_validate(true);
  return out;
}

TrapLayout TrapLayout::assemble(std::vector<Placement> placements,
                                std::set<std::string> consumed_ports, bool strict) {
  TrapLayout out;
  out.placements_ = std::move(placements);
  out.consumed_ = std::move(consumed_ports);
  out.flatten_and_validate(strict);
  return out;
}

void TrapLayout::flatten_and_validate(bool strict) {
  electrodes_.clear();
  ports_.clear();
  nets_.clear();

  std::set<std::string> seen_ids;
  auto note_net = [&](const std::string& net, ElectrodeRole role) {
    for (auto& [n, r] : nets_) {
      if (n == net) {
        if (r != role)
          throw InvariantError("net role consistent", net + " declared with two roles");
        return;
      }
    }
    nets_.emplace_back(net, role);
  };

  for (const auto& pl : placements_) {
    for (const auto& [net, role] : pl.component.nets) {
      // The rf net is global; control/ground nets are namespaced per instance.
      const std::string qualified = (role == ElectrodeRole::rf) ? net : qualify(pl.instance, net);
      note_net(qualified, role);
    }
    for (const auto& e : pl.component.electrodes) {
      const ElectrodeRole role = pl.component.nets.at(e.net);
      Electrode placed;
      placed.id = qualify(pl.instance, e.id);
      placed.net = (role == ElectrodeRole::rf) ? e.net : qualify(pl.instance, e.net);
      placed.polygon = pl.transform.apply(e.polygon);
      if (!seen_ids.insert(placed.id).second)
        throw InvariantError("electrode ids unique", placed.id);
      electrodes_.push_back(std::move(placed));
    }
    for (const auto& p : pl.component.ports) {
      Port placed = p;
      placed.name = qualify(pl.instance, p.name);
      if (consumed_.count(placed.name)) continue;
      placed.position = pl.transform.apply(p.position);
      placed.direction = pl.transform.apply_direction(p.direction);
      if (pl.transform.mirrored)
        std::reverse(placed.rail_profile.begin(), placed.rail_profile.end());
      ports_.push_back(std::move(placed));
    }
  }

  if (strict) {
    const auto problems = check_invariants();
    if (!problems.empty()) throw InvariantError("layout", problems.front());
  }
}

std::vector<std::string> TrapLayout::check_invariants() const {
  std::vector<std::string> problems;

  int rf_nets = 0;
  for (const auto& [net, role] : nets_)
    if (role == ElectrodeRole::rf) ++rf_nets;
  if (rf_nets != 1)
    problems.push_back("single rf net: layout has " + std::to_string(rf_nets) + " rf nets");

  for (const auto& e : electrodes_) {
    if (!polygon_is_simple(e.polygon))
      problems.push_back("polygon simple: " + e.id);
    if (!is_ccw(e.polygon)) problems.push_back("polygon ccw: " + e.id);
  }

  // Different nets must not overlap in area; same-net metal may merge.
  for (size_t i = 0; i < electrodes_.size(); ++i) {
    for (size_t j = i + 1; j < electrodes_.size(); ++j) {
      if (electrodes_[i].net == electrodes_[j].net) continue;
      // Cheap bounding-box reject before the exact area test.
      const auto& A = electrodes_[i].polygon;
      const auto& B = electrodes_[j].polygon;
      double ax0 = 1e300, ax1 = -1e300, ay0 = 1e300, ay1 = -1e300;
      for (const auto& v : A) {
        ax0 = std::min(ax0, v.x()); ax1 = std::max(ax1, v.x());
        ay0 = std::min(ay0, v.y()); ay1 = std::max(ay1, v.y());
      }
      bool disjoint = true;
      for (const auto& v : B) {
        if (v.x() >= ax0 - 1 && v.x() <= ax1 + 1 && v.y() >= ay0 - 1 && v.y() <= ay1 + 1) {
          disjoint = false;
          break;
        }
      }
      if (disjoint) continue;
      if (overlap_area(A, B) > kOverlapAreaTol)
        problems.push_back("no cross-net overlap: " + electrodes_[i].id + " and " +
                           electrodes_[j].id);
    }
  }
  return problems;
}

ElectrodeRole TrapLayout::net_role(const std::string& net) const {
  for (const auto& [n, r] : nets_)
    if (n == net) return r;
  throw Error("unknown net " + net);
}

bool TrapLayout::has_net(const std::string& net) const {
  for (const auto& [n, r] : nets_)
    if (n == net) return true;
  return false;
}

const Port& TrapLayout::port(const std::string& qualified_name) const {
  for (const auto& p : ports_)
    if (p.name == qualified_name) return p;
  throw Error("layout has no open port '" + qualified_name + "'");
}

std::string TrapLayout::rf_net() const {
  for (const auto& [n, r] : nets_)
    if (r == ElectrodeRole::rf) return n;
  throw Error("layout has no rf net");
}

std::vector<std::string> TrapLayout::control_nets() const {
  std::vector<std::string> out;
  for (const auto& [n, r] : nets_)
    if (r == ElectrodeRole::control) out.push_back(n);
  return out;
}

double TrapLayout::total_electrode_area() const {
  double a = 0;
  for (const auto& e : electrodes_) a += std::abs(signed_area(e.polygon));
  return a;
}

bool profiles_mate(const std::vector<RailSegment>& a, const std::vector<RailSegment>& b) {
  if (a.size() != b.size()) return false;
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& x = a[i];
    const auto& y = b[n - 1 - i];
    if (x.token != y.token) return false;
    if (std::abs(x.width - y.width) > kProfileTol) return false;
  }
  return true;
}

TrapLayout attach(const TrapLayout& base, const Component& comp, const std::string& base_port,
                  const std::string& comp_port, const std::string& instance) {
  comp.validate();
  const Port& bp = base.port(base_port);
  const Port& cp = comp.port(comp_port);

  if (!profiles_mate(bp.rail_profile, cp.rail_profile)) {
    auto fmt = [](const std::vector<RailSegment>& prof) {
      std::string s = "[";
      for (const auto& seg : prof) s += seg.token + ":" + std::to_string(seg.width) + " ";
      return s + "]";
    };
    throw PortMismatch("rail profiles differ at " + base_port + " vs " + comp_port + ": " +
                       fmt(bp.rail_profile) + " vs " + fmt(cp.rail_profile));
  }

  // Rotate comp so cp.direction becomes -bp.direction, then translate cp onto bp.
  RigidTransform t;
  const double target = std::atan2(-bp.direction.y(), -bp.direction.x());
  const double source = std::atan2(cp.direction.y(), cp.direction.x());
  t.rotation = target - source;
  const double c = std::cos(t.rotation), s = std::sin(t.rotation);
  const Vec2 rp(c * cp.position.x() - s * cp.position.y(),
                s * cp.position.x() + c * cp.position.y());
  t.translation = bp.position - rp;

  std::vector<Placement> placements = base.placements();
  for (const auto& pl : placements)
    if (pl.instance == instance) throw Error("instance name '" + instance + "' already used");
  placements.push_back({instance, t, comp});

  // Both mated ports are consumed.
  std::set<std::string> consumed = base.consumed_ports();
  consumed.insert(base_port);
  consumed.insert(instance.empty() ? comp_port : instance + "." + comp_port);

  try {
    return TrapLayout::assemble(std::move(placements), std::move(consumed));
  } catch (const InvariantError& e) {
    if (std::string(e.what()).find("no cross-net overlap") != std::string::npos)
      throw OverlapError(e.what());
    throw;
  }
}

}  // namespace forge
