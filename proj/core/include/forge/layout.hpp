#pragma once

#include "forge/geometry.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace forge {

enum class ElectrodeRole { rf, control, ground };

std::string to_string(ElectrodeRole role);
ElectrodeRole role_from_string(const std::string& s);

/// Coplanar electrode polygon in the z=0 plane. Electrodes sharing a net share a voltage.
struct Electrode {
  std::string id;
  std::string net;
  Polygon polygon;  // µm, simple, CCW, >= 3 vertices

  /// Validates simplicity/vertex spacing and normalizes orientation to CCW.
  static Electrode make(std::string id, std::string net, Polygon polygon);
};

/// One entry of a port cross-section: "rf" or "control" metal of a given width.
struct RailSegment {
  std::string token;  // role-level label, not a net id
  double width;       // µm
  bool operator==(const RailSegment&) const = default;
};

/// Attachment point of a component. The rail profile lists the continuous rail
/// cross-section in order along rot90(direction).
struct Port {
  std::string name;
  Vec2 position;
  Vec2 direction;  // unit, pointing out of the component
  std::vector<RailSegment> rail_profile;
};

/// Reusable library pattern: electrodes plus ports, in a local frame.
struct Component {
  std::string name;
  std::vector<Electrode> electrodes;
  std::vector<Port> ports;
  std::map<std::string, ElectrodeRole> nets;

  const Port& port(const std::string& name) const;
  /// Reflect about the local x axis. Polygons stay CCW; rail profiles reverse.
  Component mirrored() const;
  void validate() const;  // simple polygons, no intra-component area overlap
};

struct Placement {
  std::string instance;
  RigidTransform transform;
  Component component;
};

struct PortRef {
  std::string instance;  // empty when referring to a bare component's port
  std::string port;
};

/// Immutable assembled trap. All operations return new values.
class TrapLayout {
 public:
  TrapLayout() = default;

  /// Wrap a single component as a layout, namespacing ids by `instance`.
  static TrapLayout from_component(const Component& comp, const std::string& instance,
                                   const RigidTransform& transform = {});

  const std::vector<Placement>& placements() const { return placements_; }
  const std::vector<Electrode>& electrodes() const { return electrodes_; }  // placed, flattened
  const std::vector<Port>& open_ports() const { return ports_; }            // names "instance.port"
  const std::set<std::string>& consumed_ports() const { return consumed_; }
  const std::vector<std::pair<std::string, ElectrodeRole>>& nets() const { return nets_; }

  ElectrodeRole net_role(const std::string& net) const;
  bool has_net(const std::string& net) const;
  const Port& port(const std::string& qualified_name) const;
  std::string rf_net() const;

  std::vector<std::string> control_nets() const;
  double total_electrode_area() const;

  /// Checks every layout invariant, returning one message per violation.
  std::vector<std::string> check_invariants() const;

  friend TrapLayout attach(const TrapLayout& base, const Component& comp,
                           const std::string& base_port, const std::string& comp_port,
                           const std::string& instance);

  /// Internal assembly from already-validated parts (used by the loader).
  /// When strict, the first violated layout invariant throws InvariantError;
  /// otherwise the layout is built as-is for check_invariants() to inspect.
  static TrapLayout assemble(std::vector<Placement> placements,
                             std::set<std::string> consumed_ports = {}, bool strict = true);

 private:
  void flatten_and_validate(bool strict);

  std::vector<Placement> placements_;
  std::vector<Electrode> electrodes_;
  std::vector<Port> ports_;
  std::set<std::string> consumed_;
  std::vector<std::pair<std::string, ElectrodeRole>> nets_;  // insertion-ordered
};

/// Rigidly places `comp` so `comp_port` lands on `base_port` with opposed directions,
/// consuming both ports. Throws PortMismatch / OverlapError.
TrapLayout attach(const TrapLayout& base, const Component& comp, const std::string& base_port,
                  const std::string& comp_port, const std::string& instance);

/// Two ports mate when profile_a equals reverse(profile_b), width tolerance 0.01 µm.
bool profiles_mate(const std::vector<RailSegment>& a, const std::vector<RailSegment>& b);

}  // namespace forge
