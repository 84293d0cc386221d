#include "forge/layout_io.hpp"

#include "forge/errors.hpp"

#include <nlohmann/json.hpp>

#include <set>

namespace forge {

namespace {

using nlohmann::json;

json transform_to_json(const RigidTransform& t) {
  return json{{"translation", {t.translation.x(), t.translation.y()}},
              {"rotation", t.rotation},
              {"mirrored", t.mirrored}};
}

RigidTransform transform_from_json(const json& j, const std::string& where) {
  RigidTransform t;
  if (!j.is_object()) throw SchemaError("transform must be an object", where);
  const auto& tr = j.at("translation");
  if (!tr.is_array() || tr.size() != 2)
    throw SchemaError("translation must be [x, y]", where + ".translation");
  t.translation = Vec2(tr[0].get<double>(), tr[1].get<double>());
  t.rotation = j.at("rotation").get<double>();
  t.mirrored = j.value("mirrored", false);
  return t;
}

json port_to_json(const Port& p) {
  json profile = json::array();
  for (const auto& seg : p.rail_profile) profile.push_back({{"net", seg.token}, {"width", seg.width}});
  return json{{"name", p.name},
              {"position", {p.position.x(), p.position.y()}},
              {"direction", {p.direction.x(), p.direction.y()}},
              {"rail_profile", profile}};
}

Port port_from_json(const json& j, const std::string& where) {
  Port p;
  p.name = j.at("name").get<std::string>();
  const auto& pos = j.at("position");
  const auto& dir = j.at("direction");
  if (!pos.is_array() || pos.size() != 2 || !dir.is_array() || dir.size() != 2)
    throw SchemaError("port position/direction must be [x, y]", where);
  p.position = Vec2(pos[0].get<double>(), pos[1].get<double>());
  p.direction = Vec2(dir[0].get<double>(), dir[1].get<double>());
  for (const auto& seg : j.value("rail_profile", json::array()))
    p.rail_profile.push_back({seg.at("net").get<std::string>(), seg.at("width").get<double>()});
  return p;
}

}  // namespace

std::string save_layout(const TrapLayout& layout) {
  json doc;
  doc["schema"] = "iontrap-layout/1";
  doc["units"] = "um";

  json nets = json::object();
  for (const auto& [net, role] : layout.nets()) nets[net] = to_string(role);
  doc["nets"] = nets;

  json components = json::array();
  for (const auto& pl : layout.placements()) {
    json comp;
    comp["name"] = pl.instance;
    comp["component"] = pl.component.name;
    comp["transform"] = transform_to_json(pl.transform);

    json local_nets = json::object();
    for (const auto& [net, role] : pl.component.nets) local_nets[net] = to_string(role);
    comp["local_nets"] = local_nets;

    json electrodes = json::array();
    for (const auto& e : pl.component.electrodes) {
      json vertices = json::array();
      for (const auto& v : e.polygon) {
        vertices.push_back(v.x());
        vertices.push_back(v.y());
      }
      electrodes.push_back({{"id", e.id}, {"net", e.net}, {"vertices", vertices}});
    }
    comp["electrodes"] = electrodes;

    json ports = json::array();
    for (const auto& p : pl.component.ports) ports.push_back(port_to_json(p));
    comp["ports"] = ports;
    components.push_back(comp);
  }
  doc["components"] = components;

  json consumed = json::array();
  for (const auto& name : layout.consumed_ports()) consumed.push_back(name);
  doc["consumed_ports"] = consumed;

  return doc.dump(2) + "\n";
}

namespace {

TrapLayout parse_document(const std::string& document, bool strict = true) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("not valid structured text: ") + e.what(),
                      "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw SchemaError("top level must be an object", "$");
  if (doc.value("schema", "") != "iontrap-layout/1")
    throw SchemaError("missing or unsupported schema (want iontrap-layout/1)", "schema");
  if (doc.value("units", "") != "um") throw SchemaError("units must be 'um'", "units");
  if (!doc.contains("nets") || !doc["nets"].is_object())
    throw SchemaError("missing nets object", "nets");
  if (!doc.contains("components") || !doc["components"].is_array())
    throw SchemaError("missing components array", "components");

  std::vector<Placement> placements;
  size_t ci = 0;
  for (const auto& comp : doc["components"]) {
    const std::string where = "components[" + std::to_string(ci) + "]";
    Placement pl;
    pl.instance = comp.value("name", "");
    pl.transform = transform_from_json(comp.at("transform"), where + ".transform");

    pl.component.name = comp.value("component", pl.instance);
    if (!comp.contains("local_nets") || !comp["local_nets"].is_object())
      throw SchemaError("missing local_nets", where + ".local_nets");
    for (const auto& [net, role] : comp["local_nets"].items())
      pl.component.nets[net] = role_from_string(role.get<std::string>());

    if (!comp.contains("electrodes") || !comp["electrodes"].is_array())
      throw SchemaError("missing electrodes array", where + ".electrodes");
    size_t ei = 0;
    for (const auto& e : comp["electrodes"]) {
      const std::string ewhere = where + ".electrodes[" + std::to_string(ei) + "]";
      if (!e.contains("id") || !e.contains("net") || !e.contains("vertices"))
        throw SchemaError("electrode needs id, net, vertices", ewhere);
      const auto& vs = e["vertices"];
      if (!vs.is_array() || vs.size() < 6 || vs.size() % 2 != 0)
        throw SchemaError("vertices must be a flat [x0,y0,x1,y1,...] array of >= 3 points",
                          ewhere + ".vertices");
      Polygon poly;
      for (size_t i = 0; i < vs.size(); i += 2)
        poly.emplace_back(vs[i].get<double>(), vs[i + 1].get<double>());
      pl.component.electrodes.push_back(
          Electrode::make(e["id"].get<std::string>(), e["net"].get<std::string>(), poly));
      ++ei;
    }

    for (const auto& p : comp.value("ports", json::array()))
      pl.component.ports.push_back(port_from_json(p, where + ".ports"));
    placements.push_back(std::move(pl));
    ++ci;
  }

  std::set<std::string> consumed;
  for (const auto& name : doc.value("consumed_ports", json::array()))
    consumed.insert(name.get<std::string>());

  TrapLayout layout = TrapLayout::assemble(std::move(placements), std::move(consumed), strict);

  // The document's top-level net table must agree with the assembled layout.
  for (const auto& [net, role] : layout.nets()) {
    if (!doc["nets"].contains(net))
      throw SchemaError("net '" + net + "' missing from nets table", "nets");
    if (doc["nets"][net].get<std::string>() != to_string(role))
      throw SchemaError("net '" + net + "' role mismatch", "nets." + net);
  }
  return layout;
}

}  // namespace

TrapLayout load_layout(const std::string& document) { return parse_document(document); }

std::vector<std::string> validate_layout_document(const std::string& document) {
  std::vector<std::string> problems;
  try {
    const TrapLayout layout = parse_document(document, /*strict=*/false);
    for (const auto& msg : layout.check_invariants()) problems.push_back(msg);
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
  return problems;
}

}  // namespace forge
