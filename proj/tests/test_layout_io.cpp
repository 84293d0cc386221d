#include "forge/layout_io.hpp"

#include "forge/components.hpp"
#include "forge/errors.hpp"

#include <doctest.h>

using namespace forge;

TEST_CASE("save/load round trip is the identity on the canonical form") {
  const Component sec = make_straight_section(40, 60, 50, 60, 4);
  TrapLayout layout = TrapLayout::from_component(sec, "a");
  layout = attach(layout, sec, "a.east", "west", "b");

  const std::string doc = save_layout(layout);
  const TrapLayout loaded = load_layout(doc);
  CHECK(save_layout(loaded) == doc);  // canonical form is a fixed point

  REQUIRE(loaded.electrodes().size() == layout.electrodes().size());
  for (size_t i = 0; i < layout.electrodes().size(); ++i) {
    const auto& ea = layout.electrodes()[i];
    const auto& eb = loaded.electrodes()[i];
    CHECK(ea.id == eb.id);
    CHECK(ea.net == eb.net);
    REQUIRE(ea.polygon.size() == eb.polygon.size());
    for (size_t k = 0; k < ea.polygon.size(); ++k)
      CHECK((ea.polygon[k] - eb.polygon[k]).norm() <= 1e-9);
  }
  CHECK(loaded.nets().size() == layout.nets().size());
  CHECK(loaded.open_ports().size() == layout.open_ports().size());
}

TEST_CASE("schema errors carry a location") {
  CHECK_THROWS_AS(load_layout("not json at all"), SchemaError);
  CHECK_THROWS_AS(load_layout(R"({"schema":"something-else/9"})"), SchemaError);

  try {
    load_layout(R"({"schema":"iontrap-layout/1","units":"mm"})");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.location == "units");
  }
}

TEST_CASE("self-intersecting polygon in a document is an invariant error") {
  const std::string doc = R"({
    "schema": "iontrap-layout/1",
    "units": "um",
    "nets": {"rf": "rf"},
    "components": [{
      "name": "x",
      "transform": {"translation": [0, 0], "rotation": 0, "mirrored": false},
      "local_nets": {"rf": "rf"},
      "electrodes": [{"id": "e", "net": "rf", "vertices": [0,0, 2,2, 2,0, 0,2]}],
      "ports": []
    }]
  })";
  try {
    load_layout(doc);
    FAIL("expected InvariantError");
  } catch (const InvariantError& e) {
    CHECK(e.invariant == "polygon simple");
  }
}

TEST_CASE("two rf nets are rejected") {
  const std::string doc = R"({
    "schema": "iontrap-layout/1",
    "units": "um",
    "nets": {"rf1": "rf", "rf2": "rf"},
    "components": [{
      "name": "x",
      "transform": {"translation": [0, 0], "rotation": 0, "mirrored": false},
      "local_nets": {"rf1": "rf", "rf2": "rf"},
      "electrodes": [
        {"id": "e1", "net": "rf1", "vertices": [0,0, 10,0, 10,10, 0,10]},
        {"id": "e2", "net": "rf2", "vertices": [20,0, 30,0, 30,10, 20,10]}
      ],
      "ports": []
    }]
  })";
  try {
    load_layout(doc);
    FAIL("expected InvariantError");
  } catch (const InvariantError& e) {
    CHECK(std::string(e.what()).find("single rf net") != std::string::npos);
  }

  const auto problems = validate_layout_document(doc);
  REQUIRE(!problems.empty());
  CHECK(problems[0].find("single rf net") != std::string::npos);
}

TEST_CASE("hexagon ring survives the round trip with stable counts") {
  const TrapLayout ring = assemble_hexagon_ring();
  const std::string doc = save_layout(ring);
  const TrapLayout loaded = load_layout(doc);
  CHECK(loaded.electrodes().size() == ring.electrodes().size());
  CHECK(loaded.nets().size() == ring.nets().size());
  CHECK(save_layout(loaded) == doc);
  CHECK(validate_layout_document(doc).empty());
}
