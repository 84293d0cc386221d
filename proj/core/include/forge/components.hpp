#pragma once

#include "forge/junction.hpp"
#include "forge/layout.hpp"

namespace forge {

/// Shared small dimensions of library components.
struct SectionOptions {
  double electrode_gap = 4.0;   // µm between adjacent electrodes
  double outer_width = 100.0;   // µm transverse extent of the outer control rows
};

/// Linear five-wire transport section along +x, length = n_segments * segment_length.
/// Two continuous rf rails of the given widths flank a segmented center control row;
/// segmented outer control rows flank the rails. Ports "west" and "east".
///
/// rail_width_a is the rail on the -y side, rail_width_b on +y; center_gap is the
/// distance between the rails' inner edges.
Component make_straight_section(double rail_width_a, double rail_width_b, double center_gap,
                                double segment_length, int n_segments,
                                const SectionOptions& opt = {});

/// Straight section designated for loading (slot geometry is out of scope; the
/// component differs by name/zone designation only).
Component make_load_zone(double rail_width_a, double rail_width_b, double center_gap,
                         double segment_length, int n_segments, const SectionOptions& opt = {});

/// Straight section with finer center segmentation in the middle, for combining
/// and separating ion pairs.
Component make_experiment_section(double rail_width_a, double rail_width_b, double center_gap,
                                  double segment_length, int n_segments,
                                  const SectionOptions& opt = {});

struct JunctionControlOptions {
  double electrode_gap = 4.0;
  double outer_width = 100.0;
  double outer_row_start = 120.0;   // µm from center; keeps adjacent legs' rows apart
  double channel_start = 25.0;      // µm from center where channel electrodes begin
  double narrow_extent = 120.0;     // µm: use narrow_pitch below this radius
  double narrow_pitch = 20.0;       // µm segment pitch near the center
  double segment_pitch = 60.0;      // µm segment pitch further out
};

/// Full Y-junction component (rf wedges plus control electrodes) from a rail-shape
/// parameterization. Control electrodes conform to the rf edges, so optimized rail
/// shapes keep a valid gap. Ports "leg0", "leg1", "leg2" at 0/120/240 degrees.
Component junction_component(const JunctionParam& param, const JunctionControlOptions& opt = {});

/// Library Y junction with straight rails (zero vertex offsets).
Component make_y_junction(double rail_width_a, double rail_width_b, double center_gap,
                          double leg_length = 300.0, const JunctionControlOptions& opt = {});

struct HexagonRingSpec {
  double rail_width_a = 40.0;
  double rail_width_b = 60.0;
  double center_gap = 50.0;
  double leg_length = 300.0;
  double segment_length = 60.0;
  int section_segments = 5;     // ring edge length = 2*leg_length + section length
  int load_zone_segments = 4;
  JunctionParam junction;       // shared rail shape; default = straight rails
  bool has_junction = false;    // set true when `junction` was provided
};

/// Six Y junctions in a closed hexagonal ring with a section in every edge (two of
/// them experiment sections), plus two load zones on opposite outward legs.
/// Junction chirality alternates around the ring so the asymmetric rail profiles mate.
TrapLayout assemble_hexagon_ring(const HexagonRingSpec& spec = {});

}  // namespace forge
