#pragma once

#include "forge/geometry.hpp"
#include "forge/layout.hpp"
#include "forge/optim.hpp"
#include "forge/pseudo.hpp"

#include <Eigen/Core>

#include <vector>

namespace forge {

/// Shape space of the Y-junction rf rails: a window of control vertices on the inner
/// and outer rail edges of one wedge, each free to move along its initial edge normal.
/// The other two wedges are exact 120-degree copies, so threefold symmetry holds by
/// construction.
struct JunctionShape {
  double rail_width_a = 40.0;   // µm, rail on a leg's -y side
  double rail_width_b = 60.0;   // µm, +y side
  double center_gap = 50.0;     // µm between rail inner edges
  double leg_length = 300.0;    // µm from junction center to each port
  int inner_vertices = 9;       // control vertices on the inner rail edge
  int outer_vertices = 9;       // and on the outer edge (9+9 = 18 parameters)
  double vertex_window = 150.0; // µm of edge arclength each side of the wedge corner
  double max_offset = 30.0;     // µm bound on each vertex displacement
  bool spline = false;          // smooth the displaced outline with a spline
  double chord_tolerance = 0.1; // µm polygonization tolerance for the spline
};

struct JunctionParam {
  JunctionShape shape;
  Eigen::VectorXd vertex_offsets;  // inner then outer, µm

  int parameter_count() const { return shape.inner_vertices + shape.outer_vertices; }
};

/// Straight-railed starting point: three legs at 120 degrees, all offsets zero.
JunctionParam initial_junction(double rail_width_a, double rail_width_b, double center_gap,
                               const JunctionShape& shape_defaults = {});

/// The three rf wedge polygons for a parameter vector. Throws when the displaced
/// outline self-intersects or violates vertex spacing.
std::vector<Polygon> junction_rf_polygons(const JunctionParam& param);

/// rf-only layout used by the optimization objective.
TrapLayout junction_rf_layout(const JunctionParam& param);

struct JunctionPathSpec {
  double start_arclength = 200.0;  // µm out on one leg
  double step = 1.0;               // µm sampling along the tube
  double seed_height = 40.0;       // µm initial guess for the rf null height
  GapPolicy gap_policy = GapPolicy::grounded_gaps;  // bare-rail objective model
};

/// Bump height: max pseudopotential along the tube traced from one leg into the
/// junction center. Returns +infinity when the geometry is invalid or the tube is
/// lost (barrier semantics for the optimizer).
double junction_objective(const JunctionParam& param, const RfDrive& drive,
                          const JunctionPathSpec& path = {});

struct JunctionDesign {
  JunctionParam param;
  double objective_eV = 0.0;
  std::vector<std::pair<int, double>> trace;  // (eval index, objective)
  int evals = 0;
  bool converged = false;  // false: eval budget exhausted, best-so-far returned
};

/// Nelder-Mead over the 18 vertex offsets. Deterministic: two identical runs give
/// bit-identical designs.
JunctionDesign optimize_junction(const JunctionParam& start, const RfDrive& drive,
                                 const SimplexConfig& cfg, const JunctionPathSpec& path = {});

}  // namespace forge
