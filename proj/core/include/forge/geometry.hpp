#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace forge {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Planar polygon, vertices in micrometers, counterclockwise.
using Polygon = std::vector<Vec2>;

inline Vec2 rot90(const Vec2& v) { return {-v.y(), v.x()}; }
inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Polygon& poly);
bool is_ccw(const Polygon& poly);

/// No two non-adjacent edges intersect; adjacent edges meet only at the shared vertex.
bool polygon_is_simple(const Polygon& poly);

/// Winding-number test; points on the boundary count as inside.
bool point_in_polygon(const Polygon& poly, const Vec2& p);

/// A point strictly interior to a simple polygon (centroid of the first ear).
Vec2 interior_point(const Polygon& poly);

/// Ear-clipping triangulation of a simple CCW polygon; returns vertex index triples.
std::vector<std::array<int, 3>> triangulate(const Polygon& poly);

/// Area of the intersection of two simple polygons (triangulate + convex clip).
double overlap_area(const Polygon& a, const Polygon& b);

/// Offset each edge outward along its normal by edge_offsets[i] (edge i runs from
/// vertex i to i+1), rebuilding vertices by miter intersection. Offsets may differ
/// per edge; zero leaves an edge in place.
Polygon offset_polygon(const Polygon& poly, std::span<const double> edge_offsets);

/// Distance from `origin` along unit `dir` to the nearest boundary crossing of `poly`,
/// if one exists within `max_dist`.
std::optional<double> ray_hit_distance(const Vec2& origin, const Vec2& dir, const Polygon& poly,
                                       double max_dist);

/// Rigid placement: optional mirror (y -> -y), then rotation, then translation.
struct RigidTransform {
  double rotation = 0.0;  // radians, counterclockwise
  Vec2 translation = Vec2::Zero();
  bool mirrored = false;

  Vec2 apply(const Vec2& p) const;
  Vec2 apply_direction(const Vec2& d) const;
  /// Mirrored placements reverse vertex order so the result stays counterclockwise.
  Polygon apply(const Polygon& poly) const;
};

}  // namespace forge
