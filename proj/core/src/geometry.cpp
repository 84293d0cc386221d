#include "forge/geometry.hpp"

#include "forge/errors.hpp"

#include <algorithm>
#include <cmath>

namespace forge {

namespace {

constexpr double kEps = 1e-12;

// Orientation of c relative to segment a->b, scaled by |b-a|.
double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross2(b - a, c - a); }

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  if (std::abs(orient(a, b, p)) > kEps * (b - a).norm() * std::max(1.0, (p - a).norm())) return false;
  return p.x() >= std::min(a.x(), b.x()) - kEps && p.x() <= std::max(a.x(), b.x()) + kEps &&
         p.y() >= std::min(a.y(), b.y()) - kEps && p.y() <= std::max(a.y(), b.y()) + kEps;
}

// True if open segments (a,b) and (c,d) intersect anywhere except at shared endpoints.
bool segments_intersect_interior(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d,
                                 bool adjacent) {
  const double d1 = orient(c, d, a);
  const double d2 = orient(c, d, b);
  const double d3 = orient(a, b, c);
  const double d4 = orient(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (adjacent) {
    // Adjacent polygon edges share one endpoint; only collinear overlap is illegal.
    const Vec2 u = b - a, v = d - c;
    if (std::abs(cross2(u, v)) > kEps * u.norm() * v.norm()) return false;
  }
  if (std::abs(d1) <= kEps && on_segment(c, d, a)) return true;
  if (std::abs(d2) <= kEps && on_segment(c, d, b)) return true;
  if (std::abs(d3) <= kEps && on_segment(a, b, c)) return true;
  if (std::abs(d4) <= kEps && on_segment(a, b, d)) return true;
  return false;
}

}  // namespace

double signed_area(const Polygon& poly) {
  double s = 0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const size_t j = (i + 1) % n;
    s += cross2(poly[i], poly[j]);
  }
  return 0.5 * s;
}

bool is_ccw(const Polygon& poly) { return signed_area(poly) > 0; }

bool polygon_is_simple(const Polygon& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const size_t i2 = (i + 1) % n;
    for (size_t j = i + 1; j < n; ++j) {
      const size_t j2 = (j + 1) % n;
      if (i == j || i2 == j || i == j2) {
        // Adjacent edges: reject only collinear overlap beyond the shared vertex.
        const Vec2 &a = poly[i], &b = poly[i2], &c = poly[j], &d = poly[j2];
        if (segments_intersect_interior(a, b, c, d, /*adjacent=*/true)) {
          // A shared endpoint alone is not an intersection.
          int shared = 0;
          if ((a - c).norm() < kEps || (a - d).norm() < kEps) ++shared;
          if ((b - c).norm() < kEps || (b - d).norm() < kEps) ++shared;
          if (shared == 0) return false;
          // Shared vertex: check the other endpoints do not lie on the opposite edge.
          const Vec2 u = b - a, v = d - c;
          if (std::abs(cross2(u, v)) < kEps * u.norm() * v.norm()) {
            if (on_segment(a, b, c) && (c - a).norm() > kEps && (c - b).norm() > kEps) return false;
            if (on_segment(a, b, d) && (d - a).norm() > kEps && (d - b).norm() > kEps) return false;
            if (on_segment(c, d, a) && (a - c).norm() > kEps && (a - d).norm() > kEps) return false;
            if (on_segment(c, d, b) && (b - c).norm() > kEps && (b - d).norm() > kEps) return false;
          }
        }
        continue;
      }
      if (segments_intersect_interior(poly[i], poly[i2], poly[j], poly[j2], /*adjacent=*/false))
        return false;
    }
  }
  return true;
}

bool point_in_polygon(const Polygon& poly, const Vec2& p) {
  const size_t n = poly.size();
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 &a = poly[j], &b = poly[i];
    if (on_segment(a, b, p)) return true;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

std::vector<std::array<int, 3>> triangulate(const Polygon& poly) {
  const int n = static_cast<int>(poly.size());
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  if (signed_area(poly) < 0) std::reverse(idx.begin(), idx.end());

  std::vector<std::array<int, 3>> tris;
  std::vector<int> v = idx;
  int guard = 0;
  const int guard_max = 2 * n * n + 16;
  while (v.size() > 3 && guard++ < guard_max) {
    bool clipped = false;
    const int m = static_cast<int>(v.size());
    for (int i = 0; i < m; ++i) {
      const int ia = v[(i + m - 1) % m], ib = v[i], ic = v[(i + 1) % m];
      const Vec2 &a = poly[ia], &b = poly[ib], &c = poly[ic];
      if (orient(a, b, c) <= kEps) continue;  // reflex or degenerate corner
      bool ear = true;
      for (int k : v) {
        if (k == ia || k == ib || k == ic) continue;
        const Vec2& p = poly[k];
        if (orient(a, b, p) >= -kEps && orient(b, c, p) >= -kEps && orient(c, a, p) >= -kEps) {
          ear = false;
          break;
        }
      }
      if (!ear) continue;
      tris.push_back({ia, ib, ic});
      v.erase(v.begin() + i);
      clipped = true;
      break;
    }
    if (!clipped) break;  // numerically stuck; bail to the guard check below
  }
  if (v.size() == 3) tris.push_back({v[0], v[1], v[2]});

  double tri_area = 0;
  for (const auto& t : tris)
    tri_area += 0.5 * std::abs(orient(poly[t[0]], poly[t[1]], poly[t[2]]));
  const double want = std::abs(signed_area(poly));
  if (std::abs(tri_area - want) > 1e-6 * std::max(1.0, want))
    throw Error("triangulate: ear clipping failed (polygon not simple?)");
  return tris;
}

Vec2 interior_point(const Polygon& poly) {
  const auto tris = triangulate(poly);
  const auto& t = tris.front();
  return (poly[t[0]] + poly[t[1]] + poly[t[2]]) / 3.0;
}

namespace {

// Sutherland-Hodgman clip of a convex subject by convex clip polygon (both CCW).
std::vector<Vec2> clip_convex(std::vector<Vec2> subject, const std::vector<Vec2>& clip) {
  for (size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
    const Vec2 &a = clip[i], &b = clip[(i + 1) % clip.size()];
    std::vector<Vec2> out;
    out.reserve(subject.size() + 2);
    for (size_t j = 0; j < subject.size(); ++j) {
      const Vec2 &p = subject[j], &q = subject[(j + 1) % subject.size()];
      const double dp = orient(a, b, p), dq = orient(a, b, q);
      if (dp >= -kEps) out.push_back(p);
      if ((dp > kEps && dq < -kEps) || (dp < -kEps && dq > kEps)) {
        const double t = dp / (dp - dq);
        out.push_back(p + t * (q - p));
      }
    }
    subject = std::move(out);
  }
  return subject;
}

double poly_abs_area(const std::vector<Vec2>& p) {
  if (p.size() < 3) return 0;
  double s = 0;
  for (size_t i = 0; i < p.size(); ++i) s += cross2(p[i], p[(i + 1) % p.size()]);
  return 0.5 * std::abs(s);
}

}  // namespace

double overlap_area(const Polygon& a, const Polygon& b) {
  const auto ta = triangulate(a);
  const auto tb = triangulate(b);
  double total = 0;
  for (const auto& i : ta) {
    std::vector<Vec2> tri_a = {a[i[0]], a[i[1]], a[i[2]]};
    if (orient(tri_a[0], tri_a[1], tri_a[2]) < 0) std::swap(tri_a[1], tri_a[2]);
    for (const auto& j : tb) {
      std::vector<Vec2> tri_b = {b[j[0]], b[j[1]], b[j[2]]};
      if (orient(tri_b[0], tri_b[1], tri_b[2]) < 0) std::swap(tri_b[1], tri_b[2]);
      total += poly_abs_area(clip_convex(tri_a, tri_b));
    }
  }
  return total;
}

Polygon offset_polygon(const Polygon& poly, std::span<const double> edge_offsets) {
  const size_t n = poly.size();
  if (edge_offsets.size() != n) throw Error("offset_polygon: offsets size mismatch");
  // For CCW polygons the outward normal of edge i->i+1 is the right normal.
  std::vector<Vec2> pts(n), dirs(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec2 d = (poly[(i + 1) % n] - poly[i]).normalized();
    const Vec2 outward(d.y(), -d.x());
    pts[i] = poly[i] + edge_offsets[i] * outward;
    dirs[i] = d;
  }
  Polygon out(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t h = (i + n - 1) % n;  // edge ending at vertex i
    const Vec2 &p1 = pts[h], &d1 = dirs[h];
    const Vec2 &p2 = pts[i], &d2 = dirs[i];
    const double denom = cross2(d1, d2);
    if (std::abs(denom) < 1e-9) {
      // Nearly parallel edges: shift the vertex by the mean offset normal.
      const Vec2 outward(d2.y(), -d2.x());
      out[i] = poly[i] + 0.5 * (edge_offsets[h] + edge_offsets[i]) * outward;
    } else {
      const double t = cross2(p2 - p1, d2) / denom;
      out[i] = p1 + t * d1;
    }
  }
  return out;
}

std::optional<double> ray_hit_distance(const Vec2& origin, const Vec2& dir, const Polygon& poly,
                                       double max_dist) {
  double best = max_dist;
  bool hit = false;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 &a = poly[i], &b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    const double denom = cross2(dir, e);
    if (std::abs(denom) < 1e-14) continue;
    const double t = cross2(a - origin, e) / denom;   // distance along ray
    const double u = cross2(a - origin, dir) / denom; // parameter along edge
    if (t > 1e-9 && t <= best && u >= -1e-9 && u <= 1 + 1e-9) {
      best = t;
      hit = true;
    }
  }
  if (!hit) return std::nullopt;
  return best;
}

Vec2 RigidTransform::apply(const Vec2& p) const {
  Vec2 q = mirrored ? Vec2(p.x(), -p.y()) : p;
  const double c = std::cos(rotation), s = std::sin(rotation);
  return Vec2(c * q.x() - s * q.y(), s * q.x() + c * q.y()) + translation;
}

Vec2 RigidTransform::apply_direction(const Vec2& d) const {
  Vec2 q = mirrored ? Vec2(d.x(), -d.y()) : d;
  const double c = std::cos(rotation), s = std::sin(rotation);
  return {c * q.x() - s * q.y(), s * q.x() + c * q.y()};
}

Polygon RigidTransform::apply(const Polygon& poly) const {
  Polygon out;
  out.reserve(poly.size());
  for (const auto& p : poly) out.push_back(apply(p));
  if (mirrored) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace forge
