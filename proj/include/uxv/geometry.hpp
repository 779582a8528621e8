#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "uxv/error.hpp"

namespace uxv {

struct Vec2 {
  double x = 0, y = 0;
  bool operator==(const Vec2&) const = default;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
  bool operator==(const Vec3&) const = default;
  Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec2 xy() const { return {x, y}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double norm(Vec3 a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }

using Polygon = std::vector<Vec2>;

// Tolerance for treating a point as lying on a polygon edge, in metres.
inline constexpr double kBoundaryTolerance = 1e-9;

inline double signed_area(std::span<const Vec2> poly) {
  double a = 0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    a += cross(poly[j], poly[i]);
  return a / 2;
}

inline bool on_segment(Vec2 p, Vec2 a, Vec2 b, double tol = kBoundaryTolerance) {
  const Vec2 ab = b - a, ap = p - a;
  const double len = norm(ab);
  if (len == 0) return norm(ap) <= tol;
  if (std::abs(cross(ab, ap)) > tol * len) return false;
  const double t = dot(ap, ab);
  return t >= -tol * len && t <= len * len + tol * len;
}

inline void require_nondegenerate(std::span<const Vec2> poly) {
  if (poly.size() < 3) throw DegeneratePolygon("polygon needs at least 3 vertices");
  for (const auto& v : poly)
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw DegeneratePolygon("non-finite vertex");
  if (signed_area(poly) == 0) throw DegeneratePolygon("polygon has zero area");
}

// Proper or touching intersection of two closed segments.
inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  return on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) || on_segment(b, c, d);
}

inline bool is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

// Ray casting (even-odd crossings). Points on the boundary count as inside.
inline bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  require_nondegenerate(poly);
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[j], b = poly[i];
    if (on_segment(p, a, b)) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = (a.x - b.x) * (p.y - b.y) / (a.y - b.y) + b.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

// Inside and not on the boundary.
inline bool point_strictly_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    if (on_segment(p, poly[j], poly[i])) return false;
  return point_in_polygon(p, poly);
}

// True when the closed segment touches the closed polygon region.
inline bool segment_hits_polygon(Vec2 a, Vec2 b, std::span<const Vec2> poly) {
  if (point_in_polygon(a, poly) || point_in_polygon(b, poly)) return true;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    if (segments_intersect(a, b, poly[j], poly[i])) return true;
  return false;
}

// Andrew's monotone chain; counter-clockwise, no collinear points.
inline Polygon convex_hull(Polygon pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Moves each vertex of a counter-clockwise convex polygon outward so every
// edge shifts by `margin` along its normal.
inline Polygon offset_convex(const Polygon& hull, double margin) {
  const std::size_t n = hull.size();
  Polygon out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 prev = hull[(i + n - 1) % n], cur = hull[i], next = hull[(i + 1) % n];
    auto outward = [](Vec2 a, Vec2 b) {
      const Vec2 e = b - a;
      return Vec2{e.y, -e.x} * (1.0 / norm(e));
    };
    const Vec2 n1 = outward(prev, cur), n2 = outward(cur, next);
    Vec2 bis = n1 + n2;
    bis = bis * (1.0 / norm(bis));
    out.push_back(cur + bis * (margin / dot(bis, n1)));
  }
  return out;
}

}  // namespace uxv
