#include "wbc/geometry.hpp"

#include <algorithm>

namespace wbc {

double point_segment_distance(const Vec2& p, const Segment& s) {
  Vec2 ab = s.b - s.a;
  double len_sq = norm_sq(ab);
  if (len_sq == 0.0) return norm(p - s.a);
  double t = std::clamp(dot(p - s.a, ab) / len_sq, 0.0, 1.0);
  return norm(p - (s.a + ab * t));
}

bool segments_intersect(const Segment& s1, const Segment& s2) {
  Vec2 r = s1.b - s1.a;
  Vec2 s = s2.b - s2.a;
  double rxs = cross(r, s);
  Vec2 qp = s2.a - s1.a;
  if (rxs == 0.0) {
    // Parallel: overlap only if collinear.
    if (cross(qp, r) != 0.0) return false;
    double rr = norm_sq(r);
    if (rr == 0.0) return norm(qp) == 0.0 || point_segment_distance(s1.a, s2) == 0.0;
    double t0 = dot(qp, r) / rr;
    double t1 = t0 + dot(s, r) / rr;
    if (t0 > t1) std::swap(t0, t1);
    return t1 >= 0.0 && t0 <= 1.0;
  }
  double t = cross(qp, s) / rxs;
  double u = cross(qp, r) / rxs;
  return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

double segment_segment_distance(const Segment& s1, const Segment& s2) {
  if (segments_intersect(s1, s2)) return 0.0;
  double d = point_segment_distance(s1.a, s2);
  d = std::min(d, point_segment_distance(s1.b, s2));
  d = std::min(d, point_segment_distance(s2.a, s1));
  d = std::min(d, point_segment_distance(s2.b, s1));
  return d;
}

bool point_in_polygon(const Vec2& p, const ConvexPolygon& poly) {
  size_t n = poly.pts.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.pts[i];
    const Vec2& b = poly.pts[(i + 1) % n];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

namespace {

// Separating-axis test over the edge normals of one polygon.
bool separated_by_axes_of(const ConvexPolygon& a, const ConvexPolygon& b) {
  size_t n = a.pts.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 edge = a.pts[(i + 1) % n] - a.pts[i];
    Vec2 axis{-edge.y, edge.x};
    double a_lo = kInfDist, a_hi = -kInfDist;
    for (const Vec2& p : a.pts) {
      double v = dot(p, axis);
      a_lo = std::min(a_lo, v);
      a_hi = std::max(a_hi, v);
    }
    double b_lo = kInfDist, b_hi = -kInfDist;
    for (const Vec2& p : b.pts) {
      double v = dot(p, axis);
      b_lo = std::min(b_lo, v);
      b_hi = std::max(b_hi, v);
    }
    if (a_hi < b_lo || b_hi < a_lo) return true;
  }
  return false;
}

}  // namespace

bool polygons_intersect(const ConvexPolygon& a, const ConvexPolygon& b) {
  return !separated_by_axes_of(a, b) && !separated_by_axes_of(b, a);
}

double polygon_polygon_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (polygons_intersect(a, b)) return 0.0;
  double best = kInfDist;
  size_t na = a.pts.size(), nb = b.pts.size();
  for (size_t i = 0; i < na; ++i) {
    Segment ea{a.pts[i], a.pts[(i + 1) % na]};
    for (size_t j = 0; j < nb; ++j) {
      Segment eb{b.pts[j], b.pts[(j + 1) % nb]};
      best = std::min(best, segment_segment_distance(ea, eb));
    }
  }
  return best;
}

double polygon_segment_distance(const ConvexPolygon& poly, const Segment& s) {
  if (point_in_polygon(s.a, poly) || point_in_polygon(s.b, poly)) return 0.0;
  double best = kInfDist;
  size_t n = poly.pts.size();
  for (size_t i = 0; i < n; ++i) {
    Segment e{poly.pts[i], poly.pts[(i + 1) % n]};
    if (segments_intersect(e, s)) return 0.0;
    best = std::min(best, segment_segment_distance(e, s));
  }
  return best;
}

double point_aabb_distance(const Vec2& p, const Aabb& box) {
  double dx = std::max({box.lo.x - p.x, 0.0, p.x - box.hi.x});
  double dy = std::max({box.lo.y - p.y, 0.0, p.y - box.hi.y});
  return std::hypot(dx, dy);
}

double segment_aabb_distance(const Segment& s, const Aabb& box) {
  if (box.contains(s.a) || box.contains(s.b)) return 0.0;
  ConvexPolygon poly = aabb_to_polygon(box);
  return polygon_segment_distance(poly, s);
}

ConvexPolygon aabb_to_polygon(const Aabb& box) {
  return ConvexPolygon{{{box.lo.x, box.lo.y}, {box.hi.x, box.lo.y}, {box.hi.x, box.hi.y}, {box.lo.x, box.hi.y}}};
}

ConvexPolygon oriented_box_polygon(const Vec2& center, const Vec2& half, double yaw) {
  ConvexPolygon poly;
  poly.pts.reserve(4);
  const Vec2 corners[4] = {{-half.x, -half.y}, {half.x, -half.y}, {half.x, half.y}, {-half.x, half.y}};
  for (const Vec2& c : corners) poly.pts.push_back(center + rotate(c, yaw));
  return poly;
}

double ray_segment_intersect(const Vec2& origin, const Vec2& dir, const Segment& s) {
  Vec2 v = s.b - s.a;
  double denom = cross(dir, v);
  Vec2 w = s.a - origin;
  if (denom == 0.0) {
    // Parallel: hit only if collinear; report nearest endpoint ahead.
    if (cross(w, dir) != 0.0) return kInfDist;
    double t1 = dot(w, dir);
    double t2 = dot(s.b - origin, dir);
    if (t1 > t2) std::swap(t1, t2);
    if (t2 < 0.0) return kInfDist;
    return std::max(t1, 0.0);
  }
  double t = cross(w, v) / denom;
  double u = cross(w, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return kInfDist;
  return t;
}

double ray_aabb_intersect(const Vec2& origin, const Vec2& dir, const Aabb& box) {
  // Slab method.
  double tmin = 0.0, tmax = kInfDist;
  const double o[2] = {origin.x, origin.y};
  const double d[2] = {dir.x, dir.y};
  const double lo[2] = {box.lo.x, box.lo.y};
  const double hi[2] = {box.hi.x, box.hi.y};
  for (int i = 0; i < 2; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < lo[i] || o[i] > hi[i]) return kInfDist;
    } else {
      double inv = 1.0 / d[i];
      double t1 = (lo[i] - o[i]) * inv;
      double t2 = (hi[i] - o[i]) * inv;
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
      if (tmin > tmax) return kInfDist;
    }
  }
  return tmin;  // 0 when the origin is inside
}

double shape_segment_distance(const Shape& shape, const Segment& s) {
  if (const auto* poly = std::get_if<ConvexPolygon>(&shape)) {
    return polygon_segment_distance(*poly, s);
  }
  const auto& cap = std::get<Capsule>(shape);
  double d = segment_segment_distance(Segment{cap.a, cap.b}, s);
  return std::max(0.0, d - cap.radius);
}

double shape_aabb_distance(const Shape& shape, const Aabb& box) {
  if (const auto* poly = std::get_if<ConvexPolygon>(&shape)) {
    return polygon_polygon_distance(*poly, aabb_to_polygon(box));
  }
  const auto& cap = std::get<Capsule>(shape);
  double d = segment_aabb_distance(Segment{cap.a, cap.b}, box);
  return std::max(0.0, d - cap.radius);
}

Aabb shape_bounds(const Shape& shape) {
  Aabb b{{kInfDist, kInfDist}, {-kInfDist, -kInfDist}};
  auto grow = [&b](const Vec2& p, double r) {
    b.lo.x = std::min(b.lo.x, p.x - r);
    b.lo.y = std::min(b.lo.y, p.y - r);
    b.hi.x = std::max(b.hi.x, p.x + r);
    b.hi.y = std::max(b.hi.y, p.y + r);
  };
  if (const auto* poly = std::get_if<ConvexPolygon>(&shape)) {
    for (const Vec2& p : poly->pts) grow(p, 0.0);
  } else {
    const auto& cap = std::get<Capsule>(shape);
    grow(cap.a, cap.radius);
    grow(cap.b, cap.radius);
  }
  return b;
}

}  // namespace wbc
