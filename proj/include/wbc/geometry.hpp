#pragma once

#include <cmath>
#include <limits>
#include <variant>
#include <vector>

namespace wbc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double norm_sq(const Vec2& a) { return a.x * a.x + a.y * a.y; }
inline Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }
inline Vec2 rotate(const Vec2& v, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

struct Segment {
  Vec2 a, b;
};

struct Aabb {
  Vec2 lo, hi;

  bool contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  Vec2 center() const { return {(lo.x + hi.x) * 0.5, (lo.y + hi.y) * 0.5}; }
};

// Counter-clockwise vertex list.
struct ConvexPolygon {
  std::vector<Vec2> pts;
};

// Segment swept by a disc; a == b degenerates to a circle.
struct Capsule {
  Vec2 a, b;
  double radius = 0.0;
};

using Shape = std::variant<ConvexPolygon, Capsule>;

constexpr double kInfDist = std::numeric_limits<double>::infinity();

double point_segment_distance(const Vec2& p, const Segment& s);
double segment_segment_distance(const Segment& s1, const Segment& s2);
bool segments_intersect(const Segment& s1, const Segment& s2);
bool point_in_polygon(const Vec2& p, const ConvexPolygon& poly);
bool polygons_intersect(const ConvexPolygon& a, const ConvexPolygon& b);
double polygon_polygon_distance(const ConvexPolygon& a, const ConvexPolygon& b);
double polygon_segment_distance(const ConvexPolygon& poly, const Segment& s);
double segment_aabb_distance(const Segment& s, const Aabb& box);
double point_aabb_distance(const Vec2& p, const Aabb& box);

ConvexPolygon aabb_to_polygon(const Aabb& box);
ConvexPolygon oriented_box_polygon(const Vec2& center, const Vec2& half, double yaw);

// Distance along ray (origin, dir) to the primitive; +inf on a miss.
// dir must be normalized. Origin inside a box yields 0.
double ray_segment_intersect(const Vec2& origin, const Vec2& dir, const Segment& s);
double ray_aabb_intersect(const Vec2& origin, const Vec2& dir, const Aabb& box);

double shape_segment_distance(const Shape& shape, const Segment& s);
double shape_aabb_distance(const Shape& shape, const Aabb& box);

Aabb shape_bounds(const Shape& shape);

}  // namespace wbc
