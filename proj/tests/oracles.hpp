// Test-only oracles, kept independent of the implementation routes they
// check: different formulations for the same quantities.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "wbc/geometry.hpp"
#include "wbc/policy.hpp"
#include "wbc/world.hpp"

namespace wbc::oracle {

// Ray vs segment by solving the 2x2 linear system with Cramer's rule
// (the implementation uses the cross-product parametric form).
inline double ray_segment(const Vec2& o, const Vec2& d, const Segment& s) {
  const double a11 = d.x, a12 = s.a.x - s.b.x;
  const double a21 = d.y, a22 = s.a.y - s.b.y;
  const double b1 = s.a.x - o.x, b2 = s.a.y - o.y;
  const double det = a11 * a22 - a12 * a21;
  if (det == 0.0) {
    // Parallel: collinear overlap check via projections.
    if ((s.a.x - o.x) * d.y != (s.a.y - o.y) * d.x) return kInfDist;
    double t1 = (s.a.x - o.x) * d.x + (s.a.y - o.y) * d.y;
    double t2 = (s.b.x - o.x) * d.x + (s.b.y - o.y) * d.y;
    if (t1 > t2) std::swap(t1, t2);
    if (t2 < 0.0) return kInfDist;
    return std::max(0.0, t1);
  }
  const double t = (b1 * a22 - a12 * b2) / det;
  const double u = (a11 * b2 - b1 * a21) / det;
  if (t < 0.0 || u < 0.0 || u > 1.0) return kInfDist;
  return t;
}

// Ray vs box as min over its four edges (the implementation uses slabs).
inline double ray_aabb(const Vec2& o, const Vec2& d, const Aabb& box) {
  if (o.x >= box.lo.x && o.x <= box.hi.x && o.y >= box.lo.y && o.y <= box.hi.y) return 0.0;
  const Vec2 c[4] = {{box.lo.x, box.lo.y}, {box.hi.x, box.lo.y}, {box.hi.x, box.hi.y},
                     {box.lo.x, box.hi.y}};
  double best = kInfDist;
  for (int i = 0; i < 4; ++i) best = std::min(best, ray_segment(o, d, Segment{c[i], c[(i + 1) % 4]}));
  return best;
}

inline double raycast(const WorldModel& world, const Vec2& o, const Vec2& d, double max_range) {
  double best = max_range;
  for (const Obstacle& ob : world.obstacles) {
    double t = std::holds_alternative<Aabb>(ob) ? ray_aabb(o, d, std::get<Aabb>(ob))
                                                : ray_segment(o, d, std::get<Segment>(ob));
    best = std::min(best, t);
  }
  return best;
}

// Segment-segment distance by minimizing the quadratic |p(s) - q(t)|^2 over
// the unit square: interior critical point plus the four boundary edges.
inline double seg_seg_distance(const Segment& s1, const Segment& s2) {
  const Vec2 u = s1.b - s1.a;
  const Vec2 v = s2.b - s2.a;
  const Vec2 w = s1.a - s2.a;
  const double a = dot(u, u), b = dot(u, v), c = dot(v, v), d = dot(u, w), e = dot(v, w);
  auto point_at = [](const Segment& s, double t) { return s.a + (s.b - s.a) * t; };
  auto eval = [&](double s, double t) { return norm(point_at(s1, s) - point_at(s2, t)); };
  double best = kInfDist;
  const double den = a * c - b * b;
  if (den > 0.0) {
    double s = (b * e - c * d) / den;
    double t = (a * e - b * d) / den;
    if (s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0) best = std::min(best, eval(s, t));
  }
  auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  // s = 0 and s = 1 edges: minimize over t; t = 0 / t = 1 edges: over s.
  if (c > 0.0) {
    best = std::min(best, eval(0.0, clamp01(e / c)));
    best = std::min(best, eval(1.0, clamp01((e + b) / c)));
  } else {
    best = std::min({best, eval(0.0, 0.0), eval(1.0, 0.0)});
  }
  if (a > 0.0) {
    best = std::min(best, eval(clamp01(-d / a), 0.0));
    best = std::min(best, eval(clamp01((b - d) / a), 1.0));
  } else {
    best = std::min({best, eval(0.0, 0.0), eval(0.0, 1.0)});
  }
  return best;
}

inline bool segments_cross(const Segment& p, const Segment& q) {
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
  };
  auto on_seg = [&](const Vec2& a, const Vec2& b, const Vec2& c) {
    return orient(a, b, c) == 0 && c.x >= std::min(a.x, b.x) && c.x <= std::max(a.x, b.x) &&
           c.y >= std::min(a.y, b.y) && c.y <= std::max(a.y, b.y);
  };
  int o1 = orient(p.a, p.b, q.a), o2 = orient(p.a, p.b, q.b);
  int o3 = orient(q.a, q.b, p.a), o4 = orient(q.a, q.b, p.b);
  if (o1 != o2 && o3 != o4) return true;
  return on_seg(p.a, p.b, q.a) || on_seg(p.a, p.b, q.b) || on_seg(q.a, q.b, p.a) ||
         on_seg(q.a, q.b, p.b);
}

// Crossing-number point-in-polygon (the implementation uses half-plane signs).
inline bool point_in_poly(const Vec2& p, const ConvexPolygon& poly) {
  bool inside = false;
  size_t n = poly.pts.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly.pts[i];
    const Vec2& b = poly.pts[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      inside = !inside;
  }
  // Boundary membership: any edge at distance ~0.
  for (size_t i = 0; i < n; ++i) {
    if (seg_seg_distance(Segment{p, p}, Segment{poly.pts[i], poly.pts[(i + 1) % n]}) < 1e-12)
      return true;
  }
  return inside;
}

inline double poly_poly_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
  for (const Vec2& p : a.pts)
    if (point_in_poly(p, b)) return 0.0;
  for (const Vec2& p : b.pts)
    if (point_in_poly(p, a)) return 0.0;
  double best = kInfDist;
  size_t na = a.pts.size(), nb = b.pts.size();
  for (size_t i = 0; i < na; ++i) {
    Segment ea{a.pts[i], a.pts[(i + 1) % na]};
    for (size_t j = 0; j < nb; ++j) {
      Segment eb{b.pts[j], b.pts[(j + 1) % nb]};
      if (segments_cross(ea, eb)) return 0.0;
      best = std::min(best, seg_seg_distance(ea, eb));
    }
  }
  return best;
}

inline double poly_seg_distance(const ConvexPolygon& poly, const Segment& s) {
  if (point_in_poly(s.a, poly) || point_in_poly(s.b, poly)) return 0.0;
  double best = kInfDist;
  size_t n = poly.pts.size();
  for (size_t i = 0; i < n; ++i) {
    Segment e{poly.pts[i], poly.pts[(i + 1) % n]};
    if (segments_cross(e, s)) return 0.0;
    best = std::min(best, seg_seg_distance(e, s));
  }
  return best;
}

inline ConvexPolygon box_poly(const Aabb& b) {
  return ConvexPolygon{{{b.lo.x, b.lo.y}, {b.hi.x, b.lo.y}, {b.hi.x, b.hi.y}, {b.lo.x, b.hi.y}}};
}

inline double shape_obstacle_distance(const Shape& shape, const Obstacle& ob) {
  if (const auto* poly = std::get_if<ConvexPolygon>(&shape)) {
    if (const auto* box = std::get_if<Aabb>(&ob)) return poly_poly_distance(*poly, box_poly(*box));
    return poly_seg_distance(*poly, std::get<Segment>(ob));
  }
  const auto& cap = std::get<Capsule>(shape);
  Segment core{cap.a, cap.b};
  double d;
  if (const auto* box = std::get_if<Aabb>(&ob)) {
    d = poly_seg_distance(box_poly(*box), core);
  } else {
    d = seg_seg_distance(core, std::get<Segment>(ob));
  }
  return std::max(0.0, d - cap.radius);
}

inline double min_clearance(const WorldModel& world, std::span<const Shape> shapes) {
  double best = kInfDist;
  for (const Shape& s : shapes)
    for (const Obstacle& ob : world.obstacles) best = std::min(best, shape_obstacle_distance(s, ob));
  return best <= 1e-9 ? 0.0 : best;
}

// Brute-force GAE: explicit forward sum per index, chain cut at dones.
inline void gae_double_loop(std::span<const double> rewards, std::span<const double> values,
                            std::span<const uint8_t> dones, double bootstrap, double gamma,
                            double lam, std::span<double> advantages) {
  const int n = static_cast<int>(rewards.size());
  for (int t = 0; t < n; ++t) {
    double acc = 0.0, coef = 1.0;
    for (int k = t; k < n; ++k) {
      double next_v = k == n - 1 ? bootstrap : values[k + 1];
      double nonterm = dones[k] ? 0.0 : 1.0;
      double delta = rewards[k] + gamma * nonterm * next_v - values[k];
      acc += coef * delta;
      if (dones[k]) break;
      coef *= gamma * lam;
    }
    advantages[t] = acc;
  }
}

// Double-precision forward pass reading tensors by name; structurally mirrors
// the spec topology rather than the float implementation. `pattern`, when
// given, records every activation sign and pool choice so callers can detect
// kink crossings between two nearby parameter points.
std::pair<std::vector<double>, double> forward_double(const PolicyParams& p,
                                                      std::span<const float> obs,
                                                      std::vector<uint8_t>* pattern = nullptr);

// Composite PPO-style per-sample loss for gradient checking.
struct PpoLossSpec {
  std::vector<float> obs;
  Action action{};
  double logprob_old = 0.0;
  double advantage = 0.0;
  double value_target = 0.0;
  double cliprange = 0.2;
  double ent_coeff = 0.01;
  double value_coeff = 0.5;
};

double loss_double(const PolicyParams& p, const PpoLossSpec& ls,
                   std::vector<uint8_t>* pattern = nullptr);

// Analytic gradient of the same loss through the implementation's backward.
void analytic_loss_gradient(const PolicyParams& p, const PpoLossSpec& ls, PolicyGradients& grads);

struct GradCheckResult {
  int checked = 0;
  int skipped_kinks = 0;
  double max_rel_error = 0.0;
};

// Central finite differences (64-bit recompute) against the analytic
// gradients on randomly sampled parameters. Samples whose +-h evaluations
// cross an activation kink (max-pool switch, LeakyReLU sign change, clip
// branch change) are resampled: finite differences do not estimate a
// derivative across a kink. Relative error uses max(|fd|, |an|, 1e-6).
GradCheckResult run_gradient_check(PolicyParams& p, const PpoLossSpec& ls, int n_checks, double h,
                                   Rng& rng);

// Factorized-categorical logprob/entropy by enumerating all 5^5 joint
// actions.
void logprob_entropy_enumerated(std::span<const float> logits, const Action& a, double* logprob,
                                double* entropy);

}  // namespace wbc::oracle
