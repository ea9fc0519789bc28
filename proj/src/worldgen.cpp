#include <algorithm>
#include <cmath>
#include <optional>

#include "wbc/errors.hpp"
#include "wbc/pathref.hpp"
#include "wbc/rng.hpp"
#include "wbc/world.hpp"

namespace wbc {

namespace {

constexpr double kEePathInflation = 0.10;
// Conservative disc covering the base footprint with the arm folded.
constexpr double kSpawnDiscRadius = 0.70;
// Setpoints deeper than this behind the shelf opening are out of arm reach.
constexpr double kMaxGoalRecess = 0.30;

struct Builder {
  const ScenarioSpec& spec;
  Rng rng;
  double width = 0.0;
  double length = 0.0;
  std::vector<Obstacle> obstacles;
  std::vector<double> blocked_x;  // feature centers along the corridor

  bool x_slot_free(double x, double margin) const {
    for (double b : blocked_x) {
      if (std::abs(x - b) < margin) return false;
    }
    return true;
  }
};

// The goal shelf is a niche recessed behind one side wall: an opening in the
// wall with a back segment and two side segments. Setpoints sample inside.
struct GoalShelf {
  double x_center = 0.0;
  double opening = 0.0;
  double depth = 0.0;
  int side = 1;  // +1 north wall, -1 south wall
};

void add_wall_with_gaps(Builder& b, double y, std::vector<std::pair<double, double>> gaps) {
  std::sort(gaps.begin(), gaps.end());
  double x = 0.0;
  for (const auto& [lo, hi] : gaps) {
    if (lo > x) b.obstacles.push_back(Segment{{x, y}, {lo, y}});
    x = std::max(x, hi);
  }
  if (x < b.length) b.obstacles.push_back(Segment{{x, y}, {b.length, y}});
}

std::optional<WorldModel> try_generate(const ScenarioSpec& spec, uint64_t sub_seed) {
  Builder b{spec, Rng(sub_seed)};
  b.width = b.rng.uniform(spec.corridor_width_range[0], spec.corridor_width_range[1]);
  b.length = b.rng.uniform(spec.corridor_length_range[0], spec.corridor_length_range[1]);
  const double half_w = b.width / 2.0;

  int n_shelves = spec.shelf_count_range[0] +
                  b.rng.uniform_int(spec.shelf_count_range[1] - spec.shelf_count_range[0] + 1);
  n_shelves = std::max(1, n_shelves);
  int n_doors = spec.door_count_range[0] +
                b.rng.uniform_int(spec.door_count_range[1] - spec.door_count_range[0] + 1);

  GoalShelf goal;
  goal.depth = b.rng.uniform(spec.shelf_depth_range[0], spec.shelf_depth_range[1]);
  goal.opening = b.rng.uniform(std::max(0.8, spec.shelf_width_range[0]), spec.shelf_width_range[1]);
  if (b.length < 4.0) return std::nullopt;
  goal.x_center = b.rng.uniform(2.0, b.length - 2.0);
  goal.side = b.rng.uniform() < 0.5 ? 1 : -1;
  b.blocked_x.push_back(goal.x_center);

  // Spawn ellipse center along the axis, offset from the goal shelf.
  double spawn_dist = b.rng.uniform(spec.spawn_distance_range[0], spec.spawn_distance_range[1]);
  bool left_ok = goal.x_center - spawn_dist >= 1.2;
  bool right_ok = goal.x_center + spawn_dist <= b.length - 1.2;
  if (!left_ok && !right_ok) return std::nullopt;
  double sign = left_ok && right_ok ? (b.rng.uniform() < 0.5 ? -1.0 : 1.0) : (left_ok ? -1.0 : 1.0);
  double spawn_x = goal.x_center + sign * spawn_dist;

  // Side walls, with the goal niche opening cut out of one of them.
  double open_lo = goal.x_center - goal.opening / 2.0;
  double open_hi = goal.x_center + goal.opening / 2.0;
  double wall_y = goal.side * half_w;
  double back_y = goal.side * (half_w + goal.depth);
  add_wall_with_gaps(b, wall_y, {{open_lo, open_hi}});
  add_wall_with_gaps(b, -wall_y, {});
  b.obstacles.push_back(Segment{{open_lo, wall_y}, {open_lo, back_y}});
  b.obstacles.push_back(Segment{{open_hi, wall_y}, {open_hi, back_y}});
  b.obstacles.push_back(Segment{{open_lo, back_y}, {open_hi, back_y}});
  // Closed corridor ends.
  b.obstacles.push_back(Segment{{0.0, -half_w}, {0.0, half_w}});
  b.obstacles.push_back(Segment{{b.length, -half_w}, {b.length, half_w}});

  // Remaining shelves protrude from a wall as solid boxes.
  for (int i = 1; i < n_shelves; ++i) {
    double depth = b.rng.uniform(spec.shelf_depth_range[0], spec.shelf_depth_range[1]);
    double w = b.rng.uniform(spec.shelf_width_range[0], spec.shelf_width_range[1]);
    bool placed = false;
    for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
      double xs = b.rng.uniform(1.0 + w / 2.0, b.length - 1.0 - w / 2.0);
      if (!b.x_slot_free(xs, w / 2.0 + 1.0) || std::abs(xs - spawn_x) < w / 2.0 + 1.2) continue;
      int side = b.rng.uniform() < 0.5 ? 1 : -1;
      double y_wall = side * half_w;
      double y_in = side * (half_w - depth);
      b.obstacles.push_back(Aabb{{xs - w / 2.0, std::min(y_wall, y_in)}, {xs + w / 2.0, std::max(y_wall, y_in)}});
      b.blocked_x.push_back(xs);
      placed = true;
    }
  }

  // Doors: transverse partial walls leaving a gap to pass through.
  for (int i = 0; i < n_doors; ++i) {
    double gap = b.rng.uniform(spec.door_width_range[0], spec.door_width_range[1]);
    if (gap >= b.width) continue;
    for (int attempt = 0; attempt < 20; ++attempt) {
      double xd = b.rng.uniform(1.0, b.length - 1.0);
      if (!b.x_slot_free(xd, 1.2) || std::abs(xd - spawn_x) < 1.4) continue;
      double gap_lo = b.rng.uniform(-half_w, half_w - gap);
      if (gap_lo > -half_w + 1e-9) b.obstacles.push_back(Segment{{xd, -half_w}, {xd, gap_lo}});
      if (gap_lo + gap < half_w - 1e-9) b.obstacles.push_back(Segment{{xd, gap_lo + gap}, {xd, half_w}});
      b.blocked_x.push_back(xd);
      break;
    }
  }

  WorldModel w;
  w.obstacles = std::move(b.obstacles);
  w.corridor_origin = {0.0, 0.0};
  w.corridor_dir = {1.0, 0.0};
  w.corridor_width = b.width;
  w.corridor_length = b.length;

  double recess = std::min(goal.depth - 0.08, kMaxGoalRecess);
  if (recess <= 0.06) return std::nullopt;
  double y_lo = goal.side > 0 ? half_w + 0.05 : -(half_w + recess);
  double y_hi = goal.side > 0 ? half_w + recess : -(half_w + 0.05);
  w.goal_region.center = {goal.x_center, (y_lo + y_hi) / 2.0};
  w.goal_region.half = {goal.opening / 2.0 - 0.10, (y_hi - y_lo) / 2.0};
  w.goal_region.yaw = 0.0;
  if (w.goal_region.half.x <= 0.02 || w.goal_region.half.y <= 0.0) return std::nullopt;

  w.spawn_region.center = {spawn_x, 0.0};
  w.spawn_region.radii = {0.8, std::max(0.12, half_w - 0.65)};

  double y_margin = half_w + goal.depth + 0.5;
  w.bounds = Aabb{{-0.5, -y_margin}, {b.length + 0.5, y_margin}};

  // Spawn region must admit at least one clear robot pose.
  bool spawn_ok = false;
  std::array<Shape, 1> disc{Shape{Capsule{w.spawn_region.center, w.spawn_region.center, kSpawnDiscRadius}}};
  if (min_clearance(w, disc) > 0.0) {
    spawn_ok = true;
  } else {
    Rng probe(Rng::mix(sub_seed, 0x5f5e));
    for (int i = 0; i < 50 && !spawn_ok; ++i) {
      double a = probe.uniform(0.0, 2.0 * M_PI);
      double r = std::sqrt(probe.uniform());
      Vec2 p = {w.spawn_region.center.x + r * std::cos(a) * w.spawn_region.radii.x,
                w.spawn_region.center.y + r * std::sin(a) * w.spawn_region.radii.y};
      disc[0] = Shape{Capsule{p, p, kSpawnDiscRadius}};
      spawn_ok = min_clearance(w, disc) > 0.0;
    }
  }
  if (!spawn_ok) return std::nullopt;

  // Goal shelf must be reachable by a collision-free end-effector path.
  try {
    plan_ee_path(w, w.spawn_region.center, w.goal_region.center, kEePathInflation);
  } catch (const NoPathError&) {
    return std::nullopt;
  }
  return w;
}

}  // namespace

WorldModel generate_world(const ScenarioSpec& spec, uint64_t seed) {
  spec.validate();
  if (spec.fixed_layout) {
    return *spec.fixed_layout;
  }
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto w = try_generate(spec, Rng::mix(seed, static_cast<uint64_t>(attempt)));
    if (w) return std::move(*w);
  }
  throw GenerationFailed("generate_world: no valid world after 100 attempts");
}

}  // namespace wbc
