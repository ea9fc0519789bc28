#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wbc/geometry.hpp"

namespace wbc {

using Obstacle = std::variant<Aabb, Segment>;

struct OrientedBox {
  Vec2 center;
  Vec2 half;
  double yaw = 0.0;
};

struct Ellipse {
  Vec2 center;
  Vec2 radii;

  bool contains(const Vec2& p) const {
    if (radii.x <= 0.0 || radii.y <= 0.0) return false;
    double dx = (p.x - center.x) / radii.x;
    double dy = (p.y - center.y) / radii.y;
    return dx * dx + dy * dy <= 1.0;
  }
};

// Static scene: obstacles, the goal shelf region setpoints are sampled in,
// and the ellipse initial base poses are sampled in. Immutable once built.
struct WorldModel {
  std::vector<Obstacle> obstacles;
  Vec2 corridor_origin;
  Vec2 corridor_dir{1.0, 0.0};
  double corridor_width = 0.0;
  double corridor_length = 0.0;
  OrientedBox goal_region;
  Ellipse spawn_region;
  Aabb bounds;
};

struct ScenarioSpec {
  std::array<double, 2> corridor_width_range{1.5, 3.0};
  std::array<double, 2> corridor_length_range{8.0, 14.0};
  std::array<int, 2> shelf_count_range{1, 3};
  std::array<double, 2> shelf_depth_range{0.3, 0.6};
  std::array<double, 2> shelf_width_range{0.8, 2.0};
  std::array<int, 2> door_count_range{0, 2};
  std::array<double, 2> door_width_range{0.8, 1.2};
  // Distance from spawn ellipse center to the goal shelf along the corridor.
  std::array<double, 2> spawn_distance_range{1.5, 4.0};
  bool seedable = true;
  std::optional<WorldModel> fixed_layout;

  // Throws ConfigError when ranges are empty/negative.
  void validate() const;
};

// Deterministic per (spec, seed). Validates that the goal shelf is reachable
// from the spawn region by a collision-free end-effector path, regenerating
// with a derived sub-seed up to 100 attempts. Throws GenerationFailed.
WorldModel generate_world(const ScenarioSpec& spec, uint64_t seed);

// Distance to the nearest obstacle along (origin, dir), capped at max_range.
// dir must be normalized; an origin inside a box returns 0.
double raycast(const WorldModel& world, const Vec2& origin, const Vec2& dir, double max_range);

// Minimum distance between any shape and any obstacle; contact within 1e-9 m
// clamps to exactly 0. No obstacles yields +inf.
double min_clearance(const WorldModel& world, std::span<const Shape> shapes);

bool in_collision(const WorldModel& world, std::span<const Shape> shapes);

std::string world_to_json(const WorldModel& world);
WorldModel world_from_json(const std::string& text);

}  // namespace wbc
