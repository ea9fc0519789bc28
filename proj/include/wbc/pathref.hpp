#pragma once

#include <vector>

#include "wbc/geometry.hpp"
#include "wbc/world.hpp"

namespace wbc {

// Collision-free end-effector reference polyline used for reward shaping.
struct RefPath {
  std::vector<Vec2> waypoints;
  std::vector<double> cum_length;  // arc length at each waypoint, strictly increasing
  double total_length = 0.0;
};

struct PathProjection {
  double s = 0.0;          // arc length of the nearest point
  double deviation = 0.0;  // distance to the polyline
};

// 8-connected A* on a 0.05 m occupancy grid with obstacles inflated by
// `inflation`, followed by greedy line-of-sight shortcutting. Throws
// NoPathError when the goal is unreachable.
RefPath plan_ee_path(const WorldModel& world, const Vec2& start, const Vec2& goal, double inflation);

// Nearest point on the polyline; ties break toward larger arc length.
PathProjection project(const RefPath& path, const Vec2& pt);

}  // namespace wbc
