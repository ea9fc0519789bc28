#pragma once

#include <span>
#include <vector>

#include "wbc/rng.hpp"
#include "wbc/robot.hpp"
#include "wbc/world.hpp"

namespace wbc {

struct LidarConfig {
  Vec2 mount_pos;         // base frame
  double mount_yaw = 0.0;
  double fov = 4.71238898038469;  // 270 degrees
  int n_beams = 64;
  double max_range = 5.0;
  double noise_sigma = 0.01;
  double dropout_prob = 0.02;
};

struct Scan {
  std::vector<double> ranges;  // (0, max_range], ordered by bearing
};

// Beam i points at mount_yaw + theta_b + fov*(i/(n_beams-1) - 1/2). Ranges are
// raycast + N(0, sigma), clamped to [1 mm, max_range]; each beam is then
// replaced by max_range with probability dropout_prob. The rng draw count per
// beam is fixed, so streams stay aligned across sigma/dropout settings.
void simulate_scan_into(const WorldModel& world, const RobotState& s, const LidarConfig& cfg,
                        Rng& rng, std::span<double> out);

Scan simulate_scan(const WorldModel& world, const RobotState& s, const LidarConfig& cfg, Rng& rng);

}  // namespace wbc
