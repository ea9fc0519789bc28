#include "wbc/sensors.hpp"

#include <algorithm>
#include <cassert>

namespace wbc {

namespace {
constexpr double kMinRange = 1e-3;
}

void simulate_scan_into(const WorldModel& world, const RobotState& s, const LidarConfig& cfg,
                        Rng& rng, std::span<double> out) {
  assert(static_cast<int>(out.size()) == cfg.n_beams);
  Vec2 origin = Vec2{s.x, s.y} + rotate(cfg.mount_pos, s.theta);
  double base_bearing = cfg.mount_yaw + s.theta;
  for (int i = 0; i < cfg.n_beams; ++i) {
    double bearing = base_bearing + cfg.fov * (static_cast<double>(i) / (cfg.n_beams - 1) - 0.5);
    double r = raycast(world, origin, unit(bearing), cfg.max_range);
    r = std::clamp(r + rng.normal(0.0, cfg.noise_sigma), kMinRange, cfg.max_range);
    if (rng.uniform() < cfg.dropout_prob) r = cfg.max_range;
    out[i] = r;
  }
}

Scan simulate_scan(const WorldModel& world, const RobotState& s, const LidarConfig& cfg, Rng& rng) {
  Scan scan;
  scan.ranges.resize(cfg.n_beams);
  simulate_scan_into(world, s, cfg, rng, scan.ranges);
  return scan;
}

}  // namespace wbc
