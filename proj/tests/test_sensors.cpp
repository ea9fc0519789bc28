#include "wbc/sensors.hpp"

#include <gtest/gtest.h>

namespace wbc {
namespace {

WorldModel empty_world() {
  WorldModel w;
  w.bounds = {{-10, -10}, {10, 10}};
  return w;
}

WorldModel wall_world(double x) {
  WorldModel w = empty_world();
  w.obstacles = {Segment{{x, -50}, {x, 50}}};
  return w;
}

LidarConfig clean_config() {
  LidarConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.dropout_prob = 0.0;
  return cfg;
}

TEST(Sensors, EmptyWorldAllMaxRange) {
  Rng rng(1);
  Scan scan = simulate_scan(empty_world(), RobotState{}, clean_config(), rng);
  ASSERT_EQ(scan.ranges.size(), 64u);
  for (double r : scan.ranges) EXPECT_DOUBLE_EQ(r, 5.0);
}

TEST(Sensors, NoiselessScanEqualsRaycast) {
  LidarConfig cfg = clean_config();
  WorldModel w = wall_world(2.0);
  RobotState s;
  s.theta = 0.3;
  Rng rng(2);
  Scan scan = simulate_scan(w, s, cfg, rng);
  Vec2 origin = Vec2{s.x, s.y} + rotate(cfg.mount_pos, s.theta);
  for (int i = 0; i < cfg.n_beams; ++i) {
    double bearing =
        cfg.mount_yaw + s.theta + cfg.fov * (static_cast<double>(i) / (cfg.n_beams - 1) - 0.5);
    EXPECT_DOUBLE_EQ(scan.ranges[i], raycast(w, origin, unit(bearing), cfg.max_range));
  }
}

TEST(Sensors, FullDropoutSaturates) {
  LidarConfig cfg = clean_config();
  cfg.dropout_prob = 1.0;
  Rng rng(3);
  Scan scan = simulate_scan(wall_world(1.0), RobotState{}, cfg, rng);
  for (double r : scan.ranges) EXPECT_DOUBLE_EQ(r, 5.0);
}

TEST(Sensors, DeterministicGivenRngState) {
  LidarConfig cfg;
  WorldModel w = wall_world(2.0);
  Rng rng_a(77), rng_b(77);
  Scan a = simulate_scan(w, RobotState{}, cfg, rng_a);
  Scan b = simulate_scan(w, RobotState{}, cfg, rng_b);
  EXPECT_EQ(a.ranges, b.ranges);
}

TEST(Sensors, RangesStayInBounds) {
  LidarConfig cfg;
  cfg.noise_sigma = 1.0;  // exaggerated noise to stress the clamp
  cfg.dropout_prob = 0.3;
  Rng rng(5);
  WorldModel w = wall_world(0.5);
  for (int i = 0; i < 100; ++i) {
    Scan scan = simulate_scan(w, RobotState{}, cfg, rng);
    for (double r : scan.ranges) {
      EXPECT_GT(r, 0.0);
      EXPECT_LE(r, cfg.max_range);
    }
  }
}

TEST(Sensors, NoiseStatistics) {
  // Single beam staring at a wall 2 m ahead.
  LidarConfig cfg = clean_config();
  cfg.n_beams = 2;
  cfg.fov = 1e-6;
  cfg.noise_sigma = 0.01;
  cfg.mount_pos = {0, 0};
  WorldModel w = wall_world(2.0);
  Rng rng(9);
  const int n = 500000;  // 1e6 beams via 2 per scan
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> out(2);
  for (int i = 0; i < n; ++i) {
    simulate_scan_into(w, RobotState{}, cfg, rng, out);
    for (double r : out) {
      sum += r - 2.0;
      sum_sq += (r - 2.0) * (r - 2.0);
    }
  }
  double mean = sum / (2 * n);
  double sigma = std::sqrt(sum_sq / (2 * n) - mean * mean);
  EXPECT_LT(std::abs(mean), 0.03 * cfg.noise_sigma);
  EXPECT_NEAR(sigma, cfg.noise_sigma, 0.03 * cfg.noise_sigma);
}

TEST(Sensors, DropoutFrequency) {
  LidarConfig cfg = clean_config();
  cfg.n_beams = 2;
  cfg.fov = 1e-6;
  cfg.dropout_prob = 0.02;
  cfg.mount_pos = {0, 0};
  WorldModel w = wall_world(2.0);
  Rng rng(13);
  const int n = 500000;
  int dropped = 0;
  std::vector<double> out(2);
  for (int i = 0; i < n; ++i) {
    simulate_scan_into(w, RobotState{}, cfg, rng, out);
    for (double r : out)
      if (r == cfg.max_range) ++dropped;
  }
  double freq = static_cast<double>(dropped) / (2 * n);
  EXPECT_NEAR(freq, cfg.dropout_prob, 0.01);
}

}  // namespace
}  // namespace wbc
