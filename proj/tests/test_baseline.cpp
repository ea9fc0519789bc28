#include "wbc/baseline.hpp"

#include <gtest/gtest.h>

#include "wbc/config.hpp"
#include "wbc/errors.hpp"

namespace wbc {
namespace {

WorldModel open_room() {
  WorldModel w;
  w.obstacles = {Segment{{-4, 3}, {8, 3}}, Segment{{-4, -3}, {8, -3}}, Segment{{-4, -3}, {-4, 3}},
                 Segment{{8, -3}, {8, 3}}};
  w.bounds = {{-4, -3}, {8, 3}};
  w.goal_region = {{6, 0}, {0.3, 0.3}, 0.0};
  w.spawn_region = {{0, 0}, {1, 1}};
  return w;
}

RobotState config_state(const Config5D& q) {
  RobotState s;
  s.x = q.x;
  s.y = q.y;
  s.theta = q.theta;
  s.phi = {q.phi1, q.phi2};
  return s;
}

TEST(PlanarIk, FullExtensionSingularityUniqueSolution) {
  RobotParams p;
  double reach = p.link_length_1 + p.link_length_2;
  auto sols = planar_arm_ik(p, {reach, 0.0});
  ASSERT_EQ(sols.size(), 1u);
  EXPECT_NEAR(sols[0][0], 0.0, 1e-9);
  EXPECT_NEAR(sols[0][1], 0.0, 1e-9);
}

TEST(PlanarIk, TwoElbowBranchesHitTarget) {
  RobotParams p;
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    // Inside joint limits: phi2 <= 2.8 keeps the reachable annulus above
    // ~0.11 m, and bearings near straight-behind would need |phi1| > 2.8.
    double r = rng.uniform(0.12, p.link_length_1 + p.link_length_2 - 0.01);
    Vec2 target = unit(rng.uniform(-2.0, 2.0)) * r;
    auto sols = planar_arm_ik(p, target);
    EXPECT_GE(sols.size(), 1u);
    for (const auto& [phi1, phi2] : sols) {
      Vec2 ee = unit(phi1) * p.link_length_1 + unit(phi1 + phi2) * p.link_length_2;
      EXPECT_NEAR(ee.x, target.x, 1e-9);
      EXPECT_NEAR(ee.y, target.y, 1e-9);
    }
  }
}

TEST(PlanarIk, OutOfReachEmpty) {
  RobotParams p;
  EXPECT_TRUE(planar_arm_ik(p, {2.0, 0.0}).empty());
}

TEST(IkGoalConfigs, AllReturnedConfigsValid) {
  WorldModel w = open_room();
  RobotParams robot;
  Rng rng(5);
  Vec2 target{6.0, 0.0};
  auto configs = ik_goal_configs(w, robot, target, 0.03, 16, rng);
  ASSERT_GE(configs.size(), 8u);
  for (const Config5D& q : configs) {
    EePose ee = forward_kinematics(config_state(q), robot);
    EXPECT_LE(norm(ee.pos - target), 0.03);
    auto shapes = collision_shapes(config_state(q), robot);
    EXPECT_FALSE(in_collision(w, shapes));
  }
}

TEST(IkGoalConfigs, UnreachableTargetEmpty) {
  WorldModel w = open_room();
  // Goal sealed inside a tight box.
  w.obstacles.push_back(Aabb{{5.2, -0.8}, {6.8, 0.8}});
  RobotParams robot;
  Rng rng(7);
  EXPECT_TRUE(ik_goal_configs(w, robot, {6.0, 0.0}, 0.03, 4, rng).empty());
}

PlannerParams fast_params() {
  PlannerParams p;
  p.max_attempts = 3;
  p.max_iterations = 4000;
  p.time_budget_s = 30.0;
  p.seed = 11;
  return p;
}

TEST(RrtConnect, TrivialStraightLineInstance) {
  WorldModel w = open_room();
  RobotParams robot;
  Config5D start{0, 0, 0, 0.5, 0.5};
  Config5D goal{2, 0, 0, 0.5, 0.5};
  PlanResult r = plan_rrt_connect(w, robot, start, {&goal, 1}, fast_params());
  EXPECT_TRUE(r.success);
  double len = 0.0;
  for (size_t i = 1; i < r.path.size(); ++i)
    len += config_distance(r.path[i - 1], r.path[i], robot);
  EXPECT_LE(len, 2.0 * 1.05);
  EXPECT_GE(len, 2.0 - 1e-9);
}

TEST(RrtConnect, SealedGoalFails) {
  WorldModel w = open_room();
  w.obstacles.push_back(Aabb{{4.5, -1.5}, {4.7, 3.0}});
  w.obstacles.push_back(Aabb{{4.5, -3.0}, {4.7, -1.7}});
  w.obstacles.push_back(Aabb{{4.5, -1.75, }, {4.7, -1.45}});  // 5 cm gap, robot cannot pass
  RobotParams robot;
  Config5D start{0, 0, 0, 0.5, 0.5};
  Config5D goal{6, 0, 0, 0.5, 0.5};
  PlannerParams pp = fast_params();
  pp.max_attempts = 2;
  pp.max_iterations = 1500;
  EXPECT_THROW(plan_rrt_connect(w, robot, start, {&goal, 1}, pp), PlanningFailed);
}

TEST(RrtConnect, PathEdgesCollisionFreeAtFineResolution) {
  WorldModel w = open_room();
  w.obstacles.push_back(Aabb{{2.5, -1.0}, {3.5, 3.0}});
  RobotParams robot;
  Config5D start{0, 0, 0, 0.5, 0.5};
  Rng rng(13);
  auto goals = ik_goal_configs(w, robot, {6.0, 0.0}, 0.03, 8, rng);
  ASSERT_FALSE(goals.empty());
  PlanResult r = plan_rrt_connect(w, robot, start, goals, fast_params());
  ASSERT_TRUE(r.success);
  // Re-check with independent dense sampling at eps/10.
  for (size_t i = 1; i < r.path.size(); ++i) {
    double d = config_distance(r.path[i - 1], r.path[i], robot);
    int n = std::max(1, static_cast<int>(std::ceil(d / 0.001)));
    for (int k = 0; k <= n; ++k) {
      double t = static_cast<double>(k) / n;
      Config5D q;
      q.x = r.path[i - 1].x + (r.path[i].x - r.path[i - 1].x) * t;
      q.y = r.path[i - 1].y + (r.path[i].y - r.path[i - 1].y) * t;
      q.theta = r.path[i - 1].theta + wrap_angle(r.path[i].theta - r.path[i - 1].theta) * t;
      q.phi1 = r.path[i - 1].phi1 + (r.path[i].phi1 - r.path[i - 1].phi1) * t;
      q.phi2 = r.path[i - 1].phi2 + (r.path[i].phi2 - r.path[i - 1].phi2) * t;
      ASSERT_TRUE(config_collision_free(w, robot, q));
    }
  }
}

TEST(RrtConnect, DeterministicPerSeed) {
  WorldModel w = open_room();
  RobotParams robot;
  Config5D start{0, 0, 0, 0.5, 0.5};
  Config5D goal{3, 1, 0.4, -0.5, 0.8};
  PlanResult a = plan_rrt_connect(w, robot, start, {&goal, 1}, fast_params());
  PlanResult b = plan_rrt_connect(w, robot, start, {&goal, 1}, fast_params());
  ASSERT_EQ(a.path.size(), b.path.size());
  for (size_t i = 0; i < a.path.size(); ++i) {
    EXPECT_EQ(a.path[i].x, b.path[i].x);
    EXPECT_EQ(a.path[i].theta, b.path[i].theta);
  }
}

TEST(Shortcut, NeverIncreasesLengthAndStaysValid) {
  WorldModel w = open_room();
  RobotParams robot;
  // Zigzag through free space.
  std::vector<Config5D> path;
  for (int i = 0; i <= 10; ++i)
    path.push_back({0.5 * i, (i % 2) ? 0.8 : -0.8, 0, 0.5, 0.5});
  auto length = [&](const std::vector<Config5D>& p) {
    double len = 0.0;
    for (size_t i = 1; i < p.size(); ++i) len += config_distance(p[i - 1], p[i], robot);
    return len;
  };
  double before = length(path);
  Rng rng(17);
  auto smoothed = shortcut_path(path, w, robot, fast_params(), rng);
  EXPECT_LT(length(smoothed), before);
  EXPECT_EQ(smoothed.front().x, path.front().x);
  EXPECT_EQ(smoothed.back().x, path.back().x);
  for (const Config5D& q : smoothed) EXPECT_TRUE(config_collision_free(w, robot, q));
}

TEST(TimeParam, SingleAxisTrapezoidDuration) {
  RobotParams robot;
  std::vector<Config5D> path{{0, 0, 0, 0, 0}, {1, 0, 0, 0, 0}};
  TimedTrajectory traj = time_parameterize(path, robot);
  EXPECT_NEAR(traj.duration(), 1.0 / 0.1 + 0.1 / 0.15, 1e-9);
}

TEST(TimeParam, ZeroLengthPathZeroDuration) {
  RobotParams robot;
  std::vector<Config5D> path{{1, 1, 0.5, 0.2, 0.2}, {1, 1, 0.5, 0.2, 0.2}};
  TimedTrajectory traj = time_parameterize(path, robot);
  EXPECT_DOUBLE_EQ(traj.duration(), 0.0);
  Config5D q;
  traj.sample(0.0, &q, nullptr);
  EXPECT_DOUBLE_EQ(q.x, 1.0);
}

TEST(TimeParam, SampledVelocitiesRespectLimits) {
  RobotParams robot;
  std::vector<Config5D> path{
      {0, 0, 0, 0, 0}, {1, -0.5, 1.0, 0.8, -0.6}, {0.2, 0.4, -0.7, -0.4, 0.9}};
  TimedTrajectory traj = time_parameterize(path, robot);
  for (double t = 0.0; t <= traj.duration() + 0.5; t += 0.01) {
    Config5D q, qd;
    traj.sample(t, &q, &qd);
    EXPECT_LE(std::abs(qd.x), robot.max_base_lin_vel + 1e-9);
    EXPECT_LE(std::abs(qd.y), robot.max_base_lin_vel + 1e-9);
    EXPECT_LE(std::abs(qd.theta), robot.max_base_ang_vel + 1e-9);
    EXPECT_LE(std::abs(qd.phi1), robot.max_joint_vel + 1e-9);
    EXPECT_LE(std::abs(qd.phi2), robot.max_joint_vel + 1e-9);
  }
  // Waypoints are hit at segment boundaries.
  Config5D q;
  traj.sample(traj.segments()[1].t_start, &q, nullptr);
  EXPECT_NEAR(q.x, 1.0, 1e-9);
  EXPECT_NEAR(q.y, -0.5, 1e-9);
  traj.sample(traj.duration() + 1.0, &q, nullptr);
  EXPECT_NEAR(q.x, 0.2, 1e-9);
}

TEST(Execute, StraightTrajectorySucceedsInTolerance) {
  AppConfig cfg = default_config();
  Env env = make_env(cfg);
  env.set_tolerance(0.07);
  env.set_max_steps(4500);

  WorldModel w = open_room();
  RobotParams robot = cfg.robot;
  RobotState start;
  start.phi = {0.3, 0.4};
  // Goal at the end-effector position of the commanded final configuration.
  Config5D final_q{1.6, 0.2, 0.3, 0.3, 0.4};
  Vec2 goal = forward_kinematics(config_state(final_q), robot).pos;
  w.goal_region.center = goal;
  w.goal_region.half = {0.05, 0.05};

  std::vector<Config5D> path{{0, 0, 0, 0.3, 0.4}, {1.6, 0.2, 0.3, 0.3, 0.4}};
  TimedTrajectory traj = time_parameterize(path, robot);
  env.reset_fixed(w, start, goal, 3);
  EpisodeResult res = execute(traj, env);
  EXPECT_EQ(res.outcome, Outcome::kHoldSuccess);
  // Execution (including the 1.5 s hold) stays within 25% of nominal.
  double exec_time = res.steps * robot.control_period;
  EXPECT_LE(exec_time, 1.25 * (traj.duration() + 1.5 + 1.0));
  EXPECT_GE(res.base_distance, std::hypot(1.6, 0.2) - 0.05);
}

}  // namespace
}  // namespace wbc
