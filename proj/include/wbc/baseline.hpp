#pragma once

#include <span>
#include <vector>

#include "wbc/env.hpp"
#include "wbc/rng.hpp"
#include "wbc/robot.hpp"
#include "wbc/world.hpp"

namespace wbc {

// Configuration of the 5-DOF planning space: planar base pose (two prismatic
// plus one continuous joint) and the two arm joints.
struct Config5D {
  double x = 0.0, y = 0.0, theta = 0.0, phi1 = 0.0, phi2 = 0.0;
};

struct PlannerParams {
  double eta = 0.3;               // extend step, weighted-metric units
  double edge_resolution = 0.01;  // collision-check spacing, metric units
  int max_attempts = 20;
  double time_budget_s = 180.0;   // wall clock across attempts
  int max_iterations = 20000;     // per attempt
  int smoothing_rounds = 120;
  uint64_t seed = 0;
};

struct PlanResult {
  std::vector<Config5D> path;
  double planning_time_s = 0.0;
  int attempts_used = 0;
  bool success = false;
};

// Angles cost meters: theta is weighted by half the base diagonal and the
// joints by the arm reach, so eta/edge_resolution apply uniformly.
double config_distance(const Config5D& a, const Config5D& b, const RobotParams& robot);

bool config_collision_free(const WorldModel& world, const RobotParams& robot, const Config5D& q);

// Closed-form planar 2-link IK for a target expressed in the mount frame.
// Returns 0, 1 (full extension/fold singularity) or 2 (elbow up/down)
// joint-limit-respecting solutions.
std::vector<std::array<double, 2>> planar_arm_ik(const RobotParams& robot, const Vec2& target);

// Up to n collision-free configurations whose end-effector lands within tol
// of ee_target; base poses sample an annulus of arm reach around the target
// and both elbow solutions of the planar 2-link IK are tried.
std::vector<Config5D> ik_goal_configs(const WorldModel& world, const RobotParams& robot,
                                      const Vec2& ee_target, double tol, int n, Rng& rng);

// Seeded random shortcutting; never increases weighted-metric length and
// keeps every densified edge collision-free.
std::vector<Config5D> shortcut_path(std::vector<Config5D> path, const WorldModel& world,
                                    const RobotParams& robot, const PlannerParams& params,
                                    Rng& rng);

// Bidirectional RRT-Connect between the start and a goal tree seeded with all
// goal configs, followed by shortcut smoothing. Throws PlanningFailed when
// the attempt/time budget is exhausted.
PlanResult plan_rrt_connect(const WorldModel& world, const RobotParams& robot,
                            const Config5D& start, std::span<const Config5D> goals,
                            const PlannerParams& params);

// Per-segment synchronized trapezoidal profiles under the per-dimension
// velocity/acceleration limits; zero velocity at every waypoint.
class TimedTrajectory {
 public:
  struct DimProfile {
    double delta = 0.0;   // signed displacement (theta wrapped)
    double v_peak = 0.0;
    double t_acc = 0.0;
    double accel = 0.0;
  };
  struct TrajSegment {
    Config5D start;
    std::array<DimProfile, 5> dims;
    double t_start = 0.0;
    double duration = 0.0;
  };

  double duration() const { return duration_; }
  const std::vector<TrajSegment>& segments() const { return segments_; }
  void sample(double t, Config5D* q, Config5D* qd) const;

 private:
  friend TimedTrajectory time_parameterize(std::span<const Config5D>, const RobotParams&);
  std::vector<TrajSegment> segments_;
  double duration_ = 0.0;
  Config5D final_{};
};

TimedTrajectory time_parameterize(std::span<const Config5D> path, const RobotParams& robot);

// Follows the trajectory in the (already reset) env with discretized-accel
// PD tracking, then parks at the final configuration until the env reports
// an outcome.
EpisodeResult execute(const TimedTrajectory& traj, Env& env);

}  // namespace wbc
