#include "wbc/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "wbc/errors.hpp"

namespace wbc {

namespace {

struct Weights {
  double w_theta;
  double w_phi;
};

Weights metric_weights(const RobotParams& robot) {
  return {norm(robot.base_half_extents), robot.link_length_1 + robot.link_length_2};
}

RobotState config_to_state(const Config5D& q) {
  RobotState s;
  s.x = q.x;
  s.y = q.y;
  s.theta = wrap_angle(q.theta);
  s.phi = {q.phi1, q.phi2};
  return s;
}

Config5D interpolate(const Config5D& a, const Config5D& b, double t) {
  Config5D q;
  q.x = a.x + (b.x - a.x) * t;
  q.y = a.y + (b.y - a.y) * t;
  q.theta = a.theta + wrap_angle(b.theta - a.theta) * t;
  q.phi1 = a.phi1 + (b.phi1 - a.phi1) * t;
  q.phi2 = a.phi2 + (b.phi2 - a.phi2) * t;
  return q;
}

}  // namespace

double config_distance(const Config5D& a, const Config5D& b, const RobotParams& robot) {
  Weights w = metric_weights(robot);
  double dx = b.x - a.x;
  double dy = b.y - a.y;
  double dt = wrap_angle(b.theta - a.theta) * w.w_theta;
  double d1 = (b.phi1 - a.phi1) * w.w_phi;
  double d2 = (b.phi2 - a.phi2) * w.w_phi;
  return std::sqrt(dx * dx + dy * dy + dt * dt + d1 * d1 + d2 * d2);
}

bool config_collision_free(const WorldModel& world, const RobotParams& robot, const Config5D& q) {
  if (q.phi1 < robot.joint_pos_limits[0] || q.phi1 > robot.joint_pos_limits[1]) return false;
  if (q.phi2 < robot.joint_pos_limits[0] || q.phi2 > robot.joint_pos_limits[1]) return false;
  if (!world.bounds.contains({q.x, q.y})) return false;
  auto shapes = collision_shapes(config_to_state(q), robot);
  return !in_collision(world, shapes);
}

std::vector<std::array<double, 2>> planar_arm_ik(const RobotParams& robot, const Vec2& target) {
  const double l1 = robot.link_length_1, l2 = robot.link_length_2;
  std::vector<std::array<double, 2>> out;
  double c2 = (norm_sq(target) - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (c2 < -1.0 - 1e-9 || c2 > 1.0 + 1e-9) return out;
  c2 = std::clamp(c2, -1.0, 1.0);
  for (int branch = 0; branch < 2; ++branch) {
    double phi2 = branch == 0 ? std::acos(c2) : -std::acos(c2);
    double phi1 =
        std::atan2(target.y, target.x) - std::atan2(l2 * std::sin(phi2), l1 + l2 * std::cos(phi2));
    phi1 = wrap_angle(phi1);
    if (phi1 < robot.joint_pos_limits[0] || phi1 > robot.joint_pos_limits[1]) continue;
    if (phi2 < robot.joint_pos_limits[0] || phi2 > robot.joint_pos_limits[1]) continue;
    if (branch == 1 && !out.empty() && std::abs(phi2 - out[0][1]) < 1e-12) continue;  // singular
    out.push_back({phi1, phi2});
  }
  return out;
}

std::vector<Config5D> ik_goal_configs(const WorldModel& world, const RobotParams& robot,
                                      const Vec2& ee_target, double tol, int n, Rng& rng) {
  std::vector<Config5D> out;
  const double l1 = robot.link_length_1, l2 = robot.link_length_2;
  const double reach_hi = l1 + l2 - 1e-4;
  const double reach_lo = std::abs(l1 - l2) + 1e-4;
  const int max_attempts = 400 * std::max(1, n);
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < n; ++attempt) {
    // Mount position in an annulus of arm reach around the target.
    double r = rng.uniform(reach_lo, reach_hi);
    double bearing = rng.uniform(0.0, 2.0 * M_PI);
    Vec2 mount = ee_target - unit(bearing) * r;
    double theta = rng.uniform(-M_PI, M_PI);
    Vec2 base = mount - rotate(robot.arm_mount_offset, theta);

    Vec2 rel = rotate(ee_target - mount, -theta);
    for (const auto& [phi1, phi2] : planar_arm_ik(robot, rel)) {
      Config5D q{base.x, base.y, theta, phi1, phi2};
      if (!config_collision_free(world, robot, q)) continue;
      EePose ee = forward_kinematics(config_to_state(q), robot);
      if (norm(ee.pos - ee_target) > tol) continue;
      out.push_back(q);
      if (static_cast<int>(out.size()) >= n) break;
    }
  }
  return out;
}

namespace {

struct Tree {
  std::vector<Config5D> nodes;
  std::vector<int> parents;

  int add(const Config5D& q, int parent) {
    nodes.push_back(q);
    parents.push_back(parent);
    return static_cast<int>(nodes.size()) - 1;
  }
  int nearest(const Config5D& q, const RobotParams& robot) const {
    int best = 0;
    double best_d = config_distance(nodes[0], q, robot);
    for (size_t i = 1; i < nodes.size(); ++i) {
      double d = config_distance(nodes[i], q, robot);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }
};

bool edge_valid(const WorldModel& world, const RobotParams& robot, const Config5D& from,
                const Config5D& to, double resolution) {
  double d = config_distance(from, to, robot);
  int n = std::max(1, static_cast<int>(std::ceil(d / resolution)));
  for (int i = 1; i <= n; ++i) {
    if (!config_collision_free(world, robot, interpolate(from, to, static_cast<double>(i) / n)))
      return false;
  }
  return true;
}

enum class ExtendResult { kTrapped, kAdvanced, kReached };

ExtendResult extend(Tree& tree, const Config5D& target, const WorldModel& world,
                    const RobotParams& robot, const PlannerParams& params, int* new_index) {
  int near = tree.nearest(target, robot);
  const Config5D& q_near = tree.nodes[near];
  double d = config_distance(q_near, target, robot);
  bool reaching = d <= params.eta;
  Config5D q_new = reaching ? target : interpolate(q_near, target, params.eta / d);
  if (!edge_valid(world, robot, q_near, q_new, params.edge_resolution)) return ExtendResult::kTrapped;
  *new_index = tree.add(q_new, near);
  return reaching ? ExtendResult::kReached : ExtendResult::kAdvanced;
}

ExtendResult connect(Tree& tree, const Config5D& target, const WorldModel& world,
                     const RobotParams& robot, const PlannerParams& params, int* last_index) {
  ExtendResult r = ExtendResult::kAdvanced;
  while (r == ExtendResult::kAdvanced) r = extend(tree, target, world, robot, params, last_index);
  return r;
}

std::vector<Config5D> trace_to_root(const Tree& tree, int index) {
  std::vector<Config5D> out;
  for (int i = index; i != -1; i = tree.parents[i]) out.push_back(tree.nodes[i]);
  return out;
}

double path_length(std::span<const Config5D> path, const RobotParams& robot) {
  double len = 0.0;
  for (size_t i = 1; i < path.size(); ++i) len += config_distance(path[i - 1], path[i], robot);
  return len;
}

}  // namespace

std::vector<Config5D> shortcut_path(std::vector<Config5D> path, const WorldModel& world,
                                    const RobotParams& robot, const PlannerParams& params,
                                    Rng& rng) {
  for (int round = 0; round < params.smoothing_rounds; ++round) {
    if (path.size() < 3) break;
    int i = rng.uniform_int(static_cast<int>(path.size()) - 2);
    int j = i + 2 + rng.uniform_int(static_cast<int>(path.size()) - i - 2);
    double direct = config_distance(path[i], path[j], robot);
    double via = path_length(std::span(path).subspan(i, j - i + 1), robot);
    if (direct >= via - 1e-9) continue;
    if (!edge_valid(world, robot, path[i], path[j], params.edge_resolution)) continue;
    path.erase(path.begin() + i + 1, path.begin() + j);
  }
  return path;
}

PlanResult plan_rrt_connect(const WorldModel& world, const RobotParams& robot,
                            const Config5D& start, std::span<const Config5D> goals,
                            const PlannerParams& params) {
  if (goals.empty()) throw PlanningFailed("rrt: no goal configurations");
  if (!config_collision_free(world, robot, start))
    throw PlanningFailed("rrt: start configuration in collision");

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  PlanResult result;
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    result.attempts_used = attempt + 1;
    Rng rng(Rng::mix(params.seed, static_cast<uint64_t>(attempt), 0x88));
    Tree start_tree, goal_tree;
    start_tree.add(start, -1);
    for (const Config5D& g : goals) goal_tree.add(g, -1);

    for (int iter = 0; iter < params.max_iterations; ++iter) {
      if ((iter & 0xFF) == 0 && elapsed() > params.time_budget_s) {
        result.planning_time_s = elapsed();
        throw PlanningFailed("rrt: time budget exhausted");
      }
      Config5D q_rand;
      q_rand.x = rng.uniform(world.bounds.lo.x, world.bounds.hi.x);
      q_rand.y = rng.uniform(world.bounds.lo.y, world.bounds.hi.y);
      q_rand.theta = rng.uniform(-M_PI, M_PI);
      q_rand.phi1 = rng.uniform(robot.joint_pos_limits[0], robot.joint_pos_limits[1]);
      q_rand.phi2 = rng.uniform(robot.joint_pos_limits[0], robot.joint_pos_limits[1]);

      bool grow_start = (iter % 2) == 0;
      Tree& t1 = grow_start ? start_tree : goal_tree;
      Tree& t2 = grow_start ? goal_tree : start_tree;
      int new_idx = -1;
      if (extend(t1, q_rand, world, robot, params, &new_idx) == ExtendResult::kTrapped) continue;
      int link_idx = -1;
      if (connect(t2, t1.nodes[new_idx], world, robot, params, &link_idx) != ExtendResult::kReached)
        continue;

      int start_idx = grow_start ? new_idx : link_idx;
      int goal_idx = grow_start ? link_idx : new_idx;
      std::vector<Config5D> from_start = trace_to_root(start_tree, start_idx);
      std::reverse(from_start.begin(), from_start.end());
      std::vector<Config5D> to_goal = trace_to_root(goal_tree, goal_idx);
      from_start.insert(from_start.end(), to_goal.begin(), to_goal.end());

      Rng smooth_rng(Rng::mix(params.seed, static_cast<uint64_t>(attempt), 0x99));
      result.path = shortcut_path(std::move(from_start), world, robot, params, smooth_rng);
      result.planning_time_s = elapsed();
      result.success = true;
      return result;
    }
    if (elapsed() > params.time_budget_s) break;
  }
  result.planning_time_s = elapsed();
  throw PlanningFailed("rrt: no collision-free path within the attempt budget");
}

TimedTrajectory time_parameterize(std::span<const Config5D> path, const RobotParams& robot) {
  TimedTrajectory traj;
  if (path.empty()) return traj;
  traj.final_ = path.back();
  const double v_max[5] = {robot.max_base_lin_vel, robot.max_base_lin_vel, robot.max_base_ang_vel,
                           robot.max_joint_vel, robot.max_joint_vel};
  const double a_max[5] = {robot.max_base_lin_acc, robot.max_base_lin_acc, robot.max_base_ang_acc,
                           robot.max_joint_acc, robot.max_joint_acc};

  double t_cursor = 0.0;
  for (size_t k = 0; k + 1 < path.size(); ++k) {
    const Config5D& a = path[k];
    const Config5D& b = path[k + 1];
    double deltas[5] = {b.x - a.x, b.y - a.y, wrap_angle(b.theta - a.theta), b.phi1 - a.phi1,
                        b.phi2 - a.phi2};
    double t_min = 0.0;
    for (int i = 0; i < 5; ++i) {
      double d = std::abs(deltas[i]);
      if (d < 1e-12) continue;
      double t_i = d <= v_max[i] * v_max[i] / a_max[i] ? 2.0 * std::sqrt(d / a_max[i])
                                                       : d / v_max[i] + v_max[i] / a_max[i];
      t_min = std::max(t_min, t_i);
    }
    if (t_min < 1e-9) continue;  // duplicate waypoint

    TimedTrajectory::TrajSegment seg;
    seg.start = a;
    seg.t_start = t_cursor;
    seg.duration = t_min;
    for (int i = 0; i < 5; ++i) {
      TimedTrajectory::DimProfile& p = seg.dims[i];
      p.delta = deltas[i];
      double d = std::abs(deltas[i]);
      if (d < 1e-12) continue;
      // Slowest-dimension synchronization: stretch by lowering the peak.
      double acc = a_max[i];
      double disc = acc * acc * t_min * t_min - 4.0 * acc * d;
      double v_pk = disc <= 0.0 ? acc * t_min / 2.0 : (acc * t_min - std::sqrt(disc)) / 2.0;
      v_pk = std::min(v_pk, v_max[i]);
      p.v_peak = v_pk;
      p.t_acc = v_pk / acc;
      p.accel = acc;
    }
    traj.segments_.push_back(seg);
    t_cursor += t_min;
  }
  traj.duration_ = t_cursor;
  return traj;
}

void TimedTrajectory::sample(double t, Config5D* q, Config5D* qd) const {
  Config5D pos = final_;
  Config5D vel{};
  if (!segments_.empty() && t < duration_) {
    size_t k = 0;
    while (k + 1 < segments_.size() && t >= segments_[k + 1].t_start) ++k;
    const TrajSegment& seg = segments_[k];
    double u = std::clamp(t - seg.t_start, 0.0, seg.duration);
    double coords[5] = {seg.start.x, seg.start.y, seg.start.theta, seg.start.phi1, seg.start.phi2};
    double vels[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 5; ++i) {
      const DimProfile& p = seg.dims[i];
      if (std::abs(p.delta) < 1e-12) continue;
      double sgn = p.delta >= 0.0 ? 1.0 : -1.0;
      double d = std::abs(p.delta);
      double s, v;
      double t_flat = seg.duration - 2.0 * p.t_acc;
      if (u < p.t_acc) {
        s = 0.5 * p.accel * u * u;
        v = p.accel * u;
      } else if (u < p.t_acc + t_flat) {
        s = 0.5 * p.accel * p.t_acc * p.t_acc + p.v_peak * (u - p.t_acc);
        v = p.v_peak;
      } else {
        double rem = seg.duration - u;
        s = d - 0.5 * p.accel * rem * rem;
        v = p.accel * rem;
      }
      coords[i] += sgn * std::min(s, d);
      vels[i] = sgn * v;
    }
    pos = {coords[0], coords[1], coords[2], coords[3], coords[4]};
    vel = {vels[0], vels[1], vels[2], vels[3], vels[4]};
  }
  if (q) *q = pos;
  if (qd) *qd = vel;
}

EpisodeResult execute(const TimedTrajectory& traj, Env& env) {
  const RobotParams& robot = env.robot_params();
  const double tau = robot.control_period;
  const double kp = 2.0, kd = 3.0;
  const double acc_limits[5] = {robot.max_base_lin_acc, robot.max_base_lin_acc,
                                robot.max_base_ang_acc, robot.max_joint_acc, robot.max_joint_acc};
  double t = 0.0;
  while (!env.done()) {
    t += tau;
    Config5D q_d, qd_d, qd_next;
    traj.sample(t, &q_d, &qd_d);
    traj.sample(t + tau, nullptr, &qd_next);
    const RobotState& s = env.state();
    Vec2 v_world = rotate({s.vx, s.vy}, s.theta);
    double err[5] = {q_d.x - s.x, q_d.y - s.y, wrap_angle(q_d.theta - s.theta),
                     q_d.phi1 - s.phi[0], q_d.phi2 - s.phi[1]};
    double verr[5] = {qd_d.x - v_world.x, qd_d.y - v_world.y, qd_d.theta - s.omega,
                      qd_d.phi1 - s.phi_dot[0], qd_d.phi2 - s.phi_dot[1]};
    double ff[5] = {(qd_next.x - qd_d.x) / tau, (qd_next.y - qd_d.y) / tau,
                    (qd_next.theta - qd_d.theta) / tau, (qd_next.phi1 - qd_d.phi1) / tau,
                    (qd_next.phi2 - qd_d.phi2) / tau};
    double a_world[5];
    for (int i = 0; i < 5; ++i) a_world[i] = ff[i] + kp * err[i] + kd * verr[i];
    // Base acceleration commands act in the body frame.
    Vec2 a_body = rotate({a_world[0], a_world[1]}, -s.theta);
    double a_cmd[5] = {a_body.x, a_body.y, a_world[2], a_world[3], a_world[4]};
    Action action;
    for (int i = 0; i < 5; ++i) {
      int idx = static_cast<int>(std::lround(a_cmd[i] / (0.5 * acc_limits[i]))) + 2;
      action[i] = std::clamp(idx, 0, 4);
    }
    env.step(action);
  }
  return env.result();
}

}  // namespace wbc
