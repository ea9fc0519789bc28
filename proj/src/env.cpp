#include "wbc/env.hpp"

#include <algorithm>
#include <cmath>

#include "wbc/errors.hpp"

namespace wbc {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kHoldSuccess: return "hold_success";
    case Outcome::kCollision: return "collision";
    case Outcome::kJointLimit: return "joint_limit";
    case Outcome::kTimeout: return "timeout";
    case Outcome::kNone: return "none";
  }
  return "none";
}

double AdrState::window_success_rate() const {
  if (window_.empty()) return 0.0;
  double n = 0.0;
  for (uint8_t v : window_) n += v;
  return n / static_cast<double>(window_.size());
}

void AdrState::record(bool success) {
  if (static_cast<int>(window_.size()) >= cfg_.window) window_.erase(window_.begin());
  window_.push_back(success ? 1 : 0);
  if (static_cast<int>(window_.size()) == cfg_.window &&
      window_success_rate() >= cfg_.success_threshold) {
    d_h_ = std::max(cfg_.d_h_min, cfg_.decay * d_h_);
    window_.clear();
  }
}

void AdrState::restore(double d_h, std::span<const uint8_t> window) {
  d_h_ = std::clamp(d_h, cfg_.d_h_min, cfg_.d_h_max);
  window_.assign(window.begin(), window.end());
}

Env::Env(ScenarioSpec scenario, RobotParams robot, LidarConfig lidar_front, LidarConfig lidar_rear,
         RewardParams reward, EnvOptions opts)
    : scenario_(std::move(scenario)),
      robot_(robot),
      lidar_front_(lidar_front),
      lidar_rear_(lidar_rear),
      reward_(reward),
      opts_(opts) {
  obs_size_ = lidar_front_.n_beams + lidar_rear_.n_beams + opts_.setpoint_dim + 3 + 2 + 2;
  obs_.resize(obs_size_);
  scan_front_.resize(lidar_front_.n_beams);
  scan_rear_.resize(lidar_rear_.n_beams);
}

int Env::max_steps() const {
  return max_steps_override_ > 0 ? max_steps_override_ : reward_.timeout_steps();
}

RobotState Env::sample_spawn_pose(const WorldModel& world, const RobotParams& robot, Rng& rng) {
  for (int i = 0; i < 1000; ++i) {
    double a = rng.uniform(0.0, 2.0 * M_PI);
    double r = std::sqrt(rng.uniform());
    RobotState s;
    s.x = world.spawn_region.center.x + r * std::cos(a) * world.spawn_region.radii.x;
    s.y = world.spawn_region.center.y + r * std::sin(a) * world.spawn_region.radii.y;
    s.theta = rng.uniform(-M_PI, M_PI);
    s.phi[0] = rng.uniform(robot.joint_pos_limits[0], robot.joint_pos_limits[1]) * 0.9;
    s.phi[1] = rng.uniform(robot.joint_pos_limits[0], robot.joint_pos_limits[1]) * 0.9;
    auto shapes = collision_shapes(s, robot);
    if (min_clearance(world, shapes) > 0.0) return s;
  }
  throw ResetFailed("env: no collision-free spawn pose in 1000 samples");
}

Vec2 Env::sample_goal(const WorldModel& world, Rng& rng) {
  const OrientedBox& box = world.goal_region;
  Vec2 local{rng.uniform(-box.half.x, box.half.x), rng.uniform(-box.half.y, box.half.y)};
  return box.center + rotate(local, box.yaw);
}

std::span<const float> Env::reset(uint64_t seed) {
  for (int attempt = 0; attempt < 20; ++attempt) {
    auto world = std::make_shared<WorldModel>(
        generate_world(scenario_, Rng::mix(seed, static_cast<uint64_t>(attempt))));
    Rng sample_rng(Rng::mix(seed, 0x7a3e, static_cast<uint64_t>(attempt)));
    // A fresh pose/goal pair is drawn against this world a few times before
    // falling back to a new world.
    for (int inner = 0; inner < 5; ++inner) {
      RobotState start = sample_spawn_pose(*world, robot_, sample_rng);
      Vec2 goal = sample_goal(*world, sample_rng);
      try {
        RefPath path =
            plan_ee_path(*world, forward_kinematics(start, robot_).pos, goal, opts_.inflation);
        world_ = std::move(world);
        state_ = start;
        goal_ = goal;
        path_ = std::move(path);
        begin_episode(Rng::mix(seed, 0x5ca9));
        return obs_;
      } catch (const NoPathError&) {
        continue;
      }
    }
  }
  throw ResetFailed("env: could not establish a plannable episode");
}

std::span<const float> Env::reset_fixed(const WorldModel& world, const RobotState& start,
                                        const Vec2& goal, uint64_t seed) {
  world_ = std::make_shared<WorldModel>(world);
  state_ = start;
  goal_ = goal;
  path_ = plan_ee_path(*world_, forward_kinematics(start, robot_).pos, goal, opts_.inflation);
  begin_episode(seed);
  return obs_;
}

void Env::begin_episode(uint64_t noise_seed) {
  rng_ = Rng(noise_seed);
  state_.vx = state_.vy = state_.omega = 0.0;
  state_.phi_dot = {0.0, 0.0};
  i_h_ = 0.0;
  hold_count_ = 0;
  step_count_ = 0;
  done_ = false;
  result_ = EpisodeResult{};
  PathProjection proj = project(path_, forward_kinematics(state_, robot_).pos);
  prev_s_ = proj.s;
  prev_dev_ = proj.deviation;
  simulate_scan_into(*world_, state_, lidar_front_, rng_, scan_front_);
  simulate_scan_into(*world_, state_, lidar_rear_, rng_, scan_rear_);
  build_observation();
  if (record_trace_) {
    trace_ = EpisodeTrace{};
    trace_.world_json = world_to_json(*world_);
    trace_.initial_state = state_;
    trace_.ref_path = path_.waypoints;
    trace_.goal = goal_;
    trace_.d_h = d_h_;
  }
}

void Env::build_observation() {
  float* o = obs_.data();
  for (int i = 0; i < lidar_front_.n_beams; ++i)
    *o++ = static_cast<float>(scan_front_[i] / lidar_front_.max_range);
  for (int i = 0; i < lidar_rear_.n_beams; ++i)
    *o++ = static_cast<float>(scan_rear_[i] / lidar_rear_.max_range);
  Vec2 p = world_to_ee_frame(state_, robot_, goal_);
  double clip = opts_.setpoint_clip;
  *o++ = static_cast<float>(std::clamp(p.x, -clip, clip) / clip);
  *o++ = static_cast<float>(std::clamp(p.y, -clip, clip) / clip);
  if (opts_.setpoint_dim == 3) {
    // Optional heading component of the setpoint, zero for point setpoints.
    *o++ = 0.0f;
  }
  *o++ = static_cast<float>(state_.vx / robot_.max_base_lin_vel);
  *o++ = static_cast<float>(state_.vy / robot_.max_base_lin_vel);
  *o++ = static_cast<float>(state_.omega / robot_.max_base_ang_vel);
  double mid = 0.5 * (robot_.joint_pos_limits[0] + robot_.joint_pos_limits[1]);
  double half = 0.5 * (robot_.joint_pos_limits[1] - robot_.joint_pos_limits[0]);
  *o++ = static_cast<float>((state_.phi[0] - mid) / half);
  *o++ = static_cast<float>((state_.phi[1] - mid) / half);
  *o++ = static_cast<float>(state_.phi_dot[0] / robot_.max_joint_vel);
  *o++ = static_cast<float>(state_.phi_dot[1] / robot_.max_joint_vel);
}

StepOutput Env::step(const Action& a) {
  if (done_) throw SteppedAfterDone("env: step() after episode end");

  RobotState prev = state_;
  state_ = integrate(state_, action_to_accels(a, robot_), robot_);
  result_.base_distance += std::hypot(state_.x - prev.x, state_.y - prev.y);
  result_.joint_distance +=
      std::abs(state_.phi[0] - prev.phi[0]) + std::abs(state_.phi[1] - prev.phi[1]);

  simulate_scan_into(*world_, state_, lidar_front_, rng_, scan_front_);
  simulate_scan_into(*world_, state_, lidar_rear_, rng_, scan_rear_);

  auto shapes = collision_shapes(state_, robot_);
  EePose ee = forward_kinematics(state_, robot_);
  PathProjection proj = project(path_, ee.pos);

  StepContext ctx;
  ctx.delta_deviation = proj.deviation - prev_dev_;
  ctx.deviation = proj.deviation;
  ctx.delta_progress = proj.s - prev_s_;
  ctx.d_pt_init = path_.total_length;
  ctx.speed = std::hypot(state_.vx, state_.vy);
  ctx.d_sm = reward_.safety_margin_base_only
                 ? min_clearance(*world_, std::span<const Shape>(shapes.data(), 1))
                 : min_clearance(*world_, shapes);
  ctx.d_g = norm(ee.pos - goal_);
  ctx.d_h = d_h_;
  ctx.in_sphere = ctx.d_g <= d_h_;
  ctx.i_h_prev = i_h_;

  hold_count_ = ctx.in_sphere ? hold_count_ + 1 : 0;
  ++step_count_;

  Termination term = Termination::kNone;
  if (in_collision(*world_, shapes)) {
    term = Termination::kCollision;
  } else if (joint_limits_violated(state_, robot_)) {
    term = Termination::kJointLimit;
  } else if (hold_count_ >= reward_.hold_steps()) {
    term = Termination::kHoldSuccess;
  } else if (step_count_ >= max_steps()) {
    term = Termination::kTimeout;
  }
  ctx.termination = term;

  StepReward sr = step_reward(ctx, reward_);
  i_h_ = sr.i_h_new;
  prev_s_ = proj.s;
  prev_dev_ = proj.deviation;
  result_.reward += sr.r;
  result_.steps = step_count_;

  StepOutput out;
  out.reward = sr.r;
  out.terms = sr.terms;
  if (term != Termination::kNone) {
    done_ = true;
    switch (term) {
      case Termination::kCollision: result_.outcome = Outcome::kCollision; break;
      case Termination::kJointLimit: result_.outcome = Outcome::kJointLimit; break;
      case Termination::kHoldSuccess: result_.outcome = Outcome::kHoldSuccess; break;
      case Termination::kTimeout: result_.outcome = Outcome::kTimeout; break;
      case Termination::kNone: break;
    }
    out.outcome = result_.outcome;
  }
  out.done = done_;

  if (record_trace_) {
    TraceStep ts;
    ts.state = state_;
    ts.action = a;
    ts.reward = sr.r;
    ts.terms = sr.terms;
    ts.scan_front.assign(scan_front_.begin(), scan_front_.end());
    ts.scan_rear.assign(scan_rear_.begin(), scan_rear_.end());
    trace_.steps.push_back(std::move(ts));
    if (done_) trace_.result = result_;
  }

  build_observation();
  return out;
}

}  // namespace wbc
