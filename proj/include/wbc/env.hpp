#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "wbc/pathref.hpp"
#include "wbc/reward.hpp"
#include "wbc/rng.hpp"
#include "wbc/robot.hpp"
#include "wbc/sensors.hpp"
#include "wbc/world.hpp"

namespace wbc {

enum class Outcome { kNone, kHoldSuccess, kCollision, kJointLimit, kTimeout };

const char* outcome_name(Outcome o);

struct AdrConfig {
  double d_h_max = 0.5;
  double d_h_min = 0.07;
  double success_threshold = 0.7;
  double decay = 0.9;
  int window = 100;
};

// Curriculum on the tolerance sphere radius: once the success window fills at
// or above the threshold rate, d_h shrinks by the decay factor (never below
// d_h_min, never grows) and the window restarts.
class AdrState {
 public:
  AdrState() : AdrState(AdrConfig{}) {}
  explicit AdrState(const AdrConfig& cfg) : cfg_(cfg), d_h_(cfg.d_h_max) {}

  double tolerance() const { return d_h_; }
  const AdrConfig& config() const { return cfg_; }
  int window_fill() const { return static_cast<int>(window_.size()); }
  double window_success_rate() const;

  void record(bool success);

  // Resume support.
  void restore(double d_h, std::span<const uint8_t> window);
  std::vector<uint8_t> window_contents() const { return window_; }

 private:
  AdrConfig cfg_;
  double d_h_;
  std::vector<uint8_t> window_;
};

struct EpisodeResult {
  Outcome outcome = Outcome::kNone;
  int steps = 0;
  double reward = 0.0;
  double base_distance = 0.0;   // m
  double joint_distance = 0.0;  // rad
};

struct StepOutput {
  double reward = 0.0;
  bool done = false;
  Outcome outcome = Outcome::kNone;
  RewardTerms terms;
};

struct TraceStep {
  RobotState state;
  Action action{};
  double reward = 0.0;
  RewardTerms terms;
  std::vector<float> scan_front, scan_rear;  // meters
};

struct EpisodeTrace {
  std::string world_json;
  RobotState initial_state;
  std::vector<Vec2> ref_path;
  Vec2 goal;
  double d_h = 0.0;
  std::vector<TraceStep> steps;
  EpisodeResult result;
};

struct EnvOptions {
  double inflation = 0.10;    // reference-path obstacle inflation (m)
  int setpoint_dim = 2;       // 2 = position, 3 = position + heading
  double setpoint_clip = 10.0;  // m
  int max_steps = 0;          // 0 = reward timeout / tau
};

// One episode-stepped simulation instance. Not thread-safe; use one per
// worker. Observation layout: [S_f/5 | S_r/5 | P | vx vy omega | phi | phid],
// all entries normalized by their limits.
class Env {
 public:
  Env(ScenarioSpec scenario, RobotParams robot, LidarConfig lidar_front, LidarConfig lidar_rear,
      RewardParams reward, EnvOptions opts);

  int obs_size() const { return obs_size_; }
  void set_tolerance(double d_h) { d_h_ = d_h; }
  double tolerance() const { return d_h_; }
  void set_max_steps(int n) { max_steps_override_ = n; }
  void set_record_trace(bool on) { record_trace_ = on; }

  // Randomized episode: new world, pose, goal, reference path. Deterministic
  // per seed. Throws ResetFailed / GenerationFailed.
  std::span<const float> reset(uint64_t seed);

  // Fixed-scene episode for evaluation: explicit world, start state and goal.
  // Scan noise is seeded by `seed`.
  std::span<const float> reset_fixed(const WorldModel& world, const RobotState& start,
                                     const Vec2& goal, uint64_t seed);

  StepOutput step(const Action& a);

  bool done() const { return done_; }
  const EpisodeResult& result() const { return result_; }
  const WorldModel& world() const { return *world_; }
  const RobotState& state() const { return state_; }
  const RefPath& ref_path() const { return path_; }
  const Vec2& goal() const { return goal_; }
  const RobotParams& robot_params() const { return robot_; }
  const RewardParams& reward_params() const { return reward_; }
  std::span<const float> observation() const { return obs_; }
  const EpisodeTrace& trace() const { return trace_; }

  // Samples a collision-free pose in the spawn region (up to 1000 tries) —
  // shared with the eval harness so both methods see identical starts.
  static RobotState sample_spawn_pose(const WorldModel& world, const RobotParams& robot, Rng& rng);
  static Vec2 sample_goal(const WorldModel& world, Rng& rng);

 private:
  void begin_episode(uint64_t noise_seed);
  void build_observation();
  int max_steps() const;

  ScenarioSpec scenario_;
  RobotParams robot_;
  LidarConfig lidar_front_, lidar_rear_;
  RewardParams reward_;
  EnvOptions opts_;
  int obs_size_ = 0;

  std::shared_ptr<const WorldModel> world_;
  RefPath path_;
  Vec2 goal_;
  double d_h_ = 0.5;
  RobotState state_;
  Rng rng_{0};
  std::vector<float> obs_;
  std::vector<double> scan_front_, scan_rear_;
  double prev_s_ = 0.0, prev_dev_ = 0.0;
  double i_h_ = 0.0;
  int hold_count_ = 0;
  int step_count_ = 0;
  int max_steps_override_ = 0;
  bool done_ = true;
  EpisodeResult result_;
  bool record_trace_ = false;
  EpisodeTrace trace_;
};

}  // namespace wbc
