#pragma once

#include <string>

#include "wbc/baseline.hpp"
#include "wbc/env.hpp"
#include "wbc/policy.hpp"
#include "wbc/ppo.hpp"

namespace wbc {

struct EvalOptions {
  double tolerance = 0.07;     // m, setpoint success radius
  double exec_timeout_s = 180.0;
  double ik_tolerance = 0.03;  // m, goal-config end-effector tolerance
  int n_goal_configs = 16;
};

// Everything a run needs; every field has a default so an empty config works.
struct AppConfig {
  uint64_t seed = 0;
  ScenarioSpec scenario;
  RobotParams robot;
  LidarConfig lidar_front;
  LidarConfig lidar_rear;
  RewardParams reward;
  AdrConfig adr;
  EnvOptions env;
  TrainConfig ppo;
  PlannerParams planner;
  EvalOptions eval;

  NetworkSpec network_spec() const;
  void validate() const;
};

AppConfig default_config();

// Strict parse: unknown keys raise ConfigError naming the offending key path.
AppConfig config_from_json_text(const std::string& text);
AppConfig load_config_file(const std::string& path);

// Loads path (or defaults when empty), then applies the overrides document.
AppConfig load_config(const std::string& path, const std::string& overrides_json);

std::string config_to_json_text(const AppConfig& cfg);

// Key-by-key description with units, printed by the CLI help.
std::string config_help();

Env make_env(const AppConfig& cfg);

}  // namespace wbc
