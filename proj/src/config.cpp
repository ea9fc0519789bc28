#include "wbc/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include <json.hpp>

#include "wbc/errors.hpp"

namespace wbc {

using nlohmann::json;

namespace {

constexpr double kDegToRad = M_PI / 180.0;

// Walks one object level, dispatching known keys and rejecting the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError("config: '" + path_ + "' must be an object");
  }

  template <typename T>
  void field(const char* key, T& out) {
    handle(key, [&](const json& v) { out = v.get<T>(); });
  }

  void field_range(const char* key, std::array<double, 2>& out) {
    handle(key, [&](const json& v) {
      require_array(v, 2, key);
      out = {v[0].get<double>(), v[1].get<double>()};
    });
  }

  void field_range(const char* key, std::array<int, 2>& out) {
    handle(key, [&](const json& v) {
      require_array(v, 2, key);
      out = {v[0].get<int>(), v[1].get<int>()};
    });
  }

  void field_vec2(const char* key, Vec2& out) {
    handle(key, [&](const json& v) {
      require_array(v, 2, key);
      out = {v[0].get<double>(), v[1].get<double>()};
    });
  }

  void custom(const char* key, const std::function<void(const json&)>& fn) { handle(key, fn); }

  void finish() {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key))
        throw ConfigError("config: unknown key '" + path_ + key + "'");
    }
  }

 private:
  void require_array(const json& v, size_t n, const char* key) const {
    if (!v.is_array() || v.size() != n)
      throw ConfigError("config: '" + path_ + key + "' must be an array of " + std::to_string(n));
  }

  void handle(const char* key, const std::function<void(const json&)>& fn) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      fn(*it);
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + path_ + key + "': " + e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_mount(const json& v, const std::string& path, LidarConfig& cfg) {
  Section s(v, path);
  double yaw_deg = cfg.mount_yaw / kDegToRad;
  s.field("x", cfg.mount_pos.x);
  s.field("y", cfg.mount_pos.y);
  s.field("yaw_deg", yaw_deg);
  s.finish();
  cfg.mount_yaw = yaw_deg * kDegToRad;
}

void apply_json(AppConfig& cfg, const json& root) {
  Section top(root, "");
  top.field("seed", cfg.seed);

  top.custom("scenario", [&](const json& v) {
    Section s(v, "scenario.");
    s.field_range("corridor_width_range", cfg.scenario.corridor_width_range);
    s.field_range("corridor_length_range", cfg.scenario.corridor_length_range);
    s.field_range("shelf_count_range", cfg.scenario.shelf_count_range);
    s.field_range("shelf_depth_range", cfg.scenario.shelf_depth_range);
    s.field_range("shelf_width_range", cfg.scenario.shelf_width_range);
    s.field_range("door_count_range", cfg.scenario.door_count_range);
    s.field_range("door_width_range", cfg.scenario.door_width_range);
    s.field_range("spawn_distance_range", cfg.scenario.spawn_distance_range);
    s.field("seedable", cfg.scenario.seedable);
    s.custom("fixed_layout", [&](const json& w) { cfg.scenario.fixed_layout = world_from_json(w.dump()); });
    s.custom("fixed_layout_file", [&](const json& f) {
      std::ifstream in(f.get<std::string>());
      if (!in) throw ConfigError("config: cannot open fixed_layout_file");
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      cfg.scenario.fixed_layout = world_from_json(text);
    });
    s.finish();
  });

  top.custom("robot", [&](const json& v) {
    Section s(v, "robot.");
    s.field_vec2("base_half_extents", cfg.robot.base_half_extents);
    s.field_vec2("arm_mount_offset", cfg.robot.arm_mount_offset);
    s.custom("link_lengths", [&](const json& l) {
      if (!l.is_array() || l.size() != 2)
        throw ConfigError("config: 'robot.link_lengths' must be an array of 2");
      cfg.robot.link_length_1 = l[0].get<double>();
      cfg.robot.link_length_2 = l[1].get<double>();
    });
    s.field("link_radius", cfg.robot.link_radius);
    s.field_range("joint_pos_limits", cfg.robot.joint_pos_limits);
    s.field("max_base_lin_vel", cfg.robot.max_base_lin_vel);
    s.field("max_base_ang_vel", cfg.robot.max_base_ang_vel);
    s.field("max_joint_vel", cfg.robot.max_joint_vel);
    s.field("max_base_lin_acc", cfg.robot.max_base_lin_acc);
    s.field("max_base_ang_acc", cfg.robot.max_base_ang_acc);
    s.field("max_joint_acc", cfg.robot.max_joint_acc);
    s.field("control_period", cfg.robot.control_period);
    s.finish();
  });

  top.custom("lidar", [&](const json& v) {
    Section s(v, "lidar.");
    int n_beams = cfg.lidar_front.n_beams;
    double fov_deg = cfg.lidar_front.fov / kDegToRad;
    double max_range = cfg.lidar_front.max_range;
    double sigma = cfg.lidar_front.noise_sigma;
    double dropout = cfg.lidar_front.dropout_prob;
    s.field("n_beams", n_beams);
    s.field("fov_deg", fov_deg);
    s.field("max_range", max_range);
    s.field("noise_sigma", sigma);
    s.field("dropout_prob", dropout);
    s.custom("front_mount", [&](const json& m) { parse_mount(m, "lidar.front_mount.", cfg.lidar_front); });
    s.custom("rear_mount", [&](const json& m) { parse_mount(m, "lidar.rear_mount.", cfg.lidar_rear); });
    s.finish();
    for (LidarConfig* lc : {&cfg.lidar_front, &cfg.lidar_rear}) {
      lc->n_beams = n_beams;
      lc->fov = fov_deg * kDegToRad;
      lc->max_range = max_range;
      lc->noise_sigma = sigma;
      lc->dropout_prob = dropout;
    }
  });

  top.custom("reward", [&](const json& v) {
    Section s(v, "reward.");
    s.field("w_t", cfg.reward.w_t);
    s.field("t_timeout", cfg.reward.t_timeout);
    s.field("w_pd", cfg.reward.w_pd);
    s.field("w_pt", cfg.reward.w_pt);
    s.field("w_sm", cfg.reward.w_sm);
    s.field("d_th", cfg.reward.d_th);
    s.field("w_ht", cfg.reward.w_ht);
    s.field("w_hd", cfg.reward.w_hd);
    s.field("t_hold", cfg.reward.t_hold);
    s.field("d_collision", cfg.reward.d_collision);
    s.field("d_joint_limit", cfg.reward.d_joint_limit);
    s.field("d_hold_success", cfg.reward.d_hold_success);
    s.field("safety_margin_base_only", cfg.reward.safety_margin_base_only);
    s.field("deviation_signed", cfg.reward.deviation_signed);
    s.finish();
    cfg.reward.tau = cfg.robot.control_period;
  });

  top.custom("adr", [&](const json& v) {
    Section s(v, "adr.");
    s.field("d_h_max", cfg.adr.d_h_max);
    s.field("d_h_min", cfg.adr.d_h_min);
    s.field("success_threshold", cfg.adr.success_threshold);
    s.field("decay", cfg.adr.decay);
    s.field("window", cfg.adr.window);
    s.finish();
  });

  top.custom("env", [&](const json& v) {
    Section s(v, "env.");
    s.field("inflation", cfg.env.inflation);
    s.field("setpoint_dim", cfg.env.setpoint_dim);
    s.field("setpoint_clip", cfg.env.setpoint_clip);
    s.field("max_steps", cfg.env.max_steps);
    s.finish();
  });

  top.custom("ppo", [&](const json& v) {
    Section s(v, "ppo.");
    s.field("n_workers", cfg.ppo.n_workers);
    s.field("n_steps", cfg.ppo.n_steps);
    s.field("nminibatches", cfg.ppo.nminibatches);
    s.field("noptepochs", cfg.ppo.noptepochs);
    s.field("cliprange", cfg.ppo.cliprange);
    s.field("ent_coeff", cfg.ppo.ent_coeff);
    s.field("gamma", cfg.ppo.gamma);
    s.field("lam", cfg.ppo.lam);
    s.field("lr_init", cfg.ppo.lr_init);
    s.field("lr_final", cfg.ppo.lr_final);
    s.field("total_steps", cfg.ppo.total_steps);
    s.field("value_coeff", cfg.ppo.value_coeff);
    s.field("max_grad_norm", cfg.ppo.max_grad_norm);
    s.field("checkpoint_every", cfg.ppo.checkpoint_every);
    s.field("update_threads", cfg.ppo.update_threads);
    s.finish();
  });

  top.custom("planner", [&](const json& v) {
    Section s(v, "planner.");
    s.field("eta", cfg.planner.eta);
    s.field("edge_resolution", cfg.planner.edge_resolution);
    s.field("max_attempts", cfg.planner.max_attempts);
    s.field("time_budget_s", cfg.planner.time_budget_s);
    s.field("max_iterations", cfg.planner.max_iterations);
    s.field("smoothing_rounds", cfg.planner.smoothing_rounds);
    s.finish();
  });

  top.custom("eval", [&](const json& v) {
    Section s(v, "eval.");
    s.field("tolerance", cfg.eval.tolerance);
    s.field("exec_timeout_s", cfg.eval.exec_timeout_s);
    s.field("ik_tolerance", cfg.eval.ik_tolerance);
    s.field("n_goal_configs", cfg.eval.n_goal_configs);
    s.finish();
  });

  top.finish();
}

}  // namespace

NetworkSpec AppConfig::network_spec() const {
  NetworkSpec spec;
  spec.n_beams = lidar_front.n_beams;
  spec.proprio_dim = env.setpoint_dim + 7;
  return spec;
}

void AppConfig::validate() const {
  scenario.validate();
  ppo.validate();
  network_spec().validate();
  if (lidar_front.n_beams != lidar_rear.n_beams)
    throw ConfigError("config: front/rear lidar must share n_beams");
  if (adr.d_h_min <= 0.0 || adr.d_h_min > adr.d_h_max)
    throw ConfigError("config: adr tolerance bounds invalid");
  if (eval.tolerance <= 0.0) throw ConfigError("config: eval.tolerance must be > 0");
}

AppConfig default_config() {
  AppConfig cfg;
  cfg.lidar_front.mount_pos = {0.45, 0.33};
  cfg.lidar_front.mount_yaw = 0.0;
  cfg.lidar_rear.mount_pos = {-0.45, -0.33};
  cfg.lidar_rear.mount_yaw = M_PI;
  return cfg;
}

AppConfig config_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  AppConfig cfg = default_config();
  apply_json(cfg, root);
  cfg.validate();
  return cfg;
}

AppConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

AppConfig load_config(const std::string& path, const std::string& overrides_json) {
  AppConfig cfg = path.empty() ? default_config() : load_config_file(path);
  if (!overrides_json.empty()) {
    json root;
    try {
      root = json::parse(overrides_json);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: override parse error: ") + e.what());
    }
    apply_json(cfg, root);
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json_text(const AppConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["scenario"] = {{"corridor_width_range", cfg.scenario.corridor_width_range},
                   {"corridor_length_range", cfg.scenario.corridor_length_range},
                   {"shelf_count_range", cfg.scenario.shelf_count_range},
                   {"shelf_depth_range", cfg.scenario.shelf_depth_range},
                   {"shelf_width_range", cfg.scenario.shelf_width_range},
                   {"door_count_range", cfg.scenario.door_count_range},
                   {"door_width_range", cfg.scenario.door_width_range},
                   {"spawn_distance_range", cfg.scenario.spawn_distance_range},
                   {"seedable", cfg.scenario.seedable}};
  j["robot"] = {{"base_half_extents", {cfg.robot.base_half_extents.x, cfg.robot.base_half_extents.y}},
                {"arm_mount_offset", {cfg.robot.arm_mount_offset.x, cfg.robot.arm_mount_offset.y}},
                {"link_lengths", {cfg.robot.link_length_1, cfg.robot.link_length_2}},
                {"link_radius", cfg.robot.link_radius},
                {"joint_pos_limits", cfg.robot.joint_pos_limits},
                {"max_base_lin_vel", cfg.robot.max_base_lin_vel},
                {"max_base_ang_vel", cfg.robot.max_base_ang_vel},
                {"max_joint_vel", cfg.robot.max_joint_vel},
                {"max_base_lin_acc", cfg.robot.max_base_lin_acc},
                {"max_base_ang_acc", cfg.robot.max_base_ang_acc},
                {"max_joint_acc", cfg.robot.max_joint_acc},
                {"control_period", cfg.robot.control_period}};
  j["lidar"] = {{"n_beams", cfg.lidar_front.n_beams},
                {"fov_deg", cfg.lidar_front.fov / kDegToRad},
                {"max_range", cfg.lidar_front.max_range},
                {"noise_sigma", cfg.lidar_front.noise_sigma},
                {"dropout_prob", cfg.lidar_front.dropout_prob},
                {"front_mount",
                 {{"x", cfg.lidar_front.mount_pos.x},
                  {"y", cfg.lidar_front.mount_pos.y},
                  {"yaw_deg", cfg.lidar_front.mount_yaw / kDegToRad}}},
                {"rear_mount",
                 {{"x", cfg.lidar_rear.mount_pos.x},
                  {"y", cfg.lidar_rear.mount_pos.y},
                  {"yaw_deg", cfg.lidar_rear.mount_yaw / kDegToRad}}}};
  j["reward"] = {{"w_t", cfg.reward.w_t},
                 {"t_timeout", cfg.reward.t_timeout},
                 {"w_pd", cfg.reward.w_pd},
                 {"w_pt", cfg.reward.w_pt},
                 {"w_sm", cfg.reward.w_sm},
                 {"d_th", cfg.reward.d_th},
                 {"w_ht", cfg.reward.w_ht},
                 {"w_hd", cfg.reward.w_hd},
                 {"t_hold", cfg.reward.t_hold},
                 {"d_collision", cfg.reward.d_collision},
                 {"d_joint_limit", cfg.reward.d_joint_limit},
                 {"d_hold_success", cfg.reward.d_hold_success},
                 {"safety_margin_base_only", cfg.reward.safety_margin_base_only},
                 {"deviation_signed", cfg.reward.deviation_signed}};
  j["adr"] = {{"d_h_max", cfg.adr.d_h_max},
              {"d_h_min", cfg.adr.d_h_min},
              {"success_threshold", cfg.adr.success_threshold},
              {"decay", cfg.adr.decay},
              {"window", cfg.adr.window}};
  j["env"] = {{"inflation", cfg.env.inflation},
              {"setpoint_dim", cfg.env.setpoint_dim},
              {"setpoint_clip", cfg.env.setpoint_clip},
              {"max_steps", cfg.env.max_steps}};
  j["ppo"] = {{"n_workers", cfg.ppo.n_workers},
              {"n_steps", cfg.ppo.n_steps},
              {"nminibatches", cfg.ppo.nminibatches},
              {"noptepochs", cfg.ppo.noptepochs},
              {"cliprange", cfg.ppo.cliprange},
              {"ent_coeff", cfg.ppo.ent_coeff},
              {"gamma", cfg.ppo.gamma},
              {"lam", cfg.ppo.lam},
              {"lr_init", cfg.ppo.lr_init},
              {"lr_final", cfg.ppo.lr_final},
              {"total_steps", cfg.ppo.total_steps},
              {"value_coeff", cfg.ppo.value_coeff},
              {"max_grad_norm", cfg.ppo.max_grad_norm},
              {"checkpoint_every", cfg.ppo.checkpoint_every},
              {"update_threads", cfg.ppo.update_threads}};
  j["planner"] = {{"eta", cfg.planner.eta},
                  {"edge_resolution", cfg.planner.edge_resolution},
                  {"max_attempts", cfg.planner.max_attempts},
                  {"time_budget_s", cfg.planner.time_budget_s},
                  {"max_iterations", cfg.planner.max_iterations},
                  {"smoothing_rounds", cfg.planner.smoothing_rounds}};
  j["eval"] = {{"tolerance", cfg.eval.tolerance},
               {"exec_timeout_s", cfg.eval.exec_timeout_s},
               {"ik_tolerance", cfg.eval.ik_tolerance},
               {"n_goal_configs", cfg.eval.n_goal_configs}};
  return j.dump(2);
}

std::string config_help() {
  return R"(Config keys (JSON; all optional, defaults in parentheses):
  seed                               master seed (0)
  scenario.corridor_width_range      [min,max] m (1.5, 3.0)
  scenario.corridor_length_range     [min,max] m (8, 14)
  scenario.shelf_count_range         [min,max] count (1, 3)
  scenario.shelf_depth_range         [min,max] m (0.3, 0.6)
  scenario.shelf_width_range         [min,max] m (0.8, 2.0)
  scenario.door_count_range          [min,max] count (0, 2)
  scenario.door_width_range          [min,max] m (0.8, 1.2)
  scenario.spawn_distance_range      [min,max] m from goal shelf (1.5, 4.0)
  scenario.seedable                  bool (true)
  scenario.fixed_layout              inline world JSON (unset)
  scenario.fixed_layout_file         path to world JSON (unset)
  robot.base_half_extents            [x,y] m (0.48, 0.395)
  robot.arm_mount_offset             [x,y] m in base frame (0.24, 0)
  robot.link_lengths                 [l1,l2] m (0.316, 0.30)
  robot.link_radius                  m (0.06)
  robot.joint_pos_limits             [lo,hi] rad (-2.8, 2.8)
  robot.max_base_lin_vel             m/s (0.1)
  robot.max_base_ang_vel             rad/s (0.2)
  robot.max_joint_vel                rad/s (0.5)
  robot.max_base_lin_acc             m/s^2 (0.15)
  robot.max_base_ang_acc             rad/s^2 (0.3)
  robot.max_joint_acc                rad/s^2 (0.8)
  robot.control_period               s (0.04)
  lidar.n_beams                      beams per scanner (64)
  lidar.fov_deg                      degrees (270)
  lidar.max_range                    m (5.0)
  lidar.noise_sigma                  m (0.01)
  lidar.dropout_prob                 probability (0.02)
  lidar.front_mount / rear_mount     {x m, y m, yaw_deg}
  reward.w_t                         time penalty total (-15)
  reward.t_timeout                   s (120)
  reward.w_pd                        deviation weight (-10)
  reward.w_pt                        progress weight (30)
  reward.w_sm                        safety-margin weight (-1)
  reward.d_th                        safety threshold m (0.3)
  reward.w_ht / w_hd                 holding weights (20 / 40)
  reward.t_hold                      s (1.5)
  reward.d_collision                 terminal (-60)
  reward.d_joint_limit               terminal (-20)
  reward.d_hold_success              terminal (10)
  reward.safety_margin_base_only     bool (true)
  reward.deviation_signed            bool (true)
  adr.d_h_max / d_h_min              m (0.5 / 0.07)
  adr.success_threshold              rate (0.7)
  adr.decay                          factor (0.9)
  adr.window                         episodes (100)
  env.inflation                      reference-path inflation m (0.10)
  env.setpoint_dim                   2 or 3 (2)
  env.setpoint_clip                  m (10)
  env.max_steps                      0 = t_timeout / control_period (0)
  ppo.n_workers                      parallel envs (4)
  ppo.n_steps                        steps per worker per update (2048)
  ppo.nminibatches                   (8)
  ppo.noptepochs                     (30)
  ppo.cliprange                      (0.2)
  ppo.ent_coeff                      (0.00376)
  ppo.gamma / lam                    (0.999 / 0.8)
  ppo.lr_init / lr_final             linear schedule (1e-3 / 1.5e-4)
  ppo.total_steps                    environment steps (3000000)
  ppo.value_coeff                    (0.5)
  ppo.max_grad_norm                  (0.5)
  ppo.checkpoint_every               updates (20)
  ppo.update_threads                 gradient threads (1)
  planner.eta                        extend step, metric units (0.3)
  planner.edge_resolution            collision spacing, metric units (0.01)
  planner.max_attempts               (20)
  planner.time_budget_s              s (180)
  planner.max_iterations             per attempt (20000)
  planner.smoothing_rounds           (120)
  eval.tolerance                     success radius m (0.07)
  eval.exec_timeout_s                s (180)
  eval.ik_tolerance                  goal-config tolerance m (0.03)
  eval.n_goal_configs                (16)
)";
}

Env make_env(const AppConfig& cfg) {
  RewardParams reward = cfg.reward;
  reward.tau = cfg.robot.control_period;
  return Env(cfg.scenario, cfg.robot, cfg.lidar_front, cfg.lidar_rear, reward, cfg.env);
}

}  // namespace wbc
