#include "wbc/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wbc/baseline.hpp"
#include "wbc/errors.hpp"
#include "wbc/evalharness.hpp"
#include "wbc/log.hpp"
#include "wbc/trace.hpp"
#include "wbc/viz.hpp"

namespace wbc {

namespace fs = std::filesystem;
using nlohmann::json;

void run_train(const AppConfig& cfg, const std::string& out_dir, bool resume,
               const Trainer::StopFn& stop) {
  std::vector<std::unique_ptr<Env>> envs;
  envs.reserve(cfg.ppo.n_workers);
  for (int w = 0; w < cfg.ppo.n_workers; ++w) envs.push_back(std::make_unique<Env>(make_env(cfg)));

  Trainer trainer(std::move(envs), cfg.network_spec(), cfg.ppo, cfg.adr, out_dir, cfg.seed);
  if (resume && fs::exists(out_dir + "/trainer_state.json")) trainer.resume(out_dir);
  std::ofstream(out_dir + "/config.json") << config_to_json_text(cfg) << "\n";
  trainer.run(stop);

  render_training_plots(trainer.log_path(), out_dir);
  json summary;
  if (!trainer.history().empty()) {
    const Trainer::Progress& last = trainer.history().back();
    summary["updates"] = last.update_index;
    summary["steps"] = last.steps_done;
    summary["episodes"] = last.episodes_total;
    summary["smoothed_reward"] = last.smoothed_reward;
    summary["smoothed_success"] = last.smoothed_success;
    summary["d_h"] = last.d_h;
  }
  std::ofstream(out_dir + "/final_summary.json") << summary.dump(2) << "\n";
}

TaskSpec resolve_task(const std::string& task_ref) {
  if (task_ref.size() == 1 && task_ref[0] >= '1' && task_ref[0] <= '4')
    return load_task(task_ref[0] - '0');
  if (fs::exists(task_ref)) return load_task_file(task_ref);
  throw ConfigError("unknown task '" + task_ref + "' (expected 1..4 or a task file)");
}

std::string run_eval_command(const AppConfig& cfg, const std::string& method,
                             const std::string& task_ref, int n_runs, uint64_t seed,
                             const std::string& out_csv) {
  TaskSpec task = resolve_task(task_ref);
  MethodSpec spec;
  if (method == "baseline") {
    spec.kind = MethodSpec::kBaseline;
  } else {
    if (!fs::exists(method)) throw IoError("eval: checkpoint '" + method + "' not found");
    spec.kind = MethodSpec::kAgent;
    spec.checkpoint = method;
  }
  std::vector<MetricsRow> rows = run_eval(spec, task, n_runs, seed, cfg, out_csv);
  std::vector<SummaryRow> summary = summarize(rows);
  if (!out_csv.empty()) write_summary_csv(summary, out_csv + ".summary.csv");
  return summary_table(summary);
}

void run_plan_command(const AppConfig& cfg, const std::string& task_ref, uint64_t seed,
                      const std::string& out_json) {
  TaskSpec task = resolve_task(task_ref);
  Rng rng(Rng::mix(seed, static_cast<uint64_t>(task.id)));
  RobotState start = Env::sample_spawn_pose(task.world, cfg.robot, rng);
  Vec2 goal = Env::sample_goal(task.world, rng);
  Rng ik_rng(Rng::mix(seed, 0x1C));
  std::vector<Config5D> goals = ik_goal_configs(task.world, cfg.robot, goal, cfg.eval.ik_tolerance,
                                                cfg.eval.n_goal_configs, ik_rng);
  if (goals.empty()) throw PlanningFailed("plan: no reachable goal configurations");
  PlannerParams pp = cfg.planner;
  pp.seed = Rng::mix(seed, 0x2D);
  PlanResult plan =
      plan_rrt_connect(task.world, cfg.robot, {start.x, start.y, start.theta, 0.0, 0.0}, goals, pp);
  TimedTrajectory traj = time_parameterize(plan.path, cfg.robot);

  json j;
  j["task"] = task.id;
  j["seed"] = seed;
  j["goal"] = {goal.x, goal.y};
  j["planning_time_s"] = plan.planning_time_s;
  j["attempts_used"] = plan.attempts_used;
  j["duration_s"] = traj.duration();
  json waypoints = json::array();
  for (const Config5D& q : plan.path)
    waypoints.push_back({q.x, q.y, q.theta, q.phi1, q.phi2});
  j["waypoints"] = std::move(waypoints);
  json times = json::array();
  for (const auto& seg : traj.segments()) times.push_back(seg.t_start);
  times.push_back(traj.duration());
  j["waypoint_times_s"] = std::move(times);
  std::ofstream out(out_json, std::ios::trunc);
  if (!out) throw IoError("plan: cannot open '" + out_json + "'");
  out << j.dump(2) << "\n";
}

int run_replay(const AppConfig& cfg, const std::string& trace_path, const std::string& out_dir) {
  EpisodeTrace trace = read_trace_jsonl(trace_path);
  return render_trace_frames(trace, cfg.robot, cfg.lidar_front, cfg.lidar_rear, out_dir);
}

BenchResult run_bench(const AppConfig& cfg, const std::string& checkpoint, int n_iters) {
  PolicyParams params = load_policy(checkpoint, cfg.network_spec());
  PolicyWorkspace ws(params.spec);
  const int obs_dim = params.spec.obs_dim();

  // A pool of synthetic observations shaped like normalized env output.
  Rng rng(0x6e);
  const int pool = 256;
  std::vector<float> obs(static_cast<size_t>(pool) * obs_dim);
  for (int i = 0; i < pool; ++i) {
    float* o = obs.data() + static_cast<size_t>(i) * obs_dim;
    for (int b = 0; b < 2 * params.spec.n_beams; ++b) o[b] = static_cast<float>(rng.uniform(0.05, 1.0));
    for (int k = 2 * params.spec.n_beams; k < obs_dim; ++k)
      o[k] = static_cast<float>(rng.uniform(-1.0, 1.0));
  }

  std::vector<float> logits(params.spec.logits_dim());
  float value = 0.0f;
  // Warm-up pass so the timed loop is allocation-free.
  for (int i = 0; i < 16; ++i)
    forward(params, std::span(obs.data() + (i % pool) * obs_dim, obs_dim), ws, logits.data(),
            &value);

  std::vector<double> lat(n_iters);
  volatile int sink = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < n_iters; ++i) {
    const auto a = std::chrono::steady_clock::now();
    forward(params, std::span(obs.data() + (i % pool) * obs_dim, obs_dim), ws, logits.data(),
            &value);
    Action act = argmax_action(logits);
    sink += act[0];
    lat[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - a).count();
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  BenchResult r;
  r.iterations = n_iters;
  r.hz = n_iters / total;
  double sum = 0.0;
  for (double v : lat) sum += v;
  r.mean_latency_ms = sum / n_iters;
  std::sort(lat.begin(), lat.end());
  r.p99_latency_ms = lat[static_cast<size_t>(std::min<double>(n_iters - 1, 0.99 * n_iters))];
  return r;
}

}  // namespace wbc
