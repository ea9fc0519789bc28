#include "wbc/evalharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wbc/baseline.hpp"
#include "wbc/errors.hpp"
#include "wbc/log.hpp"
#include "wbc/trace.hpp"

#ifndef WBC_DEFAULT_ASSET_DIR
#define WBC_DEFAULT_ASSET_DIR "assets"
#endif

namespace wbc {

using nlohmann::json;

std::string asset_dir() {
  if (const char* env = std::getenv("WBC_ASSET_DIR")) return env;
  return WBC_DEFAULT_ASSET_DIR;
}

TaskSpec load_task_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("eval: cannot open task file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("eval: task parse error: ") + e.what());
  }
  TaskSpec task;
  task.id = j.value("task", 0);
  task.tolerance = j.value("tolerance", 0.07);
  task.exec_timeout_s = j.value("timeout_s", 180.0);
  task.world = world_from_json(j.at("world").dump());
  return task;
}

TaskSpec load_task(int id) {
  if (id < 1 || id > 4) throw ConfigError("eval: task id must be 1..4");
  return load_task_file(asset_dir() + "/tasks/task" + std::to_string(id) + ".json");
}

namespace {

struct PairSample {
  RobotState start;
  Vec2 goal;
};

PairSample draw_pair(const TaskSpec& task, const RobotParams& robot, uint64_t pair_seed) {
  Rng rng(pair_seed);
  PairSample p;
  p.start = Env::sample_spawn_pose(task.world, robot, rng);
  p.goal = Env::sample_goal(task.world, rng);
  return p;
}

void append_row_csv(const MetricsRow& row, const std::string& path) {
  if (path.empty()) return;
  bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (fresh)
    out << "method,task,total_time,base_distance,joint_distance,planning_time,execution_time,"
           "success,seed\n";
  out << row.method << "," << row.task << "," << row.total_time << "," << row.base_distance << ","
      << row.joint_distance << "," << row.planning_time << "," << row.execution_time << ","
      << (row.success ? 1 : 0) << "," << row.seed << "\n";
  out.flush();
}

Config5D state_to_config(const RobotState& s) {
  return {s.x, s.y, s.theta, s.phi[0], s.phi[1]};
}

}  // namespace

std::vector<MetricsRow> run_eval_traced(const MethodSpec& method, const TaskSpec& task, int n_runs,
                                        uint64_t seed, const AppConfig& cfg,
                                        const std::string& out_csv, const std::string& trace_dir) {
  std::vector<MetricsRow> rows;
  std::optional<PolicyParams> params;
  std::optional<PolicyWorkspace> ws;
  if (method.kind == MethodSpec::kAgent) {
    params = load_policy(method.checkpoint, cfg.network_spec());
    ws.emplace(params->spec);
  }
  if (!trace_dir.empty()) std::filesystem::create_directories(trace_dir);

  Env env = make_env(cfg);
  env.set_tolerance(task.tolerance);
  env.set_max_steps(static_cast<int>(std::round(task.exec_timeout_s / cfg.robot.control_period)));

  for (int run = 0; run < n_runs; ++run) {
    const uint64_t pair_seed = Rng::mix(seed, static_cast<uint64_t>(task.id),
                                        static_cast<uint64_t>(run));
    MetricsRow row;
    row.method = method.name();
    row.task = task.id;
    row.seed = pair_seed;
    try {
      PairSample pair = draw_pair(task, cfg.robot, pair_seed);
      env.set_record_trace(!trace_dir.empty());

      if (method.kind == MethodSpec::kAgent) {
        env.reset_fixed(task.world, pair.start, pair.goal, Rng::mix(pair_seed, 0xA6));
        std::vector<float> logits(params->spec.logits_dim());
        while (!env.done()) {
          forward(*params, env.observation(), *ws, logits.data(), nullptr);
          env.step(argmax_action(logits));
        }
        const EpisodeResult& res = env.result();
        row.execution_time = res.steps * cfg.robot.control_period;
        row.planning_time = 0.0;
        row.base_distance = res.base_distance;
        row.joint_distance = res.joint_distance;
        row.success = res.outcome == Outcome::kHoldSuccess;
      } else {
        const auto t0 = std::chrono::steady_clock::now();
        Rng ik_rng(Rng::mix(pair_seed, 0x1C));
        std::vector<Config5D> goals = ik_goal_configs(
            task.world, cfg.robot, pair.goal, cfg.eval.ik_tolerance, cfg.eval.n_goal_configs,
            ik_rng);
        if (goals.empty()) throw PlanningFailed("eval: no reachable goal configurations");
        PlannerParams pp = cfg.planner;
        pp.seed = Rng::mix(pair_seed, 0x2D);
        PlanResult plan = plan_rrt_connect(task.world, cfg.robot, state_to_config(pair.start),
                                           goals, pp);
        row.planning_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        TimedTrajectory traj = time_parameterize(plan.path, cfg.robot);
        env.reset_fixed(task.world, pair.start, pair.goal, Rng::mix(pair_seed, 0xB7));
        EpisodeResult res = execute(traj, env);
        row.execution_time = res.steps * cfg.robot.control_period;
        row.base_distance = res.base_distance;
        row.joint_distance = res.joint_distance;
        row.success = res.outcome == Outcome::kHoldSuccess;
      }
      if (!trace_dir.empty() && !env.trace().steps.empty()) {
        write_trace_jsonl(env.trace(),
                          trace_dir + "/" + method.name() + "_run_" + std::to_string(run) + ".jsonl");
      }
    } catch (const std::exception& e) {
      // Failed runs still produce a row; the sweep continues.
      WBC_LOG_WARN("eval: %s task %d run %d failed: %s", method.name().c_str(), task.id, run,
                   e.what());
      row.success = false;
      if (method.kind == MethodSpec::kBaseline && row.planning_time == 0.0)
        row.planning_time = cfg.planner.time_budget_s;
    }
    row.total_time = row.planning_time + row.execution_time;
    rows.push_back(row);
    append_row_csv(row, out_csv);
  }
  return rows;
}

std::vector<MetricsRow> run_eval(const MethodSpec& method, const TaskSpec& task, int n_runs,
                                 uint64_t seed, const AppConfig& cfg, const std::string& out_csv) {
  return run_eval_traced(method, task, n_runs, seed, cfg, out_csv, "");
}

namespace {

struct Moments {
  double mean = 0.0, std_dev = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= xs.size();
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - m.mean) * (x - m.mean);
    m.std_dev = std::sqrt(acc / (xs.size() - 1));
  }
  return m;
}

}  // namespace

std::vector<SummaryRow> summarize(std::span<const MetricsRow> rows) {
  std::vector<SummaryRow> out;
  for (const MetricsRow& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
      return s.method == row.method && s.task == row.task;
    });
    if (it == out.end()) {
      out.push_back(SummaryRow{row.method, row.task});
      it = out.end() - 1;
    }
    ++it->runs;
  }
  for (SummaryRow& s : out) {
    std::vector<double> total, base, joint, plan, exec;
    int successes = 0;
    for (const MetricsRow& row : rows) {
      if (row.method != s.method || row.task != s.task) continue;
      if (row.success) {
        ++successes;
        total.push_back(row.total_time);
        base.push_back(row.base_distance);
        joint.push_back(row.joint_distance);
        plan.push_back(row.planning_time);
        exec.push_back(row.execution_time);
      }
    }
    s.success_rate = s.runs > 0 ? static_cast<double>(successes) / s.runs : 0.0;
    Moments m;
    m = moments(total); s.total_time_mean = m.mean; s.total_time_std = m.std_dev;
    m = moments(base); s.base_distance_mean = m.mean; s.base_distance_std = m.std_dev;
    m = moments(joint); s.joint_distance_mean = m.mean; s.joint_distance_std = m.std_dev;
    m = moments(plan); s.planning_time_mean = m.mean; s.planning_time_std = m.std_dev;
    m = moments(exec); s.execution_time_mean = m.mean; s.execution_time_std = m.std_dev;
  }
  return out;
}

void write_rows_csv(std::span<const MetricsRow> rows, const std::string& path) {
  std::filesystem::remove(path);
  for (const MetricsRow& row : rows) append_row_csv(row, path);
}

std::vector<MetricsRow> read_rows_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("eval: cannot open csv '" + path + "'");
  std::vector<MetricsRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) continue;
    MetricsRow row;
    row.method = cells[0];
    row.task = std::atoi(cells[1].c_str());
    row.total_time = std::atof(cells[2].c_str());
    row.base_distance = std::atof(cells[3].c_str());
    row.joint_distance = std::atof(cells[4].c_str());
    row.planning_time = std::atof(cells[5].c_str());
    row.execution_time = std::atof(cells[6].c_str());
    row.success = cells[7] == "1";
    row.seed = std::strtoull(cells[8].c_str(), nullptr, 10);
    rows.push_back(row);
  }
  return rows;
}

void write_summary_csv(std::span<const SummaryRow> rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("eval: cannot open summary csv '" + path + "'");
  // Time/distance statistics cover successful runs only; the success rate
  // covers all runs.
  out << "method,task,runs,success_rate,total_time_mean,total_time_std,base_distance_mean,"
         "base_distance_std,joint_distance_mean,joint_distance_std,planning_time_mean,"
         "planning_time_std,execution_time_mean,execution_time_std\n";
  for (const SummaryRow& s : rows) {
    out << s.method << "," << s.task << "," << s.runs << "," << s.success_rate << ","
        << s.total_time_mean << "," << s.total_time_std << "," << s.base_distance_mean << ","
        << s.base_distance_std << "," << s.joint_distance_mean << "," << s.joint_distance_std
        << "," << s.planning_time_mean << "," << s.planning_time_std << ","
        << s.execution_time_mean << "," << s.execution_time_std << "\n";
  }
}

std::string summary_table(std::span<const SummaryRow> rows) {
  std::stringstream out;
  out << "method       task  runs  success  total[s]        base[m]        joint[rad]     "
         "plan[s]        exec[s]\n";
  for (const SummaryRow& s : rows) {
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-12s %4d  %4d  %6.2f  %7.2f (%5.2f) %6.2f (%4.2f) %6.2f (%5.2f) %6.2f (%5.2f) "
                  "%7.2f (%5.2f)\n",
                  s.method.c_str(), s.task, s.runs, s.success_rate, s.total_time_mean,
                  s.total_time_std, s.base_distance_mean, s.base_distance_std,
                  s.joint_distance_mean, s.joint_distance_std, s.planning_time_mean,
                  s.planning_time_std, s.execution_time_mean, s.execution_time_std);
    out << line;
  }
  return out.str();
}

std::pair<double, double> base_joint_distances(const EpisodeTrace& trace) {
  double base = 0.0, joint = 0.0;
  const RobotState* prev = &trace.initial_state;
  for (const TraceStep& s : trace.steps) {
    base += std::hypot(s.state.x - prev->x, s.state.y - prev->y);
    joint += std::abs(s.state.phi[0] - prev->phi[0]) + std::abs(s.state.phi[1] - prev->phi[1]);
    prev = &s.state;
  }
  return {base, joint};
}

}  // namespace wbc
