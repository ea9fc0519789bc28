#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wbc/config.hpp"
#include "wbc/env.hpp"
#include "wbc/policy.hpp"

namespace wbc {

struct TaskSpec {
  int id = 0;
  WorldModel world;
  double tolerance = 0.07;      // m
  double exec_timeout_s = 180.0;
};

TaskSpec load_task_file(const std::string& path);
// Resolves "task<N>.json" under WBC_ASSET_DIR (or the compiled-in default).
TaskSpec load_task(int id);
std::string asset_dir();

struct MetricsRow {
  std::string method;
  int task = 0;
  double total_time = 0.0;      // s, planning + execution
  double base_distance = 0.0;   // m
  double joint_distance = 0.0;  // rad
  double planning_time = 0.0;   // s (0 for the agent)
  double execution_time = 0.0;  // s
  bool success = false;
  uint64_t seed = 0;
};

struct MethodSpec {
  enum Kind { kAgent, kBaseline } kind = kBaseline;
  std::string checkpoint;  // agent only

  std::string name() const { return kind == kAgent ? "rl_agent" : "rrt_connect"; }
};

// Per run: a (start, goal) pair is drawn from (task, seed, run) before any
// method-specific randomness, so both methods face identical pairs. Rows are
// appended to out_csv as they complete; per-run failures never abort the
// sweep.
std::vector<MetricsRow> run_eval(const MethodSpec& method, const TaskSpec& task, int n_runs,
                                 uint64_t seed, const AppConfig& cfg, const std::string& out_csv);

// Optionally records the trace of each run into <trace_dir>/run_<i>.jsonl.
std::vector<MetricsRow> run_eval_traced(const MethodSpec& method, const TaskSpec& task, int n_runs,
                                        uint64_t seed, const AppConfig& cfg,
                                        const std::string& out_csv, const std::string& trace_dir);

struct SummaryRow {
  std::string method;
  int task = 0;
  int runs = 0;
  double success_rate = 0.0;
  // Means and sample standard deviations over successful runs only.
  double total_time_mean = 0.0, total_time_std = 0.0;
  double base_distance_mean = 0.0, base_distance_std = 0.0;
  double joint_distance_mean = 0.0, joint_distance_std = 0.0;
  double planning_time_mean = 0.0, planning_time_std = 0.0;
  double execution_time_mean = 0.0, execution_time_std = 0.0;
};

std::vector<SummaryRow> summarize(std::span<const MetricsRow> rows);

void write_rows_csv(std::span<const MetricsRow> rows, const std::string& path);
std::vector<MetricsRow> read_rows_csv(const std::string& path);
void write_summary_csv(std::span<const SummaryRow> rows, const std::string& path);
std::string summary_table(std::span<const SummaryRow> rows);

// Base distance = sum of per-step base displacements; joint distance = sum of
// per-step |delta phi| over both joints.
std::pair<double, double> base_joint_distances(const EpisodeTrace& trace);

}  // namespace wbc
