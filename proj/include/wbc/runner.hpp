#pragma once

#include <cstdint>
#include <string>

#include "wbc/config.hpp"
#include "wbc/evalharness.hpp"
#include "wbc/ppo.hpp"

namespace wbc {

// High-level entry points behind the C API and the CLI subcommands.

// Trains per cfg.ppo, writing checkpoints, train_log.csv, the Fig-style
// plots and final_summary.json into out_dir. Resumes from out_dir when
// `resume` is set and trainer state exists.
void run_train(const AppConfig& cfg, const std::string& out_dir, bool resume,
               const Trainer::StopFn& stop = nullptr);

// method = "baseline" or a checkpoint path. task_ref = "1".."4" or a task
// file path. Appends rows to out_csv and writes <out_csv>.summary.csv plus a
// printed table; returns the summary table text.
std::string run_eval_command(const AppConfig& cfg, const std::string& method,
                             const std::string& task_ref, int n_runs, uint64_t seed,
                             const std::string& out_csv);

// Plans one baseline query on the task and writes waypoints + timing JSON.
void run_plan_command(const AppConfig& cfg, const std::string& task_ref, uint64_t seed,
                      const std::string& out_json);

// Renders a JSONL trace to PPM frames; returns the frame count.
int run_replay(const AppConfig& cfg, const std::string& trace_path, const std::string& out_dir);

struct BenchResult {
  double hz = 0.0;
  double mean_latency_ms = 0.0;
  double p99_latency_ms = 0.0;
  int iterations = 0;
};

// Times forward + argmax on synthetic observations, single-threaded.
BenchResult run_bench(const AppConfig& cfg, const std::string& checkpoint, int n_iters);

TaskSpec resolve_task(const std::string& task_ref);

}  // namespace wbc
