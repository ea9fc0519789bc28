// Command-line front end; talks to the library exclusively through the C API.
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wbc/wbc_c.h"

namespace {

int status_to_exit(wbc_status s) {
  if (s == WBC_OK) return 0;
  std::fprintf(stderr, "error: %s\n", wbc_last_error());
  return s == WBC_ERR_INVALID_ARG ? 1 : 2;
}

const char* opt_cstr(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whole-body control: randomized corridor simulator, PPO training with ADR, "
               "RRT-Connect baseline and evaluation harness."};
  app.footer(std::string("Config keys:\n") + wbc_config_help());
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "JSON config file (all keys optional)")
      ->envname("WBC_CONFIG");
  app.add_option("--seed", seed, "master seed (overrides config)")->each([&](const std::string&) {
    seed_set = true;
  });

  // train
  auto* train = app.add_subcommand("train", "run PPO training");
  std::string train_out = "runs/train";
  std::string resume_dir;
  int workers = -1;
  int64_t total_steps = -1;
  train->add_option("--out", train_out, "output directory (checkpoints, train_log.csv, plots)");
  train->add_option("--workers", workers, "parallel rollout workers");
  train->add_option("--total-steps", total_steps, "environment steps to train for");
  train->add_flag_callback("--resume", [&] { resume_dir = "set"; },
                           "resume from trainer state in --out");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or the baseline on a task");
  std::string method, task = "1", eval_csv = "eval_metrics.csv";
  int n_runs = 10;
  eval->add_option("method", method, "'baseline' or a checkpoint path")->required();
  eval->add_option("--task", task, "task id 1..4 or a task JSON file");
  eval->add_option("--runs", n_runs, "runs per task");
  eval->add_option("--out", eval_csv, "metrics CSV (appended incrementally)");

  // plan
  auto* plan = app.add_subcommand("plan", "plan one RRT-Connect query on a task");
  std::string plan_task = "1", plan_out = "plan.json";
  plan->add_option("--task", plan_task, "task id 1..4 or a task JSON file");
  plan->add_option("--out", plan_out, "plan JSON output");

  // replay
  auto* replay = app.add_subcommand("replay", "render an episode trace to image frames");
  std::string trace_path, replay_out = "frames";
  replay->add_option("trace", trace_path, "episode trace (.jsonl)")->required();
  replay->add_option("--out", replay_out, "output directory for PPM frames");

  // bench-inference
  auto* bench = app.add_subcommand("bench-inference", "time forward+argmax on one thread");
  std::string bench_ckpt;
  int n_iters = 10000;
  bench->add_option("checkpoint", bench_ckpt, "policy checkpoint")->required();
  bench->add_option("--iters", n_iters, "iterations");

  CLI11_PARSE(app, argc, argv);

  nlohmann::json overrides;
  if (seed_set) overrides["seed"] = seed;

  if (train->parsed()) {
    if (workers > 0) overrides["ppo"]["n_workers"] = workers;
    if (total_steps > 0) overrides["ppo"]["total_steps"] = total_steps;
    std::string ov = overrides.empty() ? "" : overrides.dump();
    return status_to_exit(wbc_train(opt_cstr(config_path), opt_cstr(ov), train_out.c_str(),
                                    resume_dir.empty() ? nullptr : train_out.c_str()));
  }
  if (eval->parsed()) {
    std::string ov = overrides.empty() ? "" : overrides.dump();
    char* summary = nullptr;
    wbc_status s = wbc_eval(opt_cstr(config_path), opt_cstr(ov), method.c_str(), task.c_str(),
                            n_runs, seed, eval_csv.c_str(), &summary);
    if (s == WBC_OK && summary) {
      std::printf("%s", summary);
      wbc_string_free(summary);
    }
    return status_to_exit(s);
  }
  if (plan->parsed()) {
    std::string ov = overrides.empty() ? "" : overrides.dump();
    wbc_status s =
        wbc_plan(opt_cstr(config_path), opt_cstr(ov), plan_task.c_str(), seed, plan_out.c_str());
    if (s == WBC_OK) std::printf("plan written to %s\n", plan_out.c_str());
    return status_to_exit(s);
  }
  if (replay->parsed()) {
    int frames = 0;
    wbc_status s =
        wbc_replay(opt_cstr(config_path), trace_path.c_str(), replay_out.c_str(), &frames);
    if (s == WBC_OK) std::printf("%d frames written to %s\n", frames, replay_out.c_str());
    return status_to_exit(s);
  }
  if (bench->parsed()) {
    double hz = 0.0, mean_ms = 0.0, p99_ms = 0.0;
    wbc_status s = wbc_bench_inference(opt_cstr(config_path), bench_ckpt.c_str(), n_iters, &hz,
                                       &mean_ms, &p99_ms);
    if (s == WBC_OK)
      std::printf("inference: %.1f Hz (mean %.4f ms, p99 %.4f ms, %d iters)\n", hz, mean_ms,
                  p99_ms, n_iters);
    return status_to_exit(s);
  }
  return 1;
}
