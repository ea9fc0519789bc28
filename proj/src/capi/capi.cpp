#include "wbc/wbc_c.h"

#include <cstring>
#include <string>

#include "wbc/config.hpp"
#include "wbc/env.hpp"
#include "wbc/errors.hpp"
#include "wbc/policy.hpp"
#include "wbc/runner.hpp"
#include "wbc/world.hpp"

namespace {

thread_local std::string g_last_error;

const char* opt(const char* s) { return s ? s : ""; }

wbc_status classify(const std::exception& e) {
  if (dynamic_cast<const wbc::ConfigError*>(&e)) return WBC_ERR_INVALID_ARG;
  if (dynamic_cast<const wbc::IoError*>(&e)) return WBC_ERR_IO;
  if (dynamic_cast<const wbc::ChecksumError*>(&e)) return WBC_ERR_IO;
  if (dynamic_cast<const wbc::ParamsCorrupt*>(&e)) return WBC_ERR_IO;
  return WBC_ERR_RUNTIME;
}

template <typename Fn>
wbc_status guarded(Fn&& fn) {
  try {
    fn();
    return WBC_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return classify(e);
  } catch (...) {
    g_last_error = "unknown error";
    return WBC_ERR_RUNTIME;
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

wbc::AppConfig load(const char* config_path, const char* overrides_json) {
  return wbc::load_config(opt(config_path), opt(overrides_json));
}

}  // namespace

struct wbc_env {
  wbc::AppConfig cfg;
  wbc::Env env;
};

struct wbc_policy {
  wbc::PolicyParams params;
  wbc::PolicyWorkspace ws;
};

struct wbc_world {
  wbc::WorldModel world;
};

extern "C" {

const char* wbc_version(void) { return "1.0.0"; }

const char* wbc_last_error(void) { return g_last_error.c_str(); }

const char* wbc_config_help(void) {
  static const std::string help = wbc::config_help();
  return help.c_str();
}

void wbc_string_free(char* s) { delete[] s; }

wbc_status wbc_train(const char* config_path, const char* overrides_json, const char* out_dir,
                     const char* resume_dir) {
  return guarded([&] {
    if (!out_dir) throw wbc::ConfigError("train: out_dir is required");
    wbc::AppConfig cfg = load(config_path, overrides_json);
    wbc::run_train(cfg, out_dir, resume_dir != nullptr);
  });
}

wbc_status wbc_eval(const char* config_path, const char* overrides_json, const char* method,
                    const char* task_ref, int n_runs, uint64_t seed, const char* out_csv,
                    char** summary_out) {
  return guarded([&] {
    if (!method || !task_ref) throw wbc::ConfigError("eval: method and task are required");
    wbc::AppConfig cfg = load(config_path, overrides_json);
    std::string summary =
        wbc::run_eval_command(cfg, method, task_ref, n_runs, seed, opt(out_csv));
    if (summary_out) *summary_out = dup_string(summary);
  });
}

wbc_status wbc_plan(const char* config_path, const char* overrides_json, const char* task_ref,
                    uint64_t seed, const char* out_json) {
  return guarded([&] {
    if (!task_ref || !out_json) throw wbc::ConfigError("plan: task and output path are required");
    wbc::AppConfig cfg = load(config_path, overrides_json);
    wbc::run_plan_command(cfg, task_ref, seed, out_json);
  });
}

wbc_status wbc_replay(const char* config_path, const char* trace_path, const char* out_dir,
                      int* n_frames_out) {
  return guarded([&] {
    if (!trace_path || !out_dir) throw wbc::ConfigError("replay: trace and out_dir are required");
    wbc::AppConfig cfg = load(config_path, nullptr);
    int frames = wbc::run_replay(cfg, trace_path, out_dir);
    if (n_frames_out) *n_frames_out = frames;
  });
}

wbc_status wbc_bench_inference(const char* config_path, const char* checkpoint, int n_iters,
                               double* hz_out, double* mean_ms_out, double* p99_ms_out) {
  return guarded([&] {
    if (!checkpoint) throw wbc::ConfigError("bench: checkpoint is required");
    if (n_iters < 1) throw wbc::ConfigError("bench: n_iters must be >= 1");
    wbc::AppConfig cfg = load(config_path, nullptr);
    wbc::BenchResult r = wbc::run_bench(cfg, checkpoint, n_iters);
    if (hz_out) *hz_out = r.hz;
    if (mean_ms_out) *mean_ms_out = r.mean_latency_ms;
    if (p99_ms_out) *p99_ms_out = r.p99_latency_ms;
  });
}

wbc_status wbc_env_create(const char* config_path, const char* overrides_json, wbc_env** out) {
  return guarded([&] {
    if (!out) throw wbc::ConfigError("env_create: out is null");
    wbc::AppConfig cfg = load(config_path, overrides_json);
    *out = new wbc_env{cfg, wbc::make_env(cfg)};
  });
}

void wbc_env_destroy(wbc_env* env) { delete env; }

int wbc_env_obs_size(const wbc_env* env) { return env ? env->env.obs_size() : 0; }

wbc_status wbc_env_set_tolerance(wbc_env* env, double d_h) {
  return guarded([&] {
    if (!env || d_h <= 0.0) throw wbc::ConfigError("set_tolerance: bad arguments");
    env->env.set_tolerance(d_h);
  });
}

wbc_status wbc_env_reset(wbc_env* env, uint64_t seed, float* obs_out) {
  return guarded([&] {
    if (!env) throw wbc::ConfigError("env_reset: env is null");
    std::span<const float> obs = env->env.reset(seed);
    if (obs_out) std::memcpy(obs_out, obs.data(), obs.size() * sizeof(float));
  });
}

wbc_status wbc_env_step(wbc_env* env, const int action[5], float* obs_out, double* reward_out,
                        int* done_out, int* outcome_out) {
  return guarded([&] {
    if (!env || !action) throw wbc::ConfigError("env_step: bad arguments");
    wbc::Action a;
    for (int i = 0; i < 5; ++i) {
      if (action[i] < 0 || action[i] > 4)
        throw wbc::ConfigError("env_step: action indices must be in 0..4");
      a[i] = action[i];
    }
    wbc::StepOutput step = env->env.step(a);
    std::span<const float> obs = env->env.observation();
    if (obs_out) std::memcpy(obs_out, obs.data(), obs.size() * sizeof(float));
    if (reward_out) *reward_out = step.reward;
    if (done_out) *done_out = step.done ? 1 : 0;
    if (outcome_out) *outcome_out = static_cast<int>(step.outcome);
  });
}

wbc_status wbc_world_generate(const char* config_path, const char* overrides_json, uint64_t seed,
                              wbc_world** out) {
  return guarded([&] {
    if (!out) throw wbc::ConfigError("world_generate: out is null");
    wbc::AppConfig cfg = load(config_path, overrides_json);
    *out = new wbc_world{wbc::generate_world(cfg.scenario, seed)};
  });
}

wbc_status wbc_world_from_json(const char* json_text, wbc_world** out) {
  return guarded([&] {
    if (!json_text || !out) throw wbc::ConfigError("world_from_json: bad arguments");
    *out = new wbc_world{wbc::world_from_json(json_text)};
  });
}

wbc_status wbc_world_to_json(const wbc_world* world, char** json_out) {
  return guarded([&] {
    if (!world || !json_out) throw wbc::ConfigError("world_to_json: bad arguments");
    *json_out = dup_string(wbc::world_to_json(world->world));
  });
}

void wbc_world_destroy(wbc_world* world) { delete world; }

wbc_status wbc_world_raycast(const wbc_world* world, double ox, double oy, double dx, double dy,
                             double max_range, double* distance_out) {
  return guarded([&] {
    if (!world || !distance_out) throw wbc::ConfigError("raycast: bad arguments");
    double n = std::hypot(dx, dy);
    if (n <= 0.0 || max_range <= 0.0)
      throw wbc::ConfigError("raycast: direction must be nonzero and max_range > 0");
    *distance_out =
        wbc::raycast(world->world, {ox, oy}, {dx / n, dy / n}, max_range);
  });
}

wbc_status wbc_policy_init_random(const char* config_path, const char* overrides_json,
                                  uint64_t seed, wbc_policy** out) {
  return guarded([&] {
    if (!out) throw wbc::ConfigError("policy_init: out is null");
    wbc::AppConfig cfg = load(config_path, overrides_json);
    wbc::PolicyParams params = wbc::init_policy(cfg.network_spec(), seed);
    *out = new wbc_policy{std::move(params), wbc::PolicyWorkspace(cfg.network_spec())};
  });
}

wbc_status wbc_policy_load(const char* config_path, const char* overrides_json,
                           const char* checkpoint, wbc_policy** out) {
  return guarded([&] {
    if (!checkpoint || !out) throw wbc::ConfigError("policy_load: bad arguments");
    wbc::AppConfig cfg = load(config_path, overrides_json);
    wbc::PolicyParams params = wbc::load_policy(checkpoint, cfg.network_spec());
    wbc::NetworkSpec spec = params.spec;
    *out = new wbc_policy{std::move(params), wbc::PolicyWorkspace(spec)};
  });
}

wbc_status wbc_policy_save(const wbc_policy* policy, const char* path) {
  return guarded([&] {
    if (!policy || !path) throw wbc::ConfigError("policy_save: bad arguments");
    wbc::save_policy(policy->params, path);
  });
}

void wbc_policy_destroy(wbc_policy* policy) { delete policy; }

int wbc_policy_obs_size(const wbc_policy* policy) {
  return policy ? policy->params.spec.obs_dim() : 0;
}

wbc_status wbc_policy_forward(wbc_policy* policy, const float* obs, int obs_len, float* logits_out,
                              float* value_out) {
  return guarded([&] {
    if (!policy || !obs) throw wbc::ConfigError("policy_forward: bad arguments");
    wbc::forward(policy->params, std::span(obs, obs_len), policy->ws, logits_out, value_out);
  });
}

wbc_status wbc_policy_argmax(const float* logits25, int action_out[5]) {
  return guarded([&] {
    if (!logits25 || !action_out) throw wbc::ConfigError("policy_argmax: bad arguments");
    wbc::Action a = wbc::argmax_action(std::span(logits25, 25));
    for (int i = 0; i < 5; ++i) action_out[i] = a[i];
  });
}

}  // extern "C"
