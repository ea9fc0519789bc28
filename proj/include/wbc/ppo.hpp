#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wbc/env.hpp"
#include "wbc/policy.hpp"

namespace wbc {

struct TrainConfig {
  int n_workers = 4;
  int n_steps = 2048;
  int nminibatches = 8;
  int noptepochs = 30;
  double cliprange = 0.2;
  double ent_coeff = 0.00376;
  double gamma = 0.999;
  double lam = 0.8;
  double lr_init = 1e-3;
  double lr_final = 0.15e-3;
  int64_t total_steps = 3'000'000;
  double value_coeff = 0.5;
  double max_grad_norm = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-5;
  int checkpoint_every = 20;  // updates
  int update_threads = 1;

  void validate() const;  // throws ConfigError
  int batch_size() const { return n_workers * n_steps; }
  int minibatch_size() const { return batch_size() / nminibatches; }
};

// Rectangular (worker, step) transition store for one rollout phase.
struct RolloutBuffer {
  int n_workers = 0, n_steps = 0, obs_dim = 0;
  std::vector<float> obs;
  std::vector<Action> actions;
  std::vector<double> logprobs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<uint8_t> dones;
  std::vector<double> bootstrap;  // per worker, value after the last step
  // Episodes completed during the phase, in (worker, completion) order.
  std::vector<std::pair<int, EpisodeResult>> episodes;

  RolloutBuffer() = default;
  RolloutBuffer(int workers, int steps, int obs_dim);
  int flat(int w, int t) const { return w * n_steps + t; }
  int size() const { return n_workers * n_steps; }
};

// delta_t = r_t + gamma*(1-done_t)*V_{t+1} - V_t;
// A_t = delta_t + gamma*lam*(1-done_t)*A_{t+1}; returns = A + V.
void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const uint8_t> dones, double bootstrap_value, double gamma, double lam,
                 std::span<double> advantages, std::span<double> returns);

double lr_schedule(const TrainConfig& cfg, double progress);

// Each worker advances exactly n_steps on a shared parameter snapshot,
// resetting in place on episode end; worker rng streams are independent so
// the result is deterministic regardless of thread interleaving.
RolloutBuffer collect_rollouts(std::vector<std::unique_ptr<Env>>& envs, const PolicyParams& params,
                               const TrainConfig& cfg, std::span<Rng> worker_rngs, double d_h);

struct AdamState {
  PolicyParams m, v;
  int64_t t = 0;

  explicit AdamState(const PolicyParams& params);
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
  double lr = 0.0;
};

// noptepochs passes over nminibatches shuffled minibatches of the clipped
// surrogate + value MSE - entropy bonus, Adam steps with the scheduled lr and
// global gradient-norm clipping. Advantages normalize per minibatch.
// Throws GradientError on a non-finite loss.
UpdateStats ppo_update(PolicyParams& params, AdamState& adam, const RolloutBuffer& buf,
                       const TrainConfig& cfg, double progress, Rng& shuffle_rng);

// Full training loop: alternating rollout/update phases, ADR aggregation at
// phase boundaries, CSV logging, rolling checkpoints, resume.
class Trainer {
 public:
  struct Progress {
    int update_index = 0;
    int64_t steps_done = 0;
    int episodes_total = 0;
    double mean_episode_reward = 0.0;
    double smoothed_reward = 0.0;
    double success_rate = 0.0;
    double smoothed_success = 0.0;
    double d_h = 0.0;
    UpdateStats stats;
  };
  using StopFn = std::function<bool(const Progress&)>;

  Trainer(std::vector<std::unique_ptr<Env>> envs, const NetworkSpec& spec, TrainConfig cfg,
          AdrConfig adr, std::string out_dir, uint64_t seed);

  // Loads policy/optimizer/trainer state written by a previous run.
  void resume(const std::string& out_dir);

  // Runs until total_steps or until stop(progress) returns true.
  void run(const StopFn& stop = nullptr);

  const PolicyParams& policy() const { return params_; }
  const std::vector<Progress>& history() const { return history_; }
  double current_tolerance() const { return adr_.tolerance(); }
  std::string checkpoint_path() const;
  std::string log_path() const;

  static constexpr double kRewardEmaAlpha = 0.05;
  static constexpr double kSuccessEmaAlpha = 0.05;

 private:
  void save_state() const;
  void append_log(const Progress& p);

  std::vector<std::unique_ptr<Env>> envs_;
  TrainConfig cfg_;
  std::string out_dir_;
  uint64_t seed_;
  PolicyParams params_;
  AdamState adam_;
  AdrState adr_;
  int64_t steps_done_ = 0;
  int update_index_ = 0;
  int episodes_total_ = 0;
  double smoothed_reward_ = 0.0;
  double smoothed_success_ = 0.0;
  bool ema_init_ = false;
  std::vector<Progress> history_;
};

}  // namespace wbc
