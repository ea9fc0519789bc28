#include "wbc/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "wbc/errors.hpp"

namespace wbc {

void TrainConfig::validate() const {
  if (n_workers < 1 || n_steps < 1) throw ConfigError("ppo: n_workers and n_steps must be >= 1");
  if (nminibatches < 1 || batch_size() % nminibatches != 0)
    throw ConfigError("ppo: nminibatches must divide n_workers * n_steps");
  if (noptepochs < 1) throw ConfigError("ppo: noptepochs must be >= 1");
  if (cliprange <= 0.0) throw ConfigError("ppo: cliprange must be > 0");
  if (total_steps < batch_size()) throw ConfigError("ppo: total_steps below one batch");
  if (update_threads < 1) throw ConfigError("ppo: update_threads must be >= 1");
}

RolloutBuffer::RolloutBuffer(int workers, int steps, int dim)
    : n_workers(workers), n_steps(steps), obs_dim(dim) {
  size_t n = static_cast<size_t>(workers) * steps;
  obs.assign(n * dim, 0.0f);
  actions.assign(n, Action{});
  logprobs.assign(n, 0.0);
  values.assign(n, 0.0);
  rewards.assign(n, 0.0);
  dones.assign(n, 0);
  bootstrap.assign(workers, 0.0);
}

void compute_gae(std::span<const double> rewards, std::span<const double> values,
                 std::span<const uint8_t> dones, double bootstrap_value, double gamma, double lam,
                 std::span<double> advantages, std::span<double> returns) {
  const int n = static_cast<int>(rewards.size());
  double gae = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    double nonterminal = dones[t] ? 0.0 : 1.0;
    double next_value = (t == n - 1) ? bootstrap_value : values[t + 1];
    double delta = rewards[t] + gamma * nonterminal * next_value - values[t];
    gae = delta + gamma * lam * nonterminal * gae;
    advantages[t] = gae;
    returns[t] = gae + values[t];
  }
}

double lr_schedule(const TrainConfig& cfg, double progress) {
  progress = std::clamp(progress, 0.0, 1.0);
  return cfg.lr_init * (1.0 - progress) + cfg.lr_final * progress;
}

RolloutBuffer collect_rollouts(std::vector<std::unique_ptr<Env>>& envs, const PolicyParams& params,
                               const TrainConfig& cfg, std::span<Rng> worker_rngs, double d_h) {
  const int n_workers = static_cast<int>(envs.size());
  const int obs_dim = envs.empty() ? 0 : envs[0]->obs_size();
  RolloutBuffer buf(n_workers, cfg.n_steps, obs_dim);
  std::vector<std::vector<std::pair<int, EpisodeResult>>> worker_episodes(n_workers);
  std::vector<std::exception_ptr> errors(n_workers);

  auto run_worker = [&](int w) {
    try {
      Env& env = *envs[w];
      Rng& rng = worker_rngs[w];
      env.set_tolerance(d_h);
      if (env.done()) env.reset(rng.next_u64());
      PolicyWorkspace ws(params.spec);
      std::vector<float> logits(params.spec.logits_dim());
      for (int t = 0; t < cfg.n_steps; ++t) {
        const int i = buf.flat(w, t);
        std::span<const float> obs = env.observation();
        std::copy(obs.begin(), obs.end(), buf.obs.begin() + static_cast<size_t>(i) * obs_dim);
        float value = 0.0f;
        forward(params, obs, ws, logits.data(), &value);
        double logprob = 0.0;
        Action a = sample_action(logits, rng, &logprob);
        StepOutput out = env.step(a);
        buf.actions[i] = a;
        buf.logprobs[i] = logprob;
        buf.values[i] = value;
        buf.rewards[i] = out.reward;
        buf.dones[i] = out.done ? 1 : 0;
        if (out.done) {
          worker_episodes[w].emplace_back(w, env.result());
          env.reset(rng.next_u64());
        }
      }
      float value = 0.0f;
      forward(params, env.observation(), ws, logits.data(), &value);
      buf.bootstrap[w] = value;
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) threads.emplace_back(run_worker, w);
  for (auto& t : threads) t.join();
  for (int w = 0; w < n_workers; ++w) {
    if (errors[w]) std::rethrow_exception(errors[w]);
  }
  // Merge in worker order so downstream ADR updates are deterministic.
  for (int w = 0; w < n_workers; ++w)
    for (auto& e : worker_episodes[w]) buf.episodes.push_back(std::move(e));
  return buf;
}

AdamState::AdamState(const PolicyParams& params) : m(params), v(params) {
  for (auto& [name, t] : m.tensors) std::fill(t.data.begin(), t.data.end(), 0.0f);
  for (auto& [name, t] : v.tensors) std::fill(t.data.begin(), t.data.end(), 0.0f);
}

namespace {

struct MinibatchAccum {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_count = 0.0;
  double kl = 0.0;
};

// Loss gradient for one sample, scaled by 1/minibatch. Returns the sample's
// contribution to the running statistics.
MinibatchAccum sample_gradient(const PolicyParams& params, PolicyWorkspace& ws,
                               const RolloutBuffer& buf, int idx, double advantage, double ret,
                               const TrainConfig& cfg, double inv_minibatch,
                               PolicyGradients& grads, std::vector<float>& dlogits) {
  const NetworkSpec& spec = params.spec;
  std::span<const float> obs(buf.obs.data() + static_cast<size_t>(idx) * buf.obs_dim, buf.obs_dim);
  float value = 0.0f;
  forward(params, obs, ws, nullptr, &value);
  const float* logits = ws.logits.data();
  const Action& act = buf.actions[idx];

  double logprob_new = 0.0;
  double entropy = 0.0;
  double probs[25];
  double block_entropy[5];
  for (int b = 0; b < spec.n_blocks; ++b) {
    const float* z = logits + 5 * b;
    double zmax = z[0];
    for (int i = 1; i < 5; ++i) zmax = std::max(zmax, static_cast<double>(z[i]));
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) {
      probs[5 * b + i] = std::exp(z[i] - zmax);
      sum += probs[5 * b + i];
    }
    double log_sum = std::log(sum);
    double h = 0.0;
    for (int i = 0; i < 5; ++i) {
      probs[5 * b + i] /= sum;
      double ls = z[i] - zmax - log_sum;
      h -= probs[5 * b + i] * ls;
    }
    block_entropy[b] = h;
    entropy += h;
    logprob_new += z[act[b]] - zmax - log_sum;
  }

  const double logprob_old = buf.logprobs[idx];
  const double ratio = std::exp(logprob_new - logprob_old);
  const double unclipped = ratio * advantage;
  const double clipped = std::clamp(ratio, 1.0 - cfg.cliprange, 1.0 + cfg.cliprange) * advantage;
  const bool use_unclipped = unclipped <= clipped;  // min picks the unclipped branch on ties
  const double d_logprob = use_unclipped ? -advantage * ratio : 0.0;

  for (int b = 0; b < spec.n_blocks; ++b) {
    for (int i = 0; i < 5; ++i) {
      double p_i = probs[5 * b + i];
      double g = d_logprob * ((i == act[b] ? 1.0 : 0.0) - p_i);
      g += cfg.ent_coeff * p_i * (std::log(std::max(p_i, 1e-300)) + block_entropy[b]);
      dlogits[5 * b + i] = static_cast<float>(g * inv_minibatch);
    }
  }
  const double verr = value - ret;
  const float dvalue = static_cast<float>(2.0 * cfg.value_coeff * verr * inv_minibatch);
  backward(params, ws, dlogits, dvalue, grads);

  MinibatchAccum acc;
  acc.policy_loss = -std::min(unclipped, clipped);
  acc.value_loss = verr * verr;
  acc.entropy = entropy;
  acc.clip_count = std::abs(ratio - 1.0) > cfg.cliprange ? 1.0 : 0.0;
  double dlp = logprob_new - logprob_old;
  acc.kl = 0.5 * dlp * dlp;
  if (!std::isfinite(acc.policy_loss) || !std::isfinite(acc.value_loss))
    throw GradientError("ppo: non-finite loss");
  return acc;
}

void adam_step(PolicyParams& params, AdamState& adam, const PolicyGradients& grads,
               const TrainConfig& cfg, double lr) {
  adam.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.t));
  const float b1 = static_cast<float>(cfg.adam_beta1);
  const float b2 = static_cast<float>(cfg.adam_beta2);
  for (size_t k = 0; k < params.tensors.size(); ++k) {
    float* w = params.tensors[k].second.data.data();
    float* m = adam.m.tensors[k].second.data.data();
    float* v = adam.v.tensors[k].second.data.data();
    const float* g = grads.tensors[k].data.data();
    const int64_t n = params.tensors[k].second.numel();
    for (int64_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + (1.0f - b1) * g[i];
      v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      w[i] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + cfg.adam_eps));
    }
  }
}

}  // namespace

UpdateStats ppo_update(PolicyParams& params, AdamState& adam, const RolloutBuffer& buf,
                       const TrainConfig& cfg, double progress, Rng& shuffle_rng) {
  const int batch = buf.size();
  const int mb_size = batch / cfg.nminibatches;
  const double lr = lr_schedule(cfg, progress);

  std::vector<double> advantages(batch), returns(batch);
  for (int w = 0; w < buf.n_workers; ++w) {
    const int base = buf.flat(w, 0);
    compute_gae(std::span(buf.rewards).subspan(base, buf.n_steps),
                std::span(buf.values).subspan(base, buf.n_steps),
                std::span(buf.dones).subspan(base, buf.n_steps), buf.bootstrap[w], cfg.gamma,
                cfg.lam, std::span(advantages).subspan(base, buf.n_steps),
                std::span(returns).subspan(base, buf.n_steps));
  }

  std::vector<int> order(batch);
  for (int i = 0; i < batch; ++i) order[i] = i;

  const int n_threads = std::max(1, std::min(cfg.update_threads, mb_size));
  std::vector<PolicyGradients> grads;
  grads.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) grads.emplace_back(params);
  std::vector<PolicyWorkspace> workspaces(n_threads, PolicyWorkspace(params.spec));
  std::vector<std::vector<float>> dlogits(n_threads,
                                          std::vector<float>(params.spec.logits_dim(), 0.0f));

  UpdateStats stats;
  stats.lr = lr;
  double stat_samples = 0.0;
  double grad_norm_sum = 0.0;
  int n_adam_steps = 0;

  std::vector<double> mb_adv(mb_size);
  for (int epoch = 0; epoch < cfg.noptepochs; ++epoch) {
    // Fisher-Yates with our own rng, identical across platforms.
    for (int i = batch - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);
    for (int mb = 0; mb < cfg.nminibatches; ++mb) {
      const int* idx = order.data() + mb * mb_size;
      // Per-minibatch advantage normalization.
      double mean = 0.0;
      for (int i = 0; i < mb_size; ++i) mean += advantages[idx[i]];
      mean /= mb_size;
      double var = 0.0;
      for (int i = 0; i < mb_size; ++i) {
        double d = advantages[idx[i]] - mean;
        var += d * d;
      }
      double inv_std = 1.0 / (std::sqrt(var / mb_size) + 1e-8);
      for (int i = 0; i < mb_size; ++i) mb_adv[i] = (advantages[idx[i]] - mean) * inv_std;

      const double inv_minibatch = 1.0 / mb_size;
      std::vector<MinibatchAccum> accums(n_threads);
      std::vector<std::exception_ptr> errors(n_threads);
      auto run_chunk = [&](int tid) {
        try {
          const int lo = tid * mb_size / n_threads;
          const int hi = (tid + 1) * mb_size / n_threads;
          for (int i = lo; i < hi; ++i) {
            MinibatchAccum a =
                sample_gradient(params, workspaces[tid], buf, idx[i], mb_adv[i], returns[idx[i]],
                                cfg, inv_minibatch, grads[tid], dlogits[tid]);
            accums[tid].policy_loss += a.policy_loss;
            accums[tid].value_loss += a.value_loss;
            accums[tid].entropy += a.entropy;
            accums[tid].clip_count += a.clip_count;
            accums[tid].kl += a.kl;
          }
        } catch (...) {
          errors[tid] = std::current_exception();
        }
      };
      if (n_threads == 1) {
        run_chunk(0);
      } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(run_chunk, t);
        for (auto& t : pool) t.join();
      }
      for (int t = 0; t < n_threads; ++t) {
        if (errors[t]) std::rethrow_exception(errors[t]);
      }
      // Fixed-order reduction keeps the update bitwise deterministic.
      for (int t = 1; t < n_threads; ++t) {
        for (size_t k = 0; k < grads[0].tensors.size(); ++k) {
          float* dst = grads[0].tensors[k].data.data();
          const float* src = grads[t].tensors[k].data.data();
          const int64_t n = grads[0].tensors[k].numel();
          for (int64_t i = 0; i < n; ++i) dst[i] += src[i];
        }
        grads[t].zero();
      }

      double norm = grads[0].global_norm();
      if (!std::isfinite(norm)) throw GradientError("ppo: non-finite gradient norm");
      if (cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm)
        grads[0].scale(static_cast<float>(cfg.max_grad_norm / norm));
      adam_step(params, adam, grads[0], cfg, lr);
      grads[0].zero();
      grad_norm_sum += norm;
      ++n_adam_steps;

      for (int t = 0; t < n_threads; ++t) {
        stats.policy_loss += accums[t].policy_loss;
        stats.value_loss += accums[t].value_loss;
        stats.entropy += accums[t].entropy;
        stats.clip_fraction += accums[t].clip_count;
        stats.approx_kl += accums[t].kl;
      }
      stat_samples += mb_size;
    }
  }

  stats.policy_loss /= stat_samples;
  stats.value_loss /= stat_samples;
  stats.entropy /= stat_samples;
  stats.clip_fraction /= stat_samples;
  stats.approx_kl /= stat_samples;
  stats.grad_norm = grad_norm_sum / std::max(1, n_adam_steps);
  return stats;
}

}  // namespace wbc
