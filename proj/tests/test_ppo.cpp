#include "wbc/ppo.hpp"

#include <cstring>
#include <filesystem>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wbc/config.hpp"
#include "wbc/errors.hpp"

namespace wbc {
namespace {

TEST(Gae, TerminalSingleStep) {
  std::vector<double> r{2.0}, v{0.5};
  std::vector<uint8_t> d{1};
  std::vector<double> adv(1), ret(1);
  compute_gae(r, v, d, 99.0, 0.99, 0.95, adv, ret);
  EXPECT_DOUBLE_EQ(adv[0], 1.5);  // A = r - V, bootstrap ignored at a done
  EXPECT_DOUBLE_EQ(ret[0], 2.0);
}

TEST(Gae, LambdaZeroIsOneStepDelta) {
  Rng rng(1);
  const int n = 32;
  std::vector<double> r(n), v(n), adv(n), ret(n);
  std::vector<uint8_t> d(n, 0);
  for (int i = 0; i < n; ++i) {
    r[i] = rng.uniform(-1, 1);
    v[i] = rng.uniform(-1, 1);
    d[i] = rng.uniform() < 0.2 ? 1 : 0;
  }
  double boot = 0.4;
  compute_gae(r, v, d, boot, 0.99, 0.0, adv, ret);
  for (int t = 0; t < n; ++t) {
    double next_v = t == n - 1 ? boot : v[t + 1];
    double delta = r[t] + 0.99 * (d[t] ? 0.0 : 1.0) * next_v - v[t];
    EXPECT_NEAR(adv[t], delta, 1e-12);
  }
}

TEST(Gae, LambdaOneIsDiscountedReturnMinusValue) {
  Rng rng(2);
  const int n = 64;
  std::vector<double> r(n), v(n), adv(n), ret(n);
  std::vector<uint8_t> d(n, 0);
  for (int i = 0; i < n; ++i) {
    r[i] = rng.uniform(-1, 1);
    v[i] = rng.uniform(-1, 1);
  }
  double boot = -0.3, gamma = 0.995;
  compute_gae(r, v, d, boot, gamma, 1.0, adv, ret);
  for (int t = 0; t < n; ++t) {
    double acc = 0.0, g = 1.0;
    for (int k = t; k < n; ++k) {
      acc += g * r[k];
      g *= gamma;
    }
    acc += g * boot;
    EXPECT_NEAR(adv[t], acc - v[t], 1e-8);
  }
}

TEST(Gae, MatchesDoubleLoopOracleOnRandomSequences) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + rng.uniform_int(256);
    std::vector<double> r(n), v(n), adv(n), ret(n), ref(n);
    std::vector<uint8_t> d(n);
    for (int i = 0; i < n; ++i) {
      r[i] = rng.uniform(-5, 5);
      v[i] = rng.uniform(-5, 5);
      d[i] = rng.uniform() < 0.15 ? 1 : 0;
    }
    double boot = rng.uniform(-5, 5);
    double gamma = rng.uniform(0.9, 1.0), lam = rng.uniform(0.0, 1.0);
    compute_gae(r, v, d, boot, gamma, lam, adv, ret);
    oracle::gae_double_loop(r, v, d, boot, gamma, lam, ref);
    for (int t = 0; t < n; ++t) {
      ASSERT_NEAR(adv[t], ref[t], 1e-8);
      ASSERT_NEAR(ret[t], ref[t] + v[t], 1e-8);
    }
  }
}

TEST(LrSchedule, TableAnchorsAndMidpoint) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(lr_schedule(cfg, 0.0), 1e-3);
  EXPECT_DOUBLE_EQ(lr_schedule(cfg, 1.0), 1.5e-4);
  EXPECT_DOUBLE_EQ(lr_schedule(cfg, 0.5), 5.75e-4);
  EXPECT_DOUBLE_EQ(lr_schedule(cfg, 2.0), 1.5e-4);  // clamped
}

TEST(TrainConfig, ValidatesMinibatchDivisibility) {
  TrainConfig cfg;
  cfg.n_workers = 3;
  cfg.n_steps = 5;
  cfg.nminibatches = 4;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.nminibatches = 5;
  cfg.total_steps = 15;
  EXPECT_NO_THROW(cfg.validate());
}

// Small spec keeps these updates cheap.
NetworkSpec tiny_spec() {
  NetworkSpec spec;
  spec.n_beams = 20;
  spec.conv1_kernel = 3;
  spec.conv2_channels = 8;
  spec.fusion_widths = {32, 24, 16};
  spec.proprio_widths = {16, 16, 16, 16, 16, 16, 16, 16};
  spec.scan_fc_out = 16;
  return spec;
}

RolloutBuffer synthetic_buffer(const PolicyParams& params, int n_workers, int n_steps,
                               uint64_t seed) {
  const NetworkSpec& spec = params.spec;
  RolloutBuffer buf(n_workers, n_steps, spec.obs_dim());
  Rng rng(seed);
  PolicyWorkspace ws(spec);
  std::vector<float> logits(spec.logits_dim());
  for (int w = 0; w < n_workers; ++w) {
    for (int t = 0; t < n_steps; ++t) {
      int i = buf.flat(w, t);
      float* obs = buf.obs.data() + static_cast<size_t>(i) * spec.obs_dim();
      for (int k = 0; k < spec.obs_dim(); ++k) obs[k] = static_cast<float>(rng.uniform(-1, 1));
      float value;
      forward(params, std::span(obs, spec.obs_dim()), ws, logits.data(), &value);
      double lp;
      buf.actions[i] = sample_action(logits, rng, &lp);
      buf.logprobs[i] = lp;
      buf.values[i] = value;
      buf.rewards[i] = rng.uniform(-1, 1);
      buf.dones[i] = rng.uniform() < 0.1 ? 1 : 0;
    }
    buf.bootstrap[w] = rng.uniform(-1, 1);
  }
  return buf;
}

TEST(PpoUpdate, RatioOneMeansNoClipping) {
  NetworkSpec spec = tiny_spec();
  PolicyParams params = init_policy(spec, 41);
  AdamState adam(params);
  TrainConfig cfg;
  cfg.n_workers = 1;
  cfg.n_steps = 16;
  cfg.nminibatches = 1;
  cfg.noptepochs = 1;
  cfg.total_steps = 16;
  RolloutBuffer buf = synthetic_buffer(params, 1, 16, 42);
  Rng shuffle(1);
  UpdateStats stats = ppo_update(params, adam, buf, cfg, 0.0, shuffle);
  EXPECT_DOUBLE_EQ(stats.clip_fraction, 0.0);
  // Surrogate with rho = 1 is -mean(normalized advantages) = 0.
  EXPECT_NEAR(stats.policy_loss, 0.0, 1e-6);
}

TEST(PpoUpdate, ClippedRatioContribution) {
  NetworkSpec spec = tiny_spec();
  PolicyParams params = init_policy(spec, 43);
  AdamState adam(params);
  TrainConfig cfg;
  cfg.n_workers = 1;
  cfg.n_steps = 2;
  cfg.nminibatches = 1;
  cfg.noptepochs = 1;
  cfg.total_steps = 2;
  cfg.lr_init = cfg.lr_final = 0.0;  // keep parameters fixed
  RolloutBuffer buf = synthetic_buffer(params, 1, 2, 44);
  // Force ratio 1.5 on both samples, advantages normalize to +1 and -1.
  buf.logprobs[0] -= std::log(1.5);
  buf.logprobs[1] -= std::log(1.5);
  buf.rewards = {10.0, -10.0};
  buf.values = {0.0, 0.0};
  buf.dones = {1, 1};
  Rng shuffle(2);
  UpdateStats stats = ppo_update(params, adam, buf, cfg, 0.0, shuffle);
  EXPECT_DOUBLE_EQ(stats.clip_fraction, 1.0);
  // A=+1 clips to 1.2; A=-1 keeps ratio 1.5: loss = (-1.2 + 1.5) / 2.
  EXPECT_NEAR(stats.policy_loss, 0.15, 1e-6);
}

TEST(PpoUpdate, AdvantageNormalizationWithinMinibatch) {
  // Direct check of the normalization the update applies.
  Rng rng(4);
  const int n = 256;
  std::vector<double> adv(n);
  for (double& a : adv) a = rng.uniform(-3, 7);
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  double inv_std = 1.0 / (std::sqrt(var / n) + 1e-8);
  double m2 = 0.0, v2 = 0.0;
  for (double a : adv) m2 += (a - mean) * inv_std;
  m2 /= n;
  for (double a : adv) v2 += ((a - mean) * inv_std - m2) * ((a - mean) * inv_std - m2);
  v2 = std::sqrt(v2 / n);
  EXPECT_LE(std::abs(m2), 1e-6);
  EXPECT_NEAR(v2, 1.0, 1e-6);
}

TEST(PpoUpdate, DeterministicGivenSeed) {
  NetworkSpec spec = tiny_spec();
  PolicyParams p1 = init_policy(spec, 45);
  PolicyParams p2 = init_policy(spec, 45);
  AdamState a1(p1), a2(p2);
  TrainConfig cfg;
  cfg.n_workers = 2;
  cfg.n_steps = 8;
  cfg.nminibatches = 2;
  cfg.noptepochs = 2;
  cfg.total_steps = 16;
  RolloutBuffer buf = synthetic_buffer(p1, 2, 8, 46);
  Rng s1(7), s2(7);
  ppo_update(p1, a1, buf, cfg, 0.0, s1);
  ppo_update(p2, a2, buf, cfg, 0.0, s2);
  for (size_t k = 0; k < p1.tensors.size(); ++k) {
    ASSERT_EQ(std::memcmp(p1.tensors[k].second.data.data(), p2.tensors[k].second.data.data(),
                          p1.tensors[k].second.data.size() * sizeof(float)),
              0);
  }
}

TEST(PpoUpdate, MultithreadedUpdateMatchesSingleThread) {
  NetworkSpec spec = tiny_spec();
  PolicyParams p1 = init_policy(spec, 47);
  PolicyParams p2 = init_policy(spec, 47);
  AdamState a1(p1), a2(p2);
  TrainConfig cfg;
  cfg.n_workers = 2;
  cfg.n_steps = 16;
  cfg.nminibatches = 2;
  cfg.noptepochs = 1;
  cfg.total_steps = 32;
  RolloutBuffer buf = synthetic_buffer(p1, 2, 16, 48);
  Rng s1(9), s2(9);
  cfg.update_threads = 1;
  ppo_update(p1, a1, buf, cfg, 0.0, s1);
  cfg.update_threads = 4;
  ppo_update(p2, a2, buf, cfg, 0.0, s2);
  // Fixed-order reduction: only the float summation order inside a chunk
  // differs, which this chunking keeps identical.
  for (size_t k = 0; k < p1.tensors.size(); ++k) {
    const auto& d1 = p1.tensors[k].second.data;
    const auto& d2 = p2.tensors[k].second.data;
    for (size_t i = 0; i < d1.size(); ++i) ASSERT_NEAR(d1[i], d2[i], 2e-6);
  }
}

TEST(PpoUpdate, BanditImprovesHigherAdvantageAction) {
  NetworkSpec spec = tiny_spec();
  PolicyParams params = init_policy(spec, 49);
  TrainConfig cfg;
  cfg.n_workers = 1;
  cfg.n_steps = 2;
  cfg.nminibatches = 1;
  cfg.noptepochs = 4;
  cfg.total_steps = 8;
  RolloutBuffer buf = synthetic_buffer(params, 1, 2, 50);
  buf.rewards = {5.0, -5.0};
  buf.values = {0.0, 0.0};
  buf.dones = {1, 1};

  PolicyWorkspace ws(spec);
  std::vector<float> logits(spec.logits_dim());
  auto prob_of = [&](const PolicyParams& p, int sample) {
    forward(p, std::span(buf.obs.data() + sample * spec.obs_dim(), spec.obs_dim()), ws,
            logits.data(), nullptr);
    double lp;
    logprob_entropy(logits, buf.actions[sample], &lp, nullptr);
    return std::exp(lp);
  };
  double before_good = prob_of(params, 0);
  double before_bad = prob_of(params, 1);
  AdamState adam(params);
  Rng shuffle(11);
  ppo_update(params, adam, buf, cfg, 0.0, shuffle);
  EXPECT_GT(prob_of(params, 0), before_good);
  EXPECT_LT(prob_of(params, 1), before_bad);
}

TEST(PpoUpdate, EntropyPressureIncreasesEntropy) {
  NetworkSpec spec = tiny_spec();
  PolicyParams params = init_policy(spec, 51);
  TrainConfig cfg;
  cfg.n_workers = 1;
  cfg.n_steps = 8;
  cfg.nminibatches = 1;
  cfg.noptepochs = 1;
  cfg.total_steps = 80;
  cfg.ent_coeff = 0.5;
  // Push the policy away from uniform so entropy has room to climb.
  {
    Rng perturb(99);
    for (float& b : params.at("actor.b").data) b = static_cast<float>(perturb.uniform(-1.5, 1.5));
  }
  AdamState adam(params);
  RolloutBuffer buf = synthetic_buffer(params, 1, 8, 52);
  std::fill(buf.rewards.begin(), buf.rewards.end(), 0.0);
  std::fill(buf.values.begin(), buf.values.end(), 0.0);
  std::fill(buf.dones.begin(), buf.dones.end(), 1);
  double prev = -1.0;
  for (int it = 0; it < 10; ++it) {
    // Refresh stored logprobs so the ratio stays 1 and only entropy acts.
    PolicyWorkspace ws(spec);
    std::vector<float> logits(spec.logits_dim());
    for (int i = 0; i < buf.size(); ++i) {
      forward(params, std::span(buf.obs.data() + i * spec.obs_dim(), spec.obs_dim()), ws,
              logits.data(), nullptr);
      double lp;
      logprob_entropy(logits, buf.actions[i], &lp, nullptr);
      buf.logprobs[i] = lp;
    }
    Rng shuffle(13 + it);
    UpdateStats stats = ppo_update(params, adam, buf, cfg, 0.0, shuffle);
    if (prev >= 0.0) EXPECT_GT(stats.entropy, prev);
    prev = stats.entropy;
  }
}

TEST(CollectRollouts, ShapeDeterminismAndLogprobConsistency) {
  AppConfig cfg = default_config();
  cfg.ppo.n_workers = 2;
  cfg.ppo.n_steps = 4;
  cfg.ppo.nminibatches = 2;
  cfg.ppo.total_steps = 8;
  NetworkSpec spec = cfg.network_spec();
  PolicyParams params = init_policy(spec, 53);

  auto make_envs = [&] {
    std::vector<std::unique_ptr<Env>> envs;
    for (int w = 0; w < cfg.ppo.n_workers; ++w)
      envs.push_back(std::make_unique<Env>(make_env(cfg)));
    return envs;
  };
  auto envs1 = make_envs();
  auto envs2 = make_envs();
  std::vector<Rng> rngs1, rngs2;
  for (int w = 0; w < 2; ++w) {
    rngs1.emplace_back(Rng::mix(99, w));
    rngs2.emplace_back(Rng::mix(99, w));
  }
  RolloutBuffer b1 = collect_rollouts(envs1, params, cfg.ppo, rngs1, 0.5);
  RolloutBuffer b2 = collect_rollouts(envs2, params, cfg.ppo, rngs2, 0.5);
  EXPECT_EQ(b1.size(), 8);
  ASSERT_EQ(b1.obs.size(), b2.obs.size());
  EXPECT_EQ(std::memcmp(b1.obs.data(), b2.obs.data(), b1.obs.size() * sizeof(float)), 0);
  EXPECT_EQ(b1.actions, b2.actions);
  EXPECT_EQ(b1.logprobs, b2.logprobs);

  // Stored logprobs equal recomputation on the stored (obs, action).
  PolicyWorkspace ws(spec);
  std::vector<float> logits(spec.logits_dim());
  for (int i = 0; i < b1.size(); ++i) {
    forward(params, std::span(b1.obs.data() + i * spec.obs_dim(), spec.obs_dim()), ws,
            logits.data(), nullptr);
    double lp;
    logprob_entropy(logits, b1.actions[i], &lp, nullptr);
    EXPECT_NEAR(lp, b1.logprobs[i], 1e-6);
  }
}

TEST(Trainer, RunsAndResumes) {
  AppConfig cfg = default_config();
  cfg.scenario.corridor_width_range = {2.5, 2.5};
  cfg.scenario.corridor_length_range = {6.0, 6.0};
  cfg.scenario.shelf_count_range = {1, 1};
  cfg.scenario.door_count_range = {0, 0};
  cfg.scenario.spawn_distance_range = {1.0, 1.5};
  cfg.ppo.n_workers = 2;
  cfg.ppo.n_steps = 32;
  cfg.ppo.nminibatches = 2;
  cfg.ppo.noptepochs = 2;
  cfg.ppo.total_steps = 128;
  cfg.ppo.checkpoint_every = 1;
  std::string dir = (std::filesystem::temp_directory_path() / "wbc_trainer_test").string();
  std::filesystem::remove_all(dir);

  {
    std::vector<std::unique_ptr<Env>> envs;
    for (int w = 0; w < 2; ++w) envs.push_back(std::make_unique<Env>(make_env(cfg)));
    Trainer t(std::move(envs), cfg.network_spec(), cfg.ppo, cfg.adr, dir, 1);
    t.run();
    EXPECT_EQ(t.history().size(), 2u);  // 128 / (2*32) updates
    EXPECT_EQ(t.history().back().steps_done, 128);
  }
  EXPECT_TRUE(std::filesystem::exists(dir + "/checkpoint.wbc"));
  EXPECT_TRUE(std::filesystem::exists(dir + "/train_log.csv"));
  {
    std::vector<std::unique_ptr<Env>> envs;
    for (int w = 0; w < 2; ++w) envs.push_back(std::make_unique<Env>(make_env(cfg)));
    TrainConfig more = cfg.ppo;
    more.total_steps = 256;
    Trainer t(std::move(envs), cfg.network_spec(), more, cfg.adr, dir, 1);
    t.resume(dir);
    t.run();
    EXPECT_EQ(t.history().back().steps_done, 256);  // counter continued
    EXPECT_EQ(t.history().back().update_index, 4);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace wbc
