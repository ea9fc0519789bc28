#include "wbc/policy.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wbc/errors.hpp"

namespace wbc {
namespace {

std::vector<float> random_obs(const NetworkSpec& spec, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> obs(spec.obs_dim());
  for (int i = 0; i < 2 * spec.n_beams; ++i) obs[i] = static_cast<float>(rng.uniform(0.05, 1.0));
  for (int i = 2 * spec.n_beams; i < spec.obs_dim(); ++i)
    obs[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  return obs;
}

TEST(Policy, SpecDerivedDimensions) {
  NetworkSpec spec;
  EXPECT_EQ(spec.conv1_out(), 30);
  EXPECT_EQ(spec.pool1_out(), 15);
  EXPECT_EQ(spec.conv2_out(), 13);
  EXPECT_EQ(spec.pool2_out(), 6);
  EXPECT_EQ(spec.flat_dim(), 96);
  EXPECT_EQ(spec.obs_dim(), 137);
  EXPECT_EQ(spec.logits_dim(), 25);
}

TEST(Policy, ZeroParamsGiveZeroOutputs) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 1);
  for (auto& [name, t] : p.tensors) std::fill(t.data.begin(), t.data.end(), 0.0f);
  PolicyWorkspace ws(spec);
  std::vector<float> logits(25);
  float value = 1.0f;
  forward(p, random_obs(spec, 2), ws, logits.data(), &value);
  for (float l : logits) EXPECT_EQ(l, 0.0f);
  EXPECT_EQ(value, 0.0f);
}

TEST(Policy, ForwardBitwiseStable) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 3);
  PolicyWorkspace ws1(spec), ws2(spec);
  auto obs = random_obs(spec, 4);
  std::vector<float> l1(25), l2(25);
  float v1, v2;
  forward(p, obs, ws1, l1.data(), &v1);
  forward(p, obs, ws2, l2.data(), &v2);
  EXPECT_EQ(l1, l2);
  EXPECT_EQ(v1, v2);
}

TEST(Policy, ScanBranchSharesWeights) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 5);
  PolicyWorkspace ws(spec);
  // Identical scans in both slots: the shared branch must produce identical
  // 64-float codes for each half of the fusion input.
  auto obs = random_obs(spec, 6);
  for (int i = 0; i < spec.n_beams; ++i) obs[spec.n_beams + i] = obs[i];
  forward(p, obs, ws, nullptr, nullptr);
  for (int i = 0; i < spec.scan_fc_out; ++i)
    EXPECT_EQ(ws.fuse_in[i], ws.fuse_in[spec.scan_fc_out + i]);
}

TEST(Policy, ForwardMatchesDoubleOracle) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 7);
  PolicyWorkspace ws(spec);
  auto obs = random_obs(spec, 8);
  std::vector<float> logits(25);
  float value;
  forward(p, obs, ws, logits.data(), &value);
  auto [ref_logits, ref_value] = oracle::forward_double(p, obs);
  for (int i = 0; i < 25; ++i) EXPECT_NEAR(logits[i], ref_logits[i], 1e-4);
  EXPECT_NEAR(value, ref_value, 1e-4);
}

TEST(Policy, ObservationLengthMismatchThrows) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 9);
  PolicyWorkspace ws(spec);
  std::vector<float> short_obs(10, 0.0f);
  EXPECT_THROW(forward(p, short_obs, ws, nullptr, nullptr), ParamsCorrupt);
}

TEST(Policy, SampleUniformLogits) {
  std::vector<float> logits(25, 0.0f);
  Rng rng(11);
  double logprob;
  sample_action(logits, rng, &logprob);
  EXPECT_NEAR(logprob, 5.0 * std::log(1.0 / 5.0), 1e-12);
}

TEST(Policy, SampleSaturatedLogits) {
  std::vector<float> logits(25, 0.0f);
  for (int b = 0; b < 5; ++b) logits[5 * b + 3] = 1e6f;
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    double lp;
    Action a = sample_action(logits, rng, &lp);
    for (int b = 0; b < 5; ++b) EXPECT_EQ(a[b], 3);
    EXPECT_NEAR(lp, 0.0, 1e-9);
  }
}

TEST(Policy, SampleFrequenciesMatchSoftmax) {
  Rng init(15);
  std::vector<float> logits(25);
  for (float& z : logits) z = static_cast<float>(init.uniform(-1.0, 1.0));
  Rng rng(17);
  const int n = 1000000;
  std::array<std::array<int, 5>, 5> counts{};
  for (int i = 0; i < n; ++i) {
    Action a = sample_action(logits, rng, nullptr);
    for (int b = 0; b < 5; ++b) counts[b][a[b]]++;
  }
  for (int b = 0; b < 5; ++b) {
    double zmax = *std::max_element(logits.begin() + 5 * b, logits.begin() + 5 * b + 5);
    double sum = 0.0;
    double e[5];
    for (int i = 0; i < 5; ++i) {
      e[i] = std::exp(logits[5 * b + i] - zmax);
      sum += e[i];
    }
    for (int i = 0; i < 5; ++i) {
      double expected = e[i] / sum;
      double got = static_cast<double>(counts[b][i]) / n;
      EXPECT_NEAR(got, expected, 0.01);
    }
  }
}

TEST(Policy, ArgmaxAndTieBreak) {
  std::vector<float> logits(25, 0.0f);
  logits[4] = 1.0f;  // block 0: index 4
  Action a = argmax_action(logits);
  EXPECT_EQ(a[0], 4);
  for (int b = 1; b < 5; ++b) EXPECT_EQ(a[b], 0);  // all-equal blocks pick index 0
  // Shift invariance per block.
  std::vector<float> shifted = logits;
  for (int i = 0; i < 5; ++i) shifted[i] += 100.0f;
  EXPECT_EQ(argmax_action(shifted), a);
}

TEST(Policy, LogprobEntropyUniformAndSaturated) {
  std::vector<float> logits(25, 0.0f);
  double lp, ent;
  logprob_entropy(logits, {0, 1, 2, 3, 4}, &lp, &ent);
  EXPECT_NEAR(ent, 5.0 * std::log(5.0), 1e-12);
  EXPECT_NEAR(lp, -5.0 * std::log(5.0), 1e-12);
  for (int b = 0; b < 5; ++b) logits[5 * b] = 200.0f;
  logprob_entropy(logits, {0, 0, 0, 0, 0}, &lp, &ent);
  EXPECT_NEAR(ent, 0.0, 1e-9);
  EXPECT_NEAR(lp, 0.0, 1e-9);
}

TEST(Policy, LogprobEntropyMatchesEnumeration) {
  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<float> logits(25);
    for (float& z : logits) z = static_cast<float>(rng.uniform(-3.0, 3.0));
    Action a{rng.uniform_int(5), rng.uniform_int(5), rng.uniform_int(5), rng.uniform_int(5),
             rng.uniform_int(5)};
    double lp, ent, lp_ref, ent_ref;
    logprob_entropy(logits, a, &lp, &ent);
    oracle::logprob_entropy_enumerated(logits, a, &lp_ref, &ent_ref);
    EXPECT_NEAR(lp, lp_ref, 1e-6);
    EXPECT_NEAR(ent, ent_ref, 1e-6);
    EXPECT_LE(lp, 0.0);
    EXPECT_GE(ent, 0.0);
    EXPECT_LE(ent, 5.0 * std::log(5.0) + 1e-12);
  }
}

TEST(Policy, GradientsMatchFiniteDifferences) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 21);
  oracle::PpoLossSpec ls;
  ls.obs = random_obs(spec, 22);
  ls.action = {1, 3, 0, 4, 2};
  ls.advantage = 0.7;
  ls.value_target = 0.3;
  {
    PolicyWorkspace ws(spec);
    std::vector<float> logits(25);
    forward(p, ls.obs, ws, logits.data(), nullptr);
    double lp, ent;
    logprob_entropy(logits, ls.action, &lp, &ent);
    ls.logprob_old = lp - 0.03;  // ratio away from 1 but inside the clip band
  }
  Rng pick(23);
  oracle::GradCheckResult r = oracle::run_gradient_check(p, ls, 60, 1e-3, pick);
  EXPECT_EQ(r.checked, 60);
  EXPECT_LE(r.max_rel_error, 1e-3);
}

TEST(Policy, CriticGradientMatchesHandDerivedLastLayer) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 25);
  PolicyWorkspace ws(spec);
  auto obs = random_obs(spec, 26);
  float value;
  forward(p, obs, ws, nullptr, &value);
  const double target = 0.9;
  PolicyGradients grads(p);
  std::vector<float> dlogits(25, 0.0f);
  float dvalue = static_cast<float>(2.0 * (value - target));
  backward(p, ws, dlogits, dvalue, grads);
  // d/dw MSE = 2(V - R) * trunk activation; d/db = 2(V - R).
  const Tensor& gw = grads.tensors[p.tensors.size() - 2];
  const Tensor& gb = grads.tensors[p.tensors.size() - 1];
  EXPECT_NEAR(gb.data[0], 2.0 * (value - target), 1e-6);
  for (int j = 0; j < spec.proprio_widths[7]; ++j)
    EXPECT_NEAR(gw.data[j], 2.0 * (value - target) * ws.prop_act[7][j], 1e-5);
}

TEST(Policy, ZeroLossGradientIsZero) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 27);
  PolicyWorkspace ws(spec);
  forward(p, random_obs(spec, 28), ws, nullptr, nullptr);
  PolicyGradients grads(p);
  std::vector<float> dlogits(25, 0.0f);
  backward(p, ws, dlogits, 0.0f, grads);
  EXPECT_EQ(grads.global_norm(), 0.0);
}

TEST(Policy, CheckpointRoundTripBitwise) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 29);
  std::string path = std::filesystem::temp_directory_path() / "wbc_test_ckpt.wbc";
  save_policy(p, path);
  PolicyParams q = load_policy(path, spec);
  ASSERT_EQ(q.tensors.size(), p.tensors.size());
  for (size_t i = 0; i < p.tensors.size(); ++i) {
    EXPECT_EQ(q.tensors[i].first, p.tensors[i].first);
    EXPECT_EQ(q.tensors[i].second.shape, p.tensors[i].second.shape);
    ASSERT_EQ(q.tensors[i].second.data.size(), p.tensors[i].second.data.size());
    EXPECT_EQ(std::memcmp(q.tensors[i].second.data.data(), p.tensors[i].second.data.data(),
                          p.tensors[i].second.data.size() * sizeof(float)),
              0);
  }
  std::filesystem::remove(path);
}

TEST(Policy, TruncatedCheckpointFailsChecksum) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 31);
  std::string path = std::filesystem::temp_directory_path() / "wbc_test_trunc.wbc";
  save_policy(p, path);
  auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 100);
  EXPECT_THROW(load_policy(path, spec), ChecksumError);
  std::filesystem::remove(path);
}

TEST(Policy, CorruptedByteFailsChecksum) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 33);
  std::string path = std::filesystem::temp_directory_path() / "wbc_test_corrupt.wbc";
  save_policy(p, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(200);
    char b = 0x5A;
    f.write(&b, 1);
  }
  EXPECT_THROW(load_policy(path, spec), ChecksumError);
  std::filesystem::remove(path);
}

TEST(Policy, SpecMismatchRejected) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 35);
  std::string path = std::filesystem::temp_directory_path() / "wbc_test_mismatch.wbc";
  save_policy(p, path);
  NetworkSpec other = spec;
  other.n_beams = 32;
  EXPECT_THROW(load_policy(path, other), ParamsCorrupt);
  std::filesystem::remove(path);
}

TEST(Policy, OrthogonalInitColumnsScaledByGain) {
  NetworkSpec spec;
  PolicyParams p = init_policy(spec, 37);
  // Rows of a wide matrix are orthonormal * gain.
  const Tensor& w = p.at("fuse.fc2.w");  // 96 x 128
  const int n_in = 128;
  auto row_dot = [&](int r1, int r2) {
    double acc = 0.0;
    for (int i = 0; i < n_in; ++i)
      acc += static_cast<double>(w.data[r1 * n_in + i]) * w.data[r2 * n_in + i];
    return acc;
  };
  EXPECT_NEAR(row_dot(0, 0), 2.0, 1e-4);  // gain sqrt(2)^2
  EXPECT_NEAR(row_dot(0, 1), 0.0, 1e-4);
  EXPECT_NEAR(row_dot(3, 7), 0.0, 1e-4);
}

}  // namespace
}  // namespace wbc
