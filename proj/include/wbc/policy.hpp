#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wbc/rng.hpp"
#include "wbc/robot.hpp"

namespace wbc {

// Actor-critic topology: a shared conv branch compresses each scan to 64
// floats, three dense layers fuse them to 64, the proprioceptive block is
// concatenated and eight dense layers compress to 32, then linear actor
// (5 blocks x 5 bins) and critic (1) heads. Hidden activations are LeakyReLU.
struct NetworkSpec {
  int n_beams = 64;
  int proprio_dim = 9;
  int conv1_channels = 8, conv1_kernel = 5, conv1_stride = 2;
  int pool1 = 2;
  int conv2_channels = 16, conv2_kernel = 3, conv2_stride = 1;
  int pool2 = 2;
  int scan_fc_out = 64;
  std::array<int, 3> fusion_widths{128, 96, 64};
  std::array<int, 8> proprio_widths{64, 64, 56, 48, 48, 40, 36, 32};
  int n_blocks = 5, n_bins = 5;
  float leaky_slope = 0.01f;

  int conv1_out() const { return (n_beams - conv1_kernel) / conv1_stride + 1; }
  int pool1_out() const { return conv1_out() / pool1; }
  int conv2_out() const { return (pool1_out() - conv2_kernel) / conv2_stride + 1; }
  int pool2_out() const { return conv2_out() / pool2; }
  int flat_dim() const { return conv2_channels * pool2_out(); }
  int obs_dim() const { return 2 * n_beams + proprio_dim; }
  int logits_dim() const { return n_blocks * n_bins; }

  void validate() const;  // throws ConfigError
  bool operator==(const NetworkSpec&) const = default;
};

struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  int64_t numel() const {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }
};

// Ordered named tensor store; order is the canonical layout produced by
// init_policy and assumed by forward/backward.
struct PolicyParams {
  NetworkSpec spec;
  uint32_t version = 1;
  std::vector<std::pair<std::string, Tensor>> tensors;

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  int64_t total_params() const;
};

// Orthogonal weight init (gain sqrt(2) hidden, 0.01 actor head, 1.0 critic
// head), zero biases.
PolicyParams init_policy(const NetworkSpec& spec, uint64_t seed);

// Mirrors PolicyParams shapes; accumulation buffer for backward.
struct PolicyGradients {
  std::vector<Tensor> tensors;  // same order as PolicyParams::tensors

  explicit PolicyGradients(const PolicyParams& p);
  void zero();
  double global_norm() const;
  void scale(float s);
};

// All intermediate activations of one forward pass; reused across calls so
// the hot path is allocation-free after construction.
struct PolicyWorkspace {
  explicit PolicyWorkspace(const NetworkSpec& spec);

  NetworkSpec spec;
  // forward activations
  std::vector<float> conv1_act, pool1_act, conv2_act, pool2_act;  // [2] scans, flattened
  std::vector<uint8_t> pool1_idx, pool2_idx;
  std::vector<float> fuse_in;  // [2 * scan_fc_out]
  std::array<std::vector<float>, 3> fuse_act;
  std::vector<float> prop_in;
  std::array<std::vector<float>, 8> prop_act;
  std::vector<float> logits;
  float value = 0.0f;
  std::vector<float> scan_in;  // copy of the two scan slices of the observation
  std::vector<float> proprio_in;
  // backward scratch
  std::vector<float> d_conv1, d_pool1, d_conv2, d_pool2, d_fuse_in;
  std::array<std::vector<float>, 3> d_fuse;
  std::vector<float> d_prop_in;
  std::array<std::vector<float>, 8> d_prop;
};

// Deterministic forward pass. obs must have spec.obs_dim() entries. Throws
// ParamsCorrupt on shape mismatch.
void forward(const PolicyParams& p, std::span<const float> obs, PolicyWorkspace& ws,
             float* logits_out, float* value_out);

// Reverse pass for the activations currently held in ws; accumulates into
// grads (shared scan-branch weights receive contributions from both scans).
void backward(const PolicyParams& p, PolicyWorkspace& ws, std::span<const float> dlogits,
              float dvalue, PolicyGradients& grads);

// Per-block categorical sample; logprob is the sum over blocks.
Action sample_action(std::span<const float> logits, Rng& rng, double* logprob);

// Per-block argmax, ties toward the lower index.
Action argmax_action(std::span<const float> logits);

void logprob_entropy(std::span<const float> logits, const Action& a, double* logprob,
                     double* entropy);

// Checkpoint file: magic "WBC1", u32 format version, u32 tensor count, per
// tensor (u16 name length, name, u8 rank, u32 dims, f32 little-endian data),
// trailing CRC32 over everything before it.
void save_policy(const PolicyParams& p, const std::string& path);
PolicyParams load_policy(const std::string& path, const NetworkSpec& expected_spec);

}  // namespace wbc
