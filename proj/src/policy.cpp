#include "wbc/policy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>

#include "wbc/crc32.hpp"
#include "wbc/errors.hpp"

namespace wbc {

void NetworkSpec::validate() const {
  if (n_beams < conv1_kernel) throw ConfigError("network: n_beams too small for conv1 kernel");
  if (conv1_out() < 2 || pool1_out() < conv2_kernel || pool2_out() < 1)
    throw ConfigError("network: scan branch collapses to zero length");
  if (proprio_dim < 1 || n_blocks != 5 || n_bins != 5)
    throw ConfigError("network: unsupported head layout");
  for (int w : fusion_widths)
    if (w < 1) throw ConfigError("network: bad fusion width");
  for (int w : proprio_widths)
    if (w < 1) throw ConfigError("network: bad proprio width");
}

Tensor& PolicyParams::at(const std::string& name) {
  for (auto& [n, t] : tensors)
    if (n == name) return t;
  throw ParamsCorrupt("policy: missing tensor '" + name + "'");
}

const Tensor& PolicyParams::at(const std::string& name) const {
  return const_cast<PolicyParams*>(this)->at(name);
}

int64_t PolicyParams::total_params() const {
  int64_t n = 0;
  for (const auto& [name, t] : tensors) n += t.numel();
  return n;
}

namespace {

// Canonical tensor order assumed by forward/backward and the checkpoint file.
std::vector<std::pair<std::string, std::vector<int>>> canonical_layout(const NetworkSpec& s) {
  std::vector<std::pair<std::string, std::vector<int>>> layout;
  layout.push_back({"scan.conv1.w", {s.conv1_channels, 1, s.conv1_kernel}});
  layout.push_back({"scan.conv1.b", {s.conv1_channels}});
  layout.push_back({"scan.conv2.w", {s.conv2_channels, s.conv1_channels, s.conv2_kernel}});
  layout.push_back({"scan.conv2.b", {s.conv2_channels}});
  layout.push_back({"scan.fc.w", {s.scan_fc_out, s.flat_dim()}});
  layout.push_back({"scan.fc.b", {s.scan_fc_out}});
  int in = 2 * s.scan_fc_out;
  for (int i = 0; i < 3; ++i) {
    layout.push_back({"fuse.fc" + std::to_string(i + 1) + ".w", {s.fusion_widths[i], in}});
    layout.push_back({"fuse.fc" + std::to_string(i + 1) + ".b", {s.fusion_widths[i]}});
    in = s.fusion_widths[i];
  }
  in = s.fusion_widths[2] + s.proprio_dim;
  for (int i = 0; i < 8; ++i) {
    layout.push_back({"prop.fc" + std::to_string(i + 1) + ".w", {s.proprio_widths[i], in}});
    layout.push_back({"prop.fc" + std::to_string(i + 1) + ".b", {s.proprio_widths[i]}});
    in = s.proprio_widths[i];
  }
  layout.push_back({"actor.w", {s.logits_dim(), s.proprio_widths[7]}});
  layout.push_back({"actor.b", {s.logits_dim()}});
  layout.push_back({"critic.w", {1, s.proprio_widths[7]}});
  layout.push_back({"critic.b", {1}});
  return layout;
}

// Tensor indices in the canonical order.
enum TensorId {
  kConv1W = 0, kConv1B, kConv2W, kConv2B, kScanFcW, kScanFcB,
  kFuse1W, kFuse1B, kFuse2W, kFuse2B, kFuse3W, kFuse3B,
  kProp1W,  // 8 w/b pairs follow
  kActorW = 28, kActorB, kCriticW, kCriticB,
  kTensorCount = 32,
};

void orthogonal_fill(Tensor& t, double gain, Rng& rng) {
  int rows = t.shape[0];
  int cols = static_cast<int>(t.numel() / rows);
  // Orthonormalize along the shorter dimension (modified Gram-Schmidt).
  bool by_rows = rows <= cols;
  int nvec = by_rows ? rows : cols;
  int dim = by_rows ? cols : rows;
  std::vector<std::vector<double>> v(nvec, std::vector<double>(dim));
  for (auto& row : v)
    for (double& x : row) x = rng.normal();
  for (int i = 0; i < nvec; ++i) {
    for (int j = 0; j < i; ++j) {
      double proj = 0.0;
      for (int k = 0; k < dim; ++k) proj += v[i][k] * v[j][k];
      for (int k = 0; k < dim; ++k) v[i][k] -= proj * v[j][k];
    }
    double n = 0.0;
    for (double x : v[i]) n += x * x;
    n = std::sqrt(n);
    for (double& x : v[i]) x /= n;
  }
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double x = by_rows ? v[r][c] : v[c][r];
      t.data[static_cast<size_t>(r) * cols + c] = static_cast<float>(gain * x);
    }
}

inline void dense_forward(const float* w, const float* b, const float* x, float* y, int n_out,
                          int n_in) {
  for (int o = 0; o < n_out; ++o) {
    const float* wr = w + static_cast<size_t>(o) * n_in;
    float acc = b[o];
    for (int i = 0; i < n_in; ++i) acc += wr[i] * x[i];
    y[o] = acc;
  }
}

// dy is consumed; dx must be zeroed by the caller beforehand.
inline void dense_backward(const float* w, const float* x, const float* dy, float* dx, float* dw,
                           float* db, int n_out, int n_in) {
  for (int o = 0; o < n_out; ++o) {
    const float dyo = dy[o];
    db[o] += dyo;
    const float* wr = w + static_cast<size_t>(o) * n_in;
    float* gwr = dw + static_cast<size_t>(o) * n_in;
    for (int i = 0; i < n_in; ++i) {
      dx[i] += wr[i] * dyo;
      gwr[i] += x[i] * dyo;
    }
  }
}

inline void leaky_inplace(float* y, int n, float slope) {
  for (int i = 0; i < n; ++i) y[i] = y[i] > 0.0f ? y[i] : slope * y[i];
}

// Mask derived from the post-activation sign (slope > 0 preserves it).
inline void leaky_backward_inplace(float* dy, const float* y, int n, float slope) {
  for (int i = 0; i < n; ++i) dy[i] *= y[i] > 0.0f ? 1.0f : slope;
}

}  // namespace

PolicyParams init_policy(const NetworkSpec& spec, uint64_t seed) {
  spec.validate();
  PolicyParams p;
  p.spec = spec;
  Rng rng(seed);
  for (const auto& [name, shape] : canonical_layout(spec)) {
    Tensor t;
    t.shape = shape;
    t.data.assign(t.numel(), 0.0f);
    p.tensors.emplace_back(name, std::move(t));
  }
  for (auto& [name, t] : p.tensors) {
    if (name.ends_with(".b")) continue;
    double gain = std::sqrt(2.0);
    if (name == "actor.w") gain = 0.01;
    if (name == "critic.w") gain = 1.0;
    orthogonal_fill(t, gain, rng);
  }
  return p;
}

PolicyGradients::PolicyGradients(const PolicyParams& p) {
  tensors.reserve(p.tensors.size());
  for (const auto& [name, t] : p.tensors) {
    Tensor g;
    g.shape = t.shape;
    g.data.assign(t.numel(), 0.0f);
    tensors.push_back(std::move(g));
  }
}

void PolicyGradients::zero() {
  for (Tensor& t : tensors) std::fill(t.data.begin(), t.data.end(), 0.0f);
}

double PolicyGradients::global_norm() const {
  double sq = 0.0;
  for (const Tensor& t : tensors)
    for (float g : t.data) sq += static_cast<double>(g) * g;
  return std::sqrt(sq);
}

void PolicyGradients::scale(float s) {
  for (Tensor& t : tensors)
    for (float& g : t.data) g *= s;
}

PolicyWorkspace::PolicyWorkspace(const NetworkSpec& s) : spec(s) {
  conv1_act.assign(2 * s.conv1_channels * s.conv1_out(), 0.0f);
  pool1_act.assign(2 * s.conv1_channels * s.pool1_out(), 0.0f);
  pool1_idx.assign(pool1_act.size(), 0);
  conv2_act.assign(2 * s.conv2_channels * s.conv2_out(), 0.0f);
  pool2_act.assign(2 * s.conv2_channels * s.pool2_out(), 0.0f);
  pool2_idx.assign(pool2_act.size(), 0);
  fuse_in.assign(2 * s.scan_fc_out, 0.0f);
  for (int i = 0; i < 3; ++i) fuse_act[i].assign(s.fusion_widths[i], 0.0f);
  prop_in.assign(s.fusion_widths[2] + s.proprio_dim, 0.0f);
  for (int i = 0; i < 8; ++i) prop_act[i].assign(s.proprio_widths[i], 0.0f);
  logits.assign(s.logits_dim(), 0.0f);
  scan_in.assign(2 * s.n_beams, 0.0f);
  proprio_in.assign(s.proprio_dim, 0.0f);
  d_conv1.assign(conv1_act.size(), 0.0f);
  d_pool1.assign(pool1_act.size(), 0.0f);
  d_conv2.assign(conv2_act.size(), 0.0f);
  d_pool2.assign(pool2_act.size(), 0.0f);
  d_fuse_in.assign(fuse_in.size(), 0.0f);
  for (int i = 0; i < 3; ++i) d_fuse[i].assign(s.fusion_widths[i], 0.0f);
  d_prop_in.assign(prop_in.size(), 0.0f);
  for (int i = 0; i < 8; ++i) d_prop[i].assign(s.proprio_widths[i], 0.0f);
}

void forward(const PolicyParams& p, std::span<const float> obs, PolicyWorkspace& ws,
             float* logits_out, float* value_out) {
  const NetworkSpec& s = p.spec;
  if (static_cast<int>(obs.size()) != s.obs_dim())
    throw ParamsCorrupt("policy: observation length mismatch");
  if (static_cast<int>(p.tensors.size()) != kTensorCount || !(ws.spec == s))
    throw ParamsCorrupt("policy: parameter store does not match network spec");

  std::memcpy(ws.scan_in.data(), obs.data(), sizeof(float) * 2 * s.n_beams);
  std::memcpy(ws.proprio_in.data(), obs.data() + 2 * s.n_beams, sizeof(float) * s.proprio_dim);

  const float* conv1_w = p.tensors[kConv1W].second.data.data();
  const float* conv1_b = p.tensors[kConv1B].second.data.data();
  const float* conv2_w = p.tensors[kConv2W].second.data.data();
  const float* conv2_b = p.tensors[kConv2B].second.data.data();
  const float* fc_w = p.tensors[kScanFcW].second.data.data();
  const float* fc_b = p.tensors[kScanFcB].second.data.data();

  const int c1 = s.conv1_channels, t1 = s.conv1_out(), k1 = s.conv1_kernel;
  const int p1 = s.pool1_out();
  const int c2 = s.conv2_channels, t2 = s.conv2_out(), k2 = s.conv2_kernel;
  const int p2 = s.pool2_out();

  // Shared-weight scan branch, applied to the front and rear scan in turn.
  for (int scan = 0; scan < 2; ++scan) {
    const float* x = ws.scan_in.data() + scan * s.n_beams;
    float* a1 = ws.conv1_act.data() + scan * c1 * t1;
    for (int oc = 0; oc < c1; ++oc) {
      for (int t = 0; t < t1; ++t) {
        const float* xt = x + t * s.conv1_stride;
        const float* wr = conv1_w + oc * k1;
        float acc = conv1_b[oc];
        for (int j = 0; j < k1; ++j) acc += wr[j] * xt[j];
        a1[oc * t1 + t] = acc;
      }
    }
    leaky_inplace(a1, c1 * t1, s.leaky_slope);

    float* q1 = ws.pool1_act.data() + scan * c1 * p1;
    uint8_t* i1 = ws.pool1_idx.data() + scan * c1 * p1;
    for (int c = 0; c < c1; ++c) {
      for (int t = 0; t < p1; ++t) {
        float v0 = a1[c * t1 + 2 * t], v1 = a1[c * t1 + 2 * t + 1];
        q1[c * p1 + t] = v0 >= v1 ? v0 : v1;
        i1[c * p1 + t] = v0 >= v1 ? 0 : 1;
      }
    }

    float* a2 = ws.conv2_act.data() + scan * c2 * t2;
    for (int oc = 0; oc < c2; ++oc) {
      for (int t = 0; t < t2; ++t) {
        float acc = conv2_b[oc];
        const float* wr = conv2_w + oc * c1 * k2;
        for (int ic = 0; ic < c1; ++ic) {
          const float* xr = q1 + ic * p1 + t * s.conv2_stride;
          for (int j = 0; j < k2; ++j) acc += wr[ic * k2 + j] * xr[j];
        }
        a2[oc * t2 + t] = acc;
      }
    }
    leaky_inplace(a2, c2 * t2, s.leaky_slope);

    float* q2 = ws.pool2_act.data() + scan * c2 * p2;
    uint8_t* i2 = ws.pool2_idx.data() + scan * c2 * p2;
    for (int c = 0; c < c2; ++c) {
      for (int t = 0; t < p2; ++t) {
        float v0 = a2[c * t2 + 2 * t], v1 = a2[c * t2 + 2 * t + 1];
        q2[c * p2 + t] = v0 >= v1 ? v0 : v1;
        i2[c * p2 + t] = v0 >= v1 ? 0 : 1;
      }
    }

    float* out = ws.fuse_in.data() + scan * s.scan_fc_out;
    dense_forward(fc_w, fc_b, q2, out, s.scan_fc_out, s.flat_dim());
    leaky_inplace(out, s.scan_fc_out, s.leaky_slope);
  }

  const float* in = ws.fuse_in.data();
  int in_dim = 2 * s.scan_fc_out;
  for (int i = 0; i < 3; ++i) {
    const Tensor& w = p.tensors[kFuse1W + 2 * i].second;
    const Tensor& b = p.tensors[kFuse1B + 2 * i].second;
    dense_forward(w.data.data(), b.data.data(), in, ws.fuse_act[i].data(), s.fusion_widths[i],
                  in_dim);
    leaky_inplace(ws.fuse_act[i].data(), s.fusion_widths[i], s.leaky_slope);
    in = ws.fuse_act[i].data();
    in_dim = s.fusion_widths[i];
  }

  std::memcpy(ws.prop_in.data(), ws.fuse_act[2].data(), sizeof(float) * s.fusion_widths[2]);
  std::memcpy(ws.prop_in.data() + s.fusion_widths[2], ws.proprio_in.data(),
              sizeof(float) * s.proprio_dim);

  in = ws.prop_in.data();
  in_dim = s.fusion_widths[2] + s.proprio_dim;
  for (int i = 0; i < 8; ++i) {
    const Tensor& w = p.tensors[kProp1W + 2 * i].second;
    const Tensor& b = p.tensors[kProp1W + 2 * i + 1].second;
    dense_forward(w.data.data(), b.data.data(), in, ws.prop_act[i].data(), s.proprio_widths[i],
                  in_dim);
    leaky_inplace(ws.prop_act[i].data(), s.proprio_widths[i], s.leaky_slope);
    in = ws.prop_act[i].data();
    in_dim = s.proprio_widths[i];
  }

  dense_forward(p.tensors[kActorW].second.data.data(), p.tensors[kActorB].second.data.data(), in,
                ws.logits.data(), s.logits_dim(), in_dim);
  float value = 0.0f;
  dense_forward(p.tensors[kCriticW].second.data.data(), p.tensors[kCriticB].second.data.data(), in,
                &value, 1, in_dim);
  ws.value = value;
  if (logits_out) std::memcpy(logits_out, ws.logits.data(), sizeof(float) * s.logits_dim());
  if (value_out) *value_out = value;
}

void backward(const PolicyParams& p, PolicyWorkspace& ws, std::span<const float> dlogits,
              float dvalue, PolicyGradients& grads) {
  const NetworkSpec& s = p.spec;
  assert(static_cast<int>(dlogits.size()) == s.logits_dim());

  auto W = [&](int id) { return p.tensors[id].second.data.data(); };
  auto GW = [&](int id) { return grads.tensors[id].data.data(); };

  const int trunk = s.proprio_widths[7];
  std::vector<float>& d_trunk = ws.d_prop[7];
  std::fill(d_trunk.begin(), d_trunk.end(), 0.0f);
  dense_backward(W(kActorW), ws.prop_act[7].data(), dlogits.data(), d_trunk.data(), GW(kActorW),
                 GW(kActorB), s.logits_dim(), trunk);
  dense_backward(W(kCriticW), ws.prop_act[7].data(), &dvalue, d_trunk.data(), GW(kCriticW),
                 GW(kCriticB), 1, trunk);

  // Proprio chain, last layer to first.
  for (int i = 7; i >= 0; --i) {
    leaky_backward_inplace(ws.d_prop[i].data(), ws.prop_act[i].data(), s.proprio_widths[i],
                           s.leaky_slope);
    const float* x;
    float* dx;
    int in_dim;
    if (i == 0) {
      x = ws.prop_in.data();
      dx = ws.d_prop_in.data();
      in_dim = s.fusion_widths[2] + s.proprio_dim;
      std::fill(ws.d_prop_in.begin(), ws.d_prop_in.end(), 0.0f);
    } else {
      x = ws.prop_act[i - 1].data();
      dx = ws.d_prop[i - 1].data();
      in_dim = s.proprio_widths[i - 1];
      std::fill(ws.d_prop[i - 1].begin(), ws.d_prop[i - 1].end(), 0.0f);
    }
    dense_backward(W(kProp1W + 2 * i), x, ws.d_prop[i].data(), dx, GW(kProp1W + 2 * i),
                   GW(kProp1W + 2 * i + 1), s.proprio_widths[i], in_dim);
  }

  std::memcpy(ws.d_fuse[2].data(), ws.d_prop_in.data(), sizeof(float) * s.fusion_widths[2]);

  for (int i = 2; i >= 0; --i) {
    leaky_backward_inplace(ws.d_fuse[i].data(), ws.fuse_act[i].data(), s.fusion_widths[i],
                           s.leaky_slope);
    const float* x;
    float* dx;
    int in_dim;
    if (i == 0) {
      x = ws.fuse_in.data();
      dx = ws.d_fuse_in.data();
      in_dim = 2 * s.scan_fc_out;
      std::fill(ws.d_fuse_in.begin(), ws.d_fuse_in.end(), 0.0f);
    } else {
      x = ws.fuse_act[i - 1].data();
      dx = ws.d_fuse[i - 1].data();
      in_dim = s.fusion_widths[i - 1];
      std::fill(ws.d_fuse[i - 1].begin(), ws.d_fuse[i - 1].end(), 0.0f);
    }
    dense_backward(W(kFuse1W + 2 * i), x, ws.d_fuse[i].data(), dx, GW(kFuse1W + 2 * i),
                   GW(kFuse1B + 2 * i), s.fusion_widths[i], in_dim);
  }

  const int c1 = s.conv1_channels, t1 = s.conv1_out(), k1 = s.conv1_kernel;
  const int p1 = s.pool1_out();
  const int c2 = s.conv2_channels, t2 = s.conv2_out(), k2 = s.conv2_kernel;
  const int p2 = s.pool2_out();

  std::fill(ws.d_conv1.begin(), ws.d_conv1.end(), 0.0f);
  std::fill(ws.d_pool1.begin(), ws.d_pool1.end(), 0.0f);
  std::fill(ws.d_conv2.begin(), ws.d_conv2.end(), 0.0f);
  std::fill(ws.d_pool2.begin(), ws.d_pool2.end(), 0.0f);

  for (int scan = 0; scan < 2; ++scan) {
    float* d_fc_out = ws.d_fuse_in.data() + scan * s.scan_fc_out;
    leaky_backward_inplace(d_fc_out, ws.fuse_in.data() + scan * s.scan_fc_out, s.scan_fc_out,
                           s.leaky_slope);
    const float* q2 = ws.pool2_act.data() + scan * c2 * p2;
    float* dq2 = ws.d_pool2.data() + scan * c2 * p2;
    dense_backward(W(kScanFcW), q2, d_fc_out, dq2, GW(kScanFcW), GW(kScanFcB), s.scan_fc_out,
                   s.flat_dim());

    const float* a2 = ws.conv2_act.data() + scan * c2 * t2;
    float* da2 = ws.d_conv2.data() + scan * c2 * t2;
    const uint8_t* i2 = ws.pool2_idx.data() + scan * c2 * p2;
    for (int c = 0; c < c2; ++c)
      for (int t = 0; t < p2; ++t) da2[c * t2 + 2 * t + i2[c * p2 + t]] = dq2[c * p2 + t];
    leaky_backward_inplace(da2, a2, c2 * t2, s.leaky_slope);

    const float* q1 = ws.pool1_act.data() + scan * c1 * p1;
    float* dq1 = ws.d_pool1.data() + scan * c1 * p1;
    for (int oc = 0; oc < c2; ++oc) {
      const float* wr = W(kConv2W) + oc * c1 * k2;
      float* gwr = GW(kConv2W) + oc * c1 * k2;
      for (int t = 0; t < t2; ++t) {
        const float dyo = da2[oc * t2 + t];
        GW(kConv2B)[oc] += dyo;
        for (int ic = 0; ic < c1; ++ic) {
          const float* xr = q1 + ic * p1 + t * s.conv2_stride;
          float* dxr = dq1 + ic * p1 + t * s.conv2_stride;
          for (int j = 0; j < k2; ++j) {
            dxr[j] += wr[ic * k2 + j] * dyo;
            gwr[ic * k2 + j] += xr[j] * dyo;
          }
        }
      }
    }

    const float* a1 = ws.conv1_act.data() + scan * c1 * t1;
    float* da1 = ws.d_conv1.data() + scan * c1 * t1;
    const uint8_t* i1 = ws.pool1_idx.data() + scan * c1 * p1;
    for (int c = 0; c < c1; ++c)
      for (int t = 0; t < p1; ++t) da1[c * t1 + 2 * t + i1[c * p1 + t]] = dq1[c * p1 + t];
    leaky_backward_inplace(da1, a1, c1 * t1, s.leaky_slope);

    const float* x = ws.scan_in.data() + scan * s.n_beams;
    for (int oc = 0; oc < c1; ++oc) {
      float* gwr = GW(kConv1W) + oc * k1;
      for (int t = 0; t < t1; ++t) {
        const float dyo = da1[oc * t1 + t];
        GW(kConv1B)[oc] += dyo;
        const float* xt = x + t * s.conv1_stride;
        for (int j = 0; j < k1; ++j) gwr[j] += xt[j] * dyo;
      }
    }
  }
}

Action sample_action(std::span<const float> logits, Rng& rng, double* logprob) {
  Action a{};
  double lp = 0.0;
  for (int b = 0; b < 5; ++b) {
    const float* z = logits.data() + 5 * b;
    double zmax = z[0];
    for (int i = 1; i < 5; ++i) zmax = std::max(zmax, static_cast<double>(z[i]));
    double e[5], sum = 0.0;
    for (int i = 0; i < 5; ++i) {
      e[i] = std::exp(z[i] - zmax);
      sum += e[i];
    }
    double r = rng.uniform() * sum;
    int idx = 4;
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) {
      acc += e[i];
      if (r < acc) {
        idx = i;
        break;
      }
    }
    a[b] = idx;
    lp += std::log(e[idx] / sum);
  }
  if (logprob) *logprob = lp;
  return a;
}

Action argmax_action(std::span<const float> logits) {
  Action a{};
  for (int b = 0; b < 5; ++b) {
    const float* z = logits.data() + 5 * b;
    int best = 0;
    for (int i = 1; i < 5; ++i)
      if (z[i] > z[best]) best = i;
    a[b] = best;
  }
  return a;
}

void logprob_entropy(std::span<const float> logits, const Action& a, double* logprob,
                     double* entropy) {
  double lp = 0.0, ent = 0.0;
  for (int b = 0; b < 5; ++b) {
    const float* z = logits.data() + 5 * b;
    double zmax = z[0];
    for (int i = 1; i < 5; ++i) zmax = std::max(zmax, static_cast<double>(z[i]));
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) sum += std::exp(z[i] - zmax);
    double log_sum = std::log(sum);
    lp += z[a[b]] - zmax - log_sum;
    for (int i = 0; i < 5; ++i) {
      double ls = z[i] - zmax - log_sum;
      ent -= std::exp(ls) * ls;
    }
  }
  if (logprob) *logprob = lp;
  if (entropy) *entropy = ent;
}

namespace {

constexpr char kMagic[4] = {'W', 'B', 'C', '1'};
constexpr uint32_t kFormatVersion = 1;

template <typename T>
void append(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_value(const std::string& buf, size_t* off) {
  if (*off + sizeof(T) > buf.size()) throw ParamsCorrupt("checkpoint: unexpected end of data");
  T v;
  std::memcpy(&v, buf.data() + *off, sizeof(T));
  *off += sizeof(T);
  return v;
}

}  // namespace

void save_policy(const PolicyParams& p, const std::string& path) {
  // Little-endian layout, matching the x86 hosts this ships on.
  std::string buf;
  buf.append(kMagic, 4);
  append(buf, kFormatVersion);
  append(buf, static_cast<uint32_t>(p.tensors.size()));
  for (const auto& [name, t] : p.tensors) {
    append(buf, static_cast<uint16_t>(name.size()));
    buf.append(name);
    append(buf, static_cast<uint8_t>(t.shape.size()));
    for (int d : t.shape) append(buf, static_cast<uint32_t>(d));
    buf.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(float));
  }
  uint32_t crc = crc32(buf.data(), buf.size());
  append(buf, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("checkpoint: short write to '" + path + "'");
}

PolicyParams load_policy(const std::string& path, const NetworkSpec& expected_spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 16) throw ChecksumError("checkpoint: file too short");

  uint32_t stored_crc;
  std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
  if (crc32(buf.data(), buf.size() - 4) != stored_crc)
    throw ChecksumError("checkpoint: CRC mismatch");
  buf.resize(buf.size() - 4);

  size_t off = 0;
  if (std::memcmp(buf.data(), kMagic, 4) != 0) throw ParamsCorrupt("checkpoint: bad magic");
  off = 4;
  uint32_t version = read_value<uint32_t>(buf, &off);
  if (version != kFormatVersion) throw ParamsCorrupt("checkpoint: unsupported format version");
  uint32_t count = read_value<uint32_t>(buf, &off);

  PolicyParams p;
  p.spec = expected_spec;
  for (uint32_t i = 0; i < count; ++i) {
    uint16_t name_len = read_value<uint16_t>(buf, &off);
    if (off + name_len > buf.size()) throw ParamsCorrupt("checkpoint: unexpected end of data");
    std::string name(buf.data() + off, name_len);
    off += name_len;
    Tensor t;
    uint8_t rank = read_value<uint8_t>(buf, &off);
    for (int d = 0; d < rank; ++d) t.shape.push_back(static_cast<int>(read_value<uint32_t>(buf, &off)));
    int64_t n = t.numel();
    if (off + n * sizeof(float) > buf.size()) throw ParamsCorrupt("checkpoint: unexpected end of data");
    t.data.resize(n);
    std::memcpy(t.data.data(), buf.data() + off, n * sizeof(float));
    off += n * sizeof(float);
    for (float v : t.data)
      if (!std::isfinite(v)) throw ParamsCorrupt("checkpoint: non-finite value in '" + name + "'");
    p.tensors.emplace_back(std::move(name), std::move(t));
  }

  auto expected = canonical_layout(expected_spec);
  if (p.tensors.size() != expected.size())
    throw ParamsCorrupt("checkpoint: tensor count does not match network spec");
  for (size_t i = 0; i < expected.size(); ++i) {
    if (p.tensors[i].first != expected[i].first || p.tensors[i].second.shape != expected[i].second)
      throw ParamsCorrupt("checkpoint: tensor '" + p.tensors[i].first +
                          "' does not match network spec shape");
  }
  return p;
}

}  // namespace wbc
