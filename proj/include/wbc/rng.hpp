#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace wbc {

// Deterministic random stream. Distributions are hand-rolled on top of
// mt19937_64 so sequences are identical across standard library
// implementations and process restarts.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  int uniform_int(int n) { return static_cast<int>(uniform() * n) % n; }

  // Box-Muller, no cached spare: exactly two draws per sample.
  double normal(double mean = 0.0, double sigma = 1.0) {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + sigma * z;
  }

  // splitmix64 finalizer, used to derive independent sub-seeds.
  static uint64_t mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static uint64_t mix(uint64_t a, uint64_t b) { return mix(mix(a) ^ (b + 0x9e3779b97f4a7c15ULL)); }

  static uint64_t mix(uint64_t a, uint64_t b, uint64_t c) { return mix(mix(a, b), c); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wbc
