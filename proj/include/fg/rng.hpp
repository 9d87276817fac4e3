#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace fg {

// Counter-based 64-bit generator. Draw i is the SplitMix64 finalizer applied
// to key + (i+1)*gamma, so a stream is a pure function of (key, counter) and
// reproduces bit-identically on any platform. Streams can be split by purpose
// ("init", "noise", "shuffle", ...) without sharing state with the parent.
class Rng {
 public:
  explicit Rng(uint64_t seed) : key_(seed) {}

  uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // uniform integer in [0, n); n must be > 0
  uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

  // Box-Muller; always consumes exactly two draws
  double gaussian() {
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double gaussian(double mean, double std) { return mean + std * gaussian(); }

  // multiplicative log-normal factor with log-std sigma
  double log_normal_factor(double sigma) { return std::exp(sigma * gaussian()); }

  Rng split(uint64_t tag) const { return Rng(mix64(key_ ^ mix64(tag + kGamma))); }
  Rng split(std::string_view purpose) const { return split(fnv1a(purpose)); }

  static uint64_t mix64(uint64_t z) {
    z += kGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
    return h;
  }

  // deterministic per-scenario stream id, e.g. derive(seed, object, trial)
  static uint64_t derive(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    return mix64(seed ^ mix64(a ^ mix64(b ^ mix64(c))));
  }

 private:
  static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace fg
