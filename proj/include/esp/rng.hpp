#pragma once

#include <cstdint>

namespace esp {

/// splitmix64-based generator with a platform-independent draw sequence.
/// std::uniform_*_distribution is implementation-defined, so everything
/// that must be byte-reproducible (splits, synthetic suites) draws from
/// this instead.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// [lo, hi)
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  /// [0, n); the modulo bias is irrelevant at the scales used here
  uint64_t bounded(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  /// [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(bounded(static_cast<uint64_t>(hi - lo) + 1));
  }

 private:
  uint64_t state_;
};

}  // namespace esp
