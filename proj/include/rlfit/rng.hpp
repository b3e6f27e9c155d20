#pragma once

#include <cstdint>
#include <random>

namespace rlfit {

/// Deterministic random source. All draws go through explicit transforms of
/// the raw mt19937_64 output so that sequences are identical across
/// platforms and standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n); n must be positive. Rejection sampled, no
  /// modulo bias.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal via Box-Muller (no cached second value).
  double gaussian();

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent substream seed from a master seed and two salts.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t salt_a, std::uint64_t salt_b = 0);

}  // namespace rlfit
