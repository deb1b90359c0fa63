#pragma once

#include <cstdint>
#include <random>

namespace bdar {

/// Seedable random stream. split() derives an independent child stream from
/// (seed, stream id) so replicas get reproducible, non-overlapping streams
/// regardless of which thread runs them.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::uint64_t stream) const;

  /// Uniform on {0, ..., bound - 1}; bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Uniform on [0, 1).
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace bdar
