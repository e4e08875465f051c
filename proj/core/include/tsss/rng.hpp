#pragma once

#include <cstdint>
#include <random>

namespace tsss {

/// Deterministic random stream.
///
/// Each stream is identified by (seed, index): the pair is mixed through
/// SplitMix64 to seed a std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. Uniforms take the top 53 bits; normals use the Marsaglia
/// polar method. Independent tasks (CV folds, replicates) draw from their own
/// index so results do not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal.
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace tsss
