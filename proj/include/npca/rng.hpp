// Named, independently seeded random streams.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace npca {

/// Stream kinds used when deriving per-entity seeds from the master seed.
enum class StreamKind : std::uint64_t { Station = 1, Obss = 2 };

/// Derives the seed of stream (kind, id) from a master seed with a SplitMix64
/// finalizer, so streams do not depend on construction order.
std::uint64_t derive_seed(std::uint64_t master, StreamKind kind, std::uint64_t id);

/// Thin wrapper over mt19937_64. The sampling helpers are written out here
/// instead of using <random> distributions, whose output differs between
/// standard library implementations.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t master, StreamKind kind, std::uint64_t id)
      : engine_(derive_seed(master, kind, id)) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t uniform_below(std::uint64_t bound);
  /// Number of Bernoulli(p) trials up to and including the first success (>= 1).
  /// Requires 0 < p <= 1.
  std::int64_t geometric_trials(double p);

private:
  std::mt19937_64 engine_;
};

}  // namespace npca
