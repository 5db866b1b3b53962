#pragma once

#include <cstdint>

namespace projlstd {

// Seed derivation and random number generation are fully pinned down so that
// every experiment is reproducible bit-for-bit from its seeds:
//
//  * sub-stream seeds come from derive_seed(), a SplitMix64-finalizer chain
//    over (seed, stream tag, index);
//  * the generator is xoshiro256++, state-initialized by four SplitMix64
//    outputs of the derived seed;
//  * uniform doubles take the top 53 bits of the next output;
//  * standard normals use the classic Box-Muller pair transform
//    (sqrt(-2 ln u1) * {cos, sin}(2 pi u2)), with the sine half cached.
//
// Trajectory sampling, projection sampling, feature generation, etc. each own
// a distinct stream tag, so they never share draws.

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Stream tags for independent sub-streams of a master seed.
enum class Stream : std::uint64_t {
  kTrajectory = 1,
  kProjection = 2,
  kFeatures = 3,
  kChainRows = 4,
  kRewards = 5,
  kVerifyDraw = 6,
  kSweepCell = 7,
  kVectors = 8,
};

/// Deterministic sub-stream seed: mix64(mix64(mix64(seed) ^ mix64(tag)) ^ mix64(index)).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_tag,
                                 std::uint64_t index = 0) {
  return mix64(mix64(mix64(seed) ^ mix64(stream_tag)) ^ mix64(index));
}

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                 std::uint64_t index = 0) {
  return derive_seed(seed, static_cast<std::uint64_t>(stream), index);
}

/// xoshiro256++ with the documented uniform/normal transforms above.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double next_double();

  /// Standard normal via Box-Muller; deterministic draw order.
  double next_gaussian();

 private:
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace projlstd
