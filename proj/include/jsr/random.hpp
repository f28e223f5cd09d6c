#pragma once

#include <cstdint>

namespace jsr {

/// Named, mutually independent streams derived from one seed.
enum class StreamId : std::uint64_t {
  kSupport = 1,
  kSlab = 2,
  kMatrix = 3,
  kNoise = 4,
  kMonteCarlo = 5,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Combine a base seed with an index (trial number, grid cell, ...).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Counter-based generator: the k-th draw is a pure function of
/// (seed, stream, k), so any element of a generated object can be recomputed
/// without replaying the draws before it. Sequential use goes through the
/// internal counter.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamId stream);
  RandomStream(std::uint64_t seed, std::uint64_t stream_tag);

  std::uint64_t bits_at(std::uint64_t counter) const;
  /// Uniform on (0, 1), 53-bit resolution, never exactly 0 or 1.
  double uniform_at(std::uint64_t counter) const;
  /// Standard normal from the uniforms at 2k and 2k+1 (Box-Muller, cosine branch).
  double normal_at(std::uint64_t k) const;

  double uniform() { return uniform_at(counter_++); }
  double normal() { return normal_at(counter_++); }
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t counter() const { return counter_; }
  void seek(std::uint64_t counter) { counter_ = counter; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace jsr
