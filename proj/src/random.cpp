#include "jsr/random.hpp"

#include <cmath>
#include <numbers>

namespace jsr {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(mix64(base + kGolden) ^ mix64(index * kGolden + 0x632BE59BD9B4E019ULL));
}

RandomStream::RandomStream(std::uint64_t seed, StreamId stream)
    : RandomStream(seed, static_cast<std::uint64_t>(stream)) {}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_tag)
    : key_(derive_seed(seed, stream_tag)) {}

std::uint64_t RandomStream::bits_at(std::uint64_t counter) const {
  return mix64(key_ + (counter + 1) * kGolden);
}

double RandomStream::uniform_at(std::uint64_t counter) const {
  // (k + 0.5) / 2^53 keeps the result strictly inside (0, 1).
  const std::uint64_t k = bits_at(counter) >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal_at(std::uint64_t k) const {
  const double u1 = uniform_at(2 * k);
  const double u2 = uniform_at(2 * k + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace jsr
