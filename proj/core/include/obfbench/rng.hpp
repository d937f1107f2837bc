#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace obfbench {

__extension__ typedef unsigned __int128 uint128_t;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// FNV-1a over the bytes of a string, used to fold identifiers into keys.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Combine a parent key with a child discriminator.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t child) noexcept {
  return mix64(parent ^ mix64(child + 0x9e3779b97f4a7c15ull));
}

/**
 * Counter-based splittable random stream.
 *
 * The n-th draw is mix64(key + n * gamma), so a stream is fully described by
 * its key and position. Substreams are derived from the key alone, never from
 * draws, which keeps results independent of the order in which substreams are
 * consumed.
 */
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr RandomStream(std::uint64_t key) noexcept : key_(mix64(key)) {}

  /// Independent child stream identified by an integer tag.
  [[nodiscard]] constexpr RandomStream split(std::uint64_t tag) const noexcept {
    return RandomStream(derive_key(key_, tag));
  }
  /// Independent child stream identified by a string tag.
  [[nodiscard]] constexpr RandomStream split(std::string_view tag) const noexcept {
    return split(fnv1a64(tag));
  }

  constexpr std::uint64_t next() noexcept {
    return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ull);
  }
  constexpr std::uint64_t operator()() noexcept { return next(); }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept {
    return std::numeric_limits<std::uint64_t>::max();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Always consumes exactly one draw. p <= 0 is never true, p >= 1 always.
  constexpr bool bernoulli(double p) noexcept { return uniform01() < p; }

  /// Uniform integer in [0, bound) via Lemire's multiply-and-reject. bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    uint128_t m = static_cast<uint128_t>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<uint128_t>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform integer in the closed range [lo, hi]; lo <= hi.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept {
    const std::uint64_t span = hi - lo;
    if (span == std::numeric_limits<std::uint64_t>::max()) return next();
    return lo + below(span + 1);
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace obfbench
