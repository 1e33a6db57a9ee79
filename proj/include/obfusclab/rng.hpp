#pragma once

#include <cstdint>
#include <string_view>

namespace obfusclab {

// SplitMix64 (Steele, Lea, Flood 2014). Every randomized decision in the
// toolkit draws from one of these, seeded explicitly, so outputs are
// reproducible across platforms and implementations.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform-ish draw in [0, bound); bound must be nonzero. Plain modulo, so
  // the mapping is trivial to replicate elsewhere.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

  // Inclusive range [lo, hi].
  constexpr std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  constexpr bool chance(std::uint64_t numerator, std::uint64_t denominator) noexcept {
    return below(denominator) < numerator;
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a parent seed and a label, e.g. a
// per-sample seed from the run seed and the sample name.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  SplitMix64 mix(seed ^ (salt * 0xD6E8FEB86659FD93ULL));
  return mix.next();
}

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace obfusclab
