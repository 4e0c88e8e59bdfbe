#pragma once

#include <cstdint>

namespace stochsort {

/// SplitMix64 (Steele, Lea, Flood 2014). The whole state is one 64-bit word,
/// advanced by the golden-ratio increment 0x9E3779B97F4A7C15 and finalized
/// with the shifts 30/27/31 and multipliers 0xBF58476D1CE4E5B9 and
/// 0x94D049BB133111EB. Any language with 64-bit wrapping arithmetic
/// reproduces the stream bit for bit.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t operator()() { return next(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by 128-bit multiply-high (no rejection;
  /// bias is below bound / 2^64).
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

/// Seed of trial `index` under a run seed.
inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  return seed ^ index;
}

}  // namespace stochsort
