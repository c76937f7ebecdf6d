#pragma once

#include <cstdint>

namespace qdiff {

/// Counter-based SplitMix64 stream.
///
/// Draw k of stream `seed` is a pure function of (seed, k), so realizations
/// can be generated in any order, on any thread, and reproduce bit-for-bit
/// across platforms. Realization r of an ensemble uses seed = base_seed + r.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Random access: the value the sequential generator yields at position `counter`.
  constexpr std::uint64_t at(std::uint64_t counter) const noexcept {
    return mix(seed_ + (counter + 1) * kGolden);
  }

  constexpr std::uint64_t operator()() noexcept { return at(counter_++); }

  // Uniform double in [0, 1) from the top 53 bits.
  constexpr double uniform_at(std::uint64_t counter) const noexcept {
    return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace qdiff
