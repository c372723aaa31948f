#pragma once

#include <cstdint>

namespace detvlm::util {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Value at `position` (1-based) of the SplitMix64 stream started from `seed`.
constexpr std::uint64_t splitmix_at(std::uint64_t seed, std::uint64_t position) noexcept {
  return mix64(seed + position * kGoldenGamma);
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1], safe for log().
constexpr double to_unit_open_low(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Order-dependent combination of two 64-bit values.
constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ (mix64(b) + kGoldenGamma + (a << 6) + (a >> 2)));
}

}  // namespace detvlm::util
