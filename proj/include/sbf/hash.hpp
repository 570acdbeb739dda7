#pragma once

#include <cstdint>
#include <string_view>

namespace sbf {

struct Hash128 {
  std::uint64_t lo;
  std::uint64_t hi;
};

// MurmurHash3 x64_128 with a 64-bit seed applied to both lanes.
Hash128 hash128(std::string_view bytes, std::uint64_t seed) noexcept;

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

__extension__ using uint128_t = unsigned __int128;

// Maps a uniform 64-bit word onto [0, n) without division.
inline std::uint64_t fast_range(std::uint64_t word, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<uint128_t>(word) * n) >> 64);
}

}  // namespace sbf
