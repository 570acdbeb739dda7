#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sbf/key.hpp"

namespace sbf::testing {

// Distinct random keys of a fixed length whose first byte is `tag`, so that
// sets generated with different tags never intersect.
inline KeySet random_keys(std::size_t count, std::size_t length, std::uint64_t seed,
                          char tag = '\x01') {
  std::mt19937_64 rng(seed);
  std::vector<Key> keys;
  keys.reserve(count);
  std::string buf(length, '\0');
  for (std::size_t i = 0; i < count; ++i) {
    buf[0] = tag;
    for (std::size_t j = 1; j < length; ++j) buf[j] = static_cast<char>(rng());
    keys.emplace_back(buf);
  }
  return KeySet(std::move(keys));
}

inline double binomial_sigma(double p, double trials) { return std::sqrt(p * (1 - p) / trials); }

}  // namespace sbf::testing
