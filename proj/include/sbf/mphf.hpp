#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sbf/hash.hpp"

namespace sbf {

// Minimal perfect hash over a static set of 128-bit key hashes, built by
// hash-and-displace: keys are bucketed by the low hash word (about four keys
// per bucket), and each bucket stores a 16-bit displacement seed that sends
// all of its keys to distinct slots in [0, n).
class Mphf {
 public:
  static constexpr std::uint64_t kKeysPerBucket = 4;
  static constexpr std::uint32_t kSeedCount = 1u << 16;

  Mphf() = default;
  Mphf(std::uint64_t n_keys, std::vector<std::uint16_t> seeds);

  // Returns std::nullopt when some bucket cannot be placed (including when two
  // inputs share a full 128-bit hash); callers retry with a new hash seed.
  static std::optional<Mphf> build(std::span<const Hash128> hashes);

  std::uint64_t slot(const Hash128& h) const noexcept {
    const std::uint64_t bucket = fast_range(h.lo, seeds_.size());
    return slot_for(h, seeds_[bucket], n_);
  }

  std::uint64_t size() const noexcept { return n_; }
  std::uint64_t bucket_count() const noexcept { return seeds_.size(); }
  const std::vector<std::uint16_t>& seeds() const noexcept { return seeds_; }

  static std::uint64_t bucket_count_for(std::uint64_t n_keys) noexcept {
    return n_keys == 0 ? 0 : (n_keys + kKeysPerBucket - 1) / kKeysPerBucket;
  }

  static std::uint64_t slot_for(const Hash128& h, std::uint32_t seed, std::uint64_t n) noexcept {
    return fast_range(mix64(h.hi ^ (seed * 0xD6E8FEB86659FD93ULL)), n);
  }

 private:
  std::uint64_t n_ = 0;
  std::vector<std::uint16_t> seeds_;
};

}  // namespace sbf
