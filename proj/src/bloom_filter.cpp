#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "sbf/filters.hpp"

namespace sbf {

std::uint32_t BloomFilter::optimal_hash_count(std::uint64_t total_bits,
                                              std::uint64_t n_keys) noexcept {
  if (n_keys == 0) return 1;
  const double k = std::round(std::numbers::ln2 * static_cast<double>(total_bits) /
                              static_cast<double>(n_keys));
  return static_cast<std::uint32_t>(std::clamp(k, 1.0, static_cast<double>(kMaxHashes)));
}

BloomFilter BloomFilter::build(const KeySet& keys, std::uint64_t total_bits, std::uint64_t seed) {
  BloomFilter f;
  f.bit_count_ = total_bits;
  f.n_keys_ = keys.size();
  f.seed_ = seed;
  f.k_ = optimal_hash_count(total_bits, keys.size());
  f.words_.assign((total_bits + 63) / 64, 0);
  if (total_bits == 0) return f;
  for (const Key& key : keys) {
    const Hash128 h = hash128(key.bytes(), seed);
    for (std::uint32_t i = 0; i < f.k_; ++i) {
      const std::uint64_t bit = (h.lo + i * h.hi) % total_bits;
      f.words_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
    }
  }
  return f;
}

bool BloomFilter::contains(std::string_view key) const noexcept {
  if (n_keys_ == 0) return false;
  if (bit_count_ == 0) return true;
  const Hash128 h = hash128(key, seed_);
  for (std::uint32_t i = 0; i < k_; ++i) {
    const std::uint64_t bit = (h.lo + i * h.hi) % bit_count_;
    if ((words_[bit >> 6] & (std::uint64_t{1} << (bit & 63))) == 0) return false;
  }
  return true;
}

void BloomFilter::write_payload(ByteWriter& out) const {
  out.put_u64(bit_count_);
  out.put_u8(static_cast<std::uint8_t>(k_));
  for (std::uint64_t w : words_) out.put_u64(w);
}

BloomFilter BloomFilter::read_payload(ByteReader& in, std::uint64_t seed, std::uint64_t n_keys) {
  BloomFilter f;
  f.seed_ = seed;
  f.n_keys_ = n_keys;
  f.bit_count_ = in.get_u64();
  f.k_ = in.get_u8();
  if (f.k_ < 1 || f.k_ > kMaxHashes) {
    throw FormatError(FormatErrorCode::kInvalidField, fmt::format("hash count {}", f.k_));
  }
  const std::uint64_t n_words = f.bit_count_ / 64 + (f.bit_count_ % 64 != 0 ? 1 : 0);
  if (n_words > in.remaining() / 8) {
    throw FormatError(FormatErrorCode::kTruncated,
                      fmt::format("bit array of {} bits exceeds input", f.bit_count_));
  }
  f.words_.resize(n_words);
  for (auto& w : f.words_) w = in.get_u64();
  return f;
}

}  // namespace sbf
