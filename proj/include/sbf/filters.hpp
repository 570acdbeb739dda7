#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "sbf/byte_io.hpp"
#include "sbf/hash.hpp"
#include "sbf/key.hpp"
#include "sbf/mphf.hpp"

namespace sbf {

enum class FilterBackend : std::uint8_t {
  kStandardBloom = 0,
  kFingerprintPH = 1,
};

std::string_view to_string(FilterBackend backend) noexcept;

// Per-bit false-positive decay rate of a backend: a filter with j bits per
// stored key answers yes for a random non-member with probability ~alpha^j.
double alpha(FilterBackend backend) noexcept;

struct FilterConfig {
  FilterBackend backend = FilterBackend::kFingerprintPH;
  double bits_per_key = 8.0;
  std::uint64_t hash_seed = 0;
};

// Bit-array Bloom filter with k probes by double hashing over one 128-bit
// key hash. Frozen after construction.
class BloomFilter {
 public:
  static constexpr std::uint32_t kMaxHashes = 64;

  static BloomFilter build(const KeySet& keys, std::uint64_t total_bits, std::uint64_t seed);

  bool contains(std::string_view key) const noexcept;

  std::uint64_t bit_count() const noexcept { return bit_count_; }
  std::uint32_t hash_count() const noexcept { return k_; }
  std::uint64_t key_count() const noexcept { return n_keys_; }
  std::uint64_t hash_seed() const noexcept { return seed_; }
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  // Number of probes for total_bits spread over n_keys: round(ln 2 * L / n),
  // clamped to [1, kMaxHashes].
  static std::uint32_t optimal_hash_count(std::uint64_t total_bits, std::uint64_t n_keys) noexcept;

  void write_payload(ByteWriter& out) const;
  static BloomFilter read_payload(ByteReader& in, std::uint64_t seed, std::uint64_t n_keys);

 private:
  BloomFilter() = default;

  std::uint64_t bit_count_ = 0;
  std::uint32_t k_ = 1;
  std::uint64_t seed_ = 0;
  std::uint64_t n_keys_ = 0;
  std::vector<std::uint64_t> words_;
};

// Static filter storing one fingerprint per key in the slot given by a
// minimal perfect hash. Slots [0, n_high) hold (j_low + 1)-bit fingerprints,
// the rest j_low bits, so any total bit count between 0 and 64 bits per key
// is realized exactly.
class FingerprintFilter {
 public:
  static constexpr std::uint32_t kMaxWidth = 64;
  static constexpr int kMaxBuildAttempts = 16;

  // Throws std::runtime_error when the minimal perfect hash does not converge
  // within kMaxBuildAttempts hash seeds. Totals above 64 bits per key are
  // clamped to 64.
  static FingerprintFilter build(const KeySet& keys, std::uint64_t total_bits,
                                 std::uint64_t seed);

  bool contains(std::string_view key) const noexcept;

  std::uint64_t key_count() const noexcept { return n_keys_; }
  // Seed the stored hashes are computed with; differs from the requested seed
  // when construction needed a retry.
  std::uint64_t hash_seed() const noexcept { return seed_; }
  std::uint32_t low_width() const noexcept { return j_low_; }
  std::uint32_t high_width() const noexcept { return j_low_ + 1; }
  std::uint64_t high_count() const noexcept { return n_high_; }
  std::uint64_t fingerprint_bits() const noexcept;
  const Mphf& mphf() const noexcept { return mphf_; }

  // Model false-positive rate of the realized width mix:
  // (n_high * 2^-(j_low+1) + (n - n_high) * 2^-j_low) / n.
  double model_false_positive_rate() const noexcept;

  void write_payload(ByteWriter& out) const;
  static FingerprintFilter read_payload(ByteReader& in, std::uint64_t seed,
                                        std::uint64_t n_keys);

 private:
  FingerprintFilter() = default;

  std::uint64_t width_at(std::uint64_t slot) const noexcept;
  std::uint64_t offset_of(std::uint64_t slot) const noexcept;
  std::uint64_t read_bits(std::uint64_t offset, std::uint32_t width) const noexcept;
  void write_bits(std::uint64_t offset, std::uint32_t width, std::uint64_t value);

  static std::uint64_t fingerprint_of(const Hash128& h) noexcept {
    return mix64(h.lo ^ 0xA0761D6478BD642FULL);
  }

  std::uint64_t seed_ = 0;
  std::uint64_t n_keys_ = 0;
  std::uint32_t j_low_ = 0;
  std::uint64_t n_high_ = 0;
  Mphf mphf_;
  std::vector<std::uint8_t> packed_;  // MSB-first bit stream, slot order
};

// A frozen approximate-membership filter of either backend.
//
// Answers: a filter built over an empty key set rejects everything; otherwise
// a filter with zero bits accepts everything; otherwise it accepts every build
// key and a non-member with probability ~alpha(backend)^(bits per key).
class Filter {
 public:
  explicit Filter(BloomFilter f) : impl_(std::move(f)) {}
  explicit Filter(FingerprintFilter f) : impl_(std::move(f)) {}

  bool contains(std::string_view key) const noexcept {
    return std::visit([&](const auto& f) { return f.contains(key); }, impl_);
  }
  bool contains(const Key& key) const noexcept { return contains(key.bytes()); }

  FilterBackend backend() const noexcept;
  std::uint64_t key_count() const noexcept;
  std::uint64_t hash_seed() const noexcept;
  // Bits allocated to the membership payload (bit array or fingerprints).
  std::uint64_t total_bits() const noexcept;

  const BloomFilter* as_bloom() const noexcept { return std::get_if<BloomFilter>(&impl_); }
  const FingerprintFilter* as_fingerprint() const noexcept {
    return std::get_if<FingerprintFilter>(&impl_);
  }

  // "SBFL" container, little-endian; see the README for the byte layout.
  Bytes serialize() const;
  // Throws FormatError with a code distinguishing bad magic, unknown version,
  // truncation, checksum mismatch and invalid fields.
  static Filter deserialize(std::span<const std::uint8_t> bytes);

 private:
  std::variant<BloomFilter, FingerprintFilter> impl_;
};

// Builds over `keys` with round(bits_per_key * |keys|) total bits. Throws
// std::invalid_argument for negative or non-finite bits_per_key.
Filter build_filter(const KeySet& keys, const FilterConfig& config);

// Same, sized by an absolute bit count. Used where the budget is expressed
// per key of a larger set than the one stored (backup filters).
Filter build_filter_with_total_bits(const KeySet& keys, FilterBackend backend,
                                    std::uint64_t total_bits, std::uint64_t seed);

}  // namespace sbf
