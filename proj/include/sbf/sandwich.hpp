#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "sbf/byte_io.hpp"
#include "sbf/filters.hpp"
#include "sbf/key.hpp"
#include "sbf/oracle.hpp"
#include "sbf/planner.hpp"

namespace sbf {

// Which layer decided a query.
enum class QueryPath : std::uint8_t {
  kInitialReject,  // initial filter said no
  kOracleAccept,   // score >= tau
  kBackupAccept,   // oracle said no, backup said yes
  kBackupReject,   // oracle said no, backup said no
};

constexpr bool accepted(QueryPath path) noexcept {
  return path == QueryPath::kOracleAccept || path == QueryPath::kBackupAccept;
}

// Initial and backup filters hash with independent seeds derived from one
// master seed.
std::uint64_t initial_filter_seed(std::uint64_t master) noexcept;
std::uint64_t backup_filter_seed(std::uint64_t master) noexcept;

// Oracle followed by a backup filter over the oracle's false negatives.
class LearnedBloomFilter {
 public:
  LearnedBloomFilter(Oracle oracle, Filter backup, std::uint64_t key_count);

  QueryPath trace(std::string_view key) const;
  QueryPath trace(const Key& key) const { return trace(key.bytes()); }
  bool query(std::string_view key) const { return accepted(trace(key)); }
  bool query(const Key& key) const { return query(key.bytes()); }

  const Oracle& oracle() const noexcept { return oracle_; }
  const Filter& backup() const noexcept { return backup_; }
  std::uint64_t key_count() const noexcept { return m_; }

  // "LRND": magic, u8 version, m u64, length-prefixed oracle and backup
  // blobs, CRC32.
  Bytes serialize() const;
  static LearnedBloomFilter deserialize(std::span<const std::uint8_t> bytes);

 private:
  Oracle oracle_;
  Filter backup_;
  std::uint64_t m_;
};

struct SandwichConfig {
  FilterBackend initial_backend = FilterBackend::kFingerprintPH;
  FilterBackend backup_backend = FilterBackend::kFingerprintPH;
  std::uint64_t seed = 0;

  static SandwichConfig uniform(FilterBackend backend, std::uint64_t seed) {
    return {backend, backend, seed};
  }
};

// Initial filter over every key, then the oracle, then a backup filter over
// the oracle's false negatives.
class SandwichedFilter {
 public:
  SandwichedFilter(Filter initial, Oracle oracle, Filter backup, BudgetPlan plan);

  QueryPath trace(std::string_view key) const;
  QueryPath trace(const Key& key) const { return trace(key.bytes()); }
  bool query(std::string_view key) const { return accepted(trace(key)); }
  bool query(const Key& key) const { return query(key.bytes()); }

  const Filter& initial() const noexcept { return initial_; }
  const Oracle& oracle() const noexcept { return oracle_; }
  const Filter& backup() const noexcept { return backup_; }
  // After deserialization modeled_fpr is NaN: the oracle profile is not stored.
  const BudgetPlan& plan() const noexcept { return plan_; }

  // "SNDW": magic, u8 version, b/b1/b2 as binary64, m u64, length-prefixed
  // oracle, initial and backup blobs, CRC32.
  Bytes serialize() const;
  static SandwichedFilter deserialize(std::span<const std::uint8_t> bytes);

 private:
  Filter initial_;
  Oracle oracle_;
  Filter backup_;
  BudgetPlan plan_;
};

// Backup sized per stored key: round(backup.bits_per_key * |false negatives|)
// bits, seeded with backup_filter_seed(backup.hash_seed). With no false
// negatives the backup is empty and rejects everything. Throws
// std::invalid_argument when the oracle has no threshold or the rate is
// negative.
LearnedBloomFilter build_learned(const KeySet& keys, const Oracle& oracle,
                                 const FilterConfig& backup);

// Backup sized from a budget of b bits per key of the full set:
// round(b * |keys|) bits in total, whatever the false-negative count.
LearnedBloomFilter build_learned_for_budget(const KeySet& keys, const Oracle& oracle, double b,
                                            FilterBackend backend, std::uint64_t seed);

// Initial filter with round(b1 * m) bits over all keys; backup with
// round(b2 * m) bits over the false negatives. Throws std::invalid_argument
// for negative allocations or b1 + b2 > b (beyond 1e-9); warns when b2 > 0 is
// spent on an empty backup.
SandwichedFilter build_sandwiched(const KeySet& keys, const Oracle& oracle, const BudgetPlan& plan,
                                  const SandwichConfig& config);

}  // namespace sbf
