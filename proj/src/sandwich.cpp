#include "sbf/sandwich.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "sbf/diagnostics.hpp"

namespace sbf {
namespace {

constexpr std::string_view kLearnedMagic = "LRND";
constexpr std::string_view kSandwichMagic = "SNDW";
constexpr std::uint8_t kVersion = 1;

void require_threshold(const Oracle& oracle) {
  if (!oracle.tau()) throw std::invalid_argument("oracle threshold not chosen");
}

std::uint64_t total_bits_for(double bits_per_key, std::uint64_t keys) {
  if (!std::isfinite(bits_per_key) || bits_per_key < 0.0) {
    throw std::invalid_argument(fmt::format("bit budget must be >= 0, got {}", bits_per_key));
  }
  return static_cast<std::uint64_t>(std::round(bits_per_key * static_cast<double>(keys)));
}

}  // namespace

std::uint64_t initial_filter_seed(std::uint64_t master) noexcept {
  return master + 0x9E3779B97F4A7C15ULL;
}

std::uint64_t backup_filter_seed(std::uint64_t master) noexcept {
  return master + 0x3C6EF372FE94F82AULL;
}

// LearnedBloomFilter

LearnedBloomFilter::LearnedBloomFilter(Oracle oracle, Filter backup, std::uint64_t key_count)
    : oracle_(std::move(oracle)), backup_(std::move(backup)), m_(key_count) {
  require_threshold(oracle_);
}

QueryPath LearnedBloomFilter::trace(std::string_view key) const {
  if (oracle_.predict(key)) return QueryPath::kOracleAccept;
  return backup_.contains(key) ? QueryPath::kBackupAccept : QueryPath::kBackupReject;
}

Bytes LearnedBloomFilter::serialize() const {
  ByteWriter out;
  out.put_magic(kLearnedMagic);
  out.put_u8(kVersion);
  out.put_u64(m_);
  out.put_blob(oracle_.serialize());
  out.put_blob(backup_.serialize());
  return std::move(out).finish_with_crc();
}

LearnedBloomFilter LearnedBloomFilter::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in = open_container(bytes, kLearnedMagic, kVersion);
  const std::uint64_t m = in.get_u64();
  const auto oracle_blob = in.get_blob();
  const auto backup_blob = in.get_blob();
  close_container(in, bytes);
  Oracle oracle = Oracle::deserialize(oracle_blob);
  if (!oracle.tau()) {
    throw FormatError(FormatErrorCode::kInvalidField, "embedded oracle has no threshold");
  }
  return LearnedBloomFilter(std::move(oracle), Filter::deserialize(backup_blob), m);
}

LearnedBloomFilter build_learned(const KeySet& keys, const Oracle& oracle,
                                 const FilterConfig& backup) {
  require_threshold(oracle);
  const KeySet false_negatives = oracle_false_negatives(oracle, keys);
  const std::uint64_t bits = total_bits_for(backup.bits_per_key, false_negatives.size());
  return LearnedBloomFilter(
      oracle,
      build_filter_with_total_bits(false_negatives, backup.backend, bits,
                                   backup_filter_seed(backup.hash_seed)),
      keys.size());
}

LearnedBloomFilter build_learned_for_budget(const KeySet& keys, const Oracle& oracle, double b,
                                            FilterBackend backend, std::uint64_t seed) {
  require_threshold(oracle);
  const std::uint64_t bits = total_bits_for(b, keys.size());
  const KeySet false_negatives = oracle_false_negatives(oracle, keys);
  return LearnedBloomFilter(
      oracle, build_filter_with_total_bits(false_negatives, backend, bits, backup_filter_seed(seed)),
      keys.size());
}

// SandwichedFilter

SandwichedFilter::SandwichedFilter(Filter initial, Oracle oracle, Filter backup, BudgetPlan plan)
    : initial_(std::move(initial)),
      oracle_(std::move(oracle)),
      backup_(std::move(backup)),
      plan_(std::move(plan)) {
  require_threshold(oracle_);
}

QueryPath SandwichedFilter::trace(std::string_view key) const {
  if (!initial_.contains(key)) return QueryPath::kInitialReject;
  if (oracle_.predict(key)) return QueryPath::kOracleAccept;
  return backup_.contains(key) ? QueryPath::kBackupAccept : QueryPath::kBackupReject;
}

Bytes SandwichedFilter::serialize() const {
  ByteWriter out;
  out.put_magic(kSandwichMagic);
  out.put_u8(kVersion);
  out.put_f64(plan_.b);
  out.put_f64(plan_.b1);
  out.put_f64(plan_.b2);
  out.put_u64(plan_.m);
  out.put_blob(oracle_.serialize());
  out.put_blob(initial_.serialize());
  out.put_blob(backup_.serialize());
  return std::move(out).finish_with_crc();
}

SandwichedFilter SandwichedFilter::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in = open_container(bytes, kSandwichMagic, kVersion);
  BudgetPlan plan;
  plan.b = in.get_f64();
  plan.b1 = in.get_f64();
  plan.b2 = in.get_f64();
  plan.m = in.get_u64();
  const auto oracle_blob = in.get_blob();
  const auto initial_blob = in.get_blob();
  const auto backup_blob = in.get_blob();
  close_container(in, bytes);
  Oracle oracle = Oracle::deserialize(oracle_blob);
  if (!oracle.tau()) {
    throw FormatError(FormatErrorCode::kInvalidField, "embedded oracle has no threshold");
  }
  Filter initial = Filter::deserialize(initial_blob);
  plan.alpha = alpha(initial.backend());
  plan.modeled_fpr = std::numeric_limits<double>::quiet_NaN();
  return SandwichedFilter(std::move(initial), std::move(oracle), Filter::deserialize(backup_blob),
                          std::move(plan));
}

SandwichedFilter build_sandwiched(const KeySet& keys, const Oracle& oracle, const BudgetPlan& plan,
                                  const SandwichConfig& config) {
  require_threshold(oracle);
  if (!(plan.b1 >= 0.0) || !(plan.b2 >= 0.0) || !std::isfinite(plan.b1) ||
      !std::isfinite(plan.b2)) {
    throw std::invalid_argument(
        fmt::format("negative allocation b1={} b2={}", plan.b1, plan.b2));
  }
  if (plan.b1 + plan.b2 > plan.b + 1e-9) {
    throw std::invalid_argument(
        fmt::format("allocation b1+b2={} exceeds budget b={}", plan.b1 + plan.b2, plan.b));
  }
  const KeySet false_negatives = oracle_false_negatives(oracle, keys);
  if (false_negatives.empty() && plan.b2 > 0.0) {
    warn(fmt::format("oracle has no false negatives; {} backup bits per key are unused", plan.b2));
  }
  BudgetPlan realized = plan;
  realized.m = keys.size();
  realized.alpha = alpha(config.initial_backend);
  Filter initial = build_filter_with_total_bits(keys, config.initial_backend,
                                                total_bits_for(plan.b1, keys.size()),
                                                initial_filter_seed(config.seed));
  Filter backup = build_filter_with_total_bits(false_negatives, config.backup_backend,
                                               total_bits_for(plan.b2, keys.size()),
                                               backup_filter_seed(config.seed));
  return SandwichedFilter(std::move(initial), oracle, std::move(backup), std::move(realized));
}

}  // namespace sbf
