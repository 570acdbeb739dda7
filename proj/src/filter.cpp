#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "sbf/filters.hpp"

namespace sbf {
namespace {

constexpr std::string_view kMagic = "SBFL";
constexpr std::uint8_t kVersion = 1;

}  // namespace

std::string_view to_string(FilterBackend backend) noexcept {
  switch (backend) {
    case FilterBackend::kStandardBloom: return "standard_bloom";
    case FilterBackend::kFingerprintPH: return "fingerprint_ph";
  }
  return "unknown";
}

double alpha(FilterBackend backend) noexcept {
  switch (backend) {
    case FilterBackend::kStandardBloom: return std::exp(-std::numbers::ln2 * std::numbers::ln2);
    case FilterBackend::kFingerprintPH: return 0.5;
  }
  return 1.0;
}

FilterBackend Filter::backend() const noexcept {
  return std::holds_alternative<BloomFilter>(impl_) ? FilterBackend::kStandardBloom
                                                    : FilterBackend::kFingerprintPH;
}

std::uint64_t Filter::key_count() const noexcept {
  return std::visit([](const auto& f) { return f.key_count(); }, impl_);
}

std::uint64_t Filter::hash_seed() const noexcept {
  return std::visit([](const auto& f) { return f.hash_seed(); }, impl_);
}

std::uint64_t Filter::total_bits() const noexcept {
  if (const auto* bloom = as_bloom()) return bloom->bit_count();
  return as_fingerprint()->fingerprint_bits();
}

Bytes Filter::serialize() const {
  ByteWriter out;
  out.put_magic(kMagic);
  out.put_u8(kVersion);
  out.put_u8(static_cast<std::uint8_t>(backend()));
  out.put_u64(hash_seed());
  out.put_u64(key_count());
  std::visit([&](const auto& f) { f.write_payload(out); }, impl_);
  return std::move(out).finish_with_crc();
}

Filter Filter::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in = open_container(bytes, kMagic, kVersion);
  const std::uint8_t backend = in.get_u8();
  const std::uint64_t seed = in.get_u64();
  const std::uint64_t n_keys = in.get_u64();
  auto filter = [&]() -> Filter {
    switch (backend) {
      case static_cast<std::uint8_t>(FilterBackend::kStandardBloom):
        return Filter(BloomFilter::read_payload(in, seed, n_keys));
      case static_cast<std::uint8_t>(FilterBackend::kFingerprintPH):
        return Filter(FingerprintFilter::read_payload(in, seed, n_keys));
      default:
        throw FormatError(FormatErrorCode::kInvalidField, fmt::format("backend {}", backend));
    }
  }();
  close_container(in, bytes);
  return filter;
}

Filter build_filter_with_total_bits(const KeySet& keys, FilterBackend backend,
                                    std::uint64_t total_bits, std::uint64_t seed) {
  switch (backend) {
    case FilterBackend::kStandardBloom:
      return Filter(BloomFilter::build(keys, total_bits, seed));
    case FilterBackend::kFingerprintPH:
      return Filter(FingerprintFilter::build(keys, total_bits, seed));
  }
  throw std::invalid_argument("unknown filter backend");
}

Filter build_filter(const KeySet& keys, const FilterConfig& config) {
  if (!std::isfinite(config.bits_per_key) || config.bits_per_key < 0.0) {
    throw std::invalid_argument(
        fmt::format("bits_per_key must be finite and >= 0, got {}", config.bits_per_key));
  }
  const double total = std::round(config.bits_per_key * static_cast<double>(keys.size()));
  return build_filter_with_total_bits(keys, config.backend, static_cast<std::uint64_t>(total),
                                      config.hash_seed);
}

}  // namespace sbf
