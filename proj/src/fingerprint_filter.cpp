#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "sbf/filters.hpp"

namespace sbf {
namespace {

std::uint64_t low_bits(std::uint64_t v, std::uint32_t width) noexcept {
  return width >= 64 ? v : (v & ((std::uint64_t{1} << width) - 1));
}

std::uint64_t attempt_seed(std::uint64_t seed, int attempt) noexcept {
  return attempt == 0 ? seed : mix64(seed + static_cast<std::uint64_t>(attempt));
}

}  // namespace

std::uint64_t FingerprintFilter::fingerprint_bits() const noexcept {
  return n_high_ * (j_low_ + 1) + (n_keys_ - n_high_) * j_low_;
}

std::uint64_t FingerprintFilter::width_at(std::uint64_t slot) const noexcept {
  return slot < n_high_ ? j_low_ + 1 : j_low_;
}

std::uint64_t FingerprintFilter::offset_of(std::uint64_t slot) const noexcept {
  if (slot < n_high_) return slot * (j_low_ + 1);
  return n_high_ * (j_low_ + 1) + (slot - n_high_) * j_low_;
}

std::uint64_t FingerprintFilter::read_bits(std::uint64_t offset,
                                           std::uint32_t width) const noexcept {
  std::uint64_t v = 0;
  std::uint32_t got = 0;
  while (got < width) {
    const std::uint64_t byte = (offset + got) >> 3;
    const std::uint32_t used = static_cast<std::uint32_t>((offset + got) & 7);
    const std::uint32_t avail = 8 - used;
    const std::uint32_t take = std::min(avail, width - got);
    const std::uint32_t bits = (packed_[byte] >> (avail - take)) & ((1u << take) - 1);
    v = (v << take) | bits;
    got += take;
  }
  return v;
}

void FingerprintFilter::write_bits(std::uint64_t offset, std::uint32_t width, std::uint64_t value) {
  // Most significant bit of `value` goes first.
  for (std::uint32_t i = 0; i < width; ++i) {
    const std::uint64_t bit = (value >> (width - 1 - i)) & 1;
    const std::uint64_t pos = offset + i;
    if (bit) packed_[pos >> 3] |= static_cast<std::uint8_t>(0x80u >> (pos & 7));
  }
}

FingerprintFilter FingerprintFilter::build(const KeySet& keys, std::uint64_t total_bits,
                                           std::uint64_t seed) {
  FingerprintFilter f;
  const std::uint64_t n = keys.size();
  f.n_keys_ = n;
  f.seed_ = seed;
  if (n == 0) return f;

  total_bits = std::min(total_bits, n * kMaxWidth);
  f.j_low_ = static_cast<std::uint32_t>(total_bits / n);
  f.n_high_ = total_bits % n;

  std::vector<Hash128> hashes(n);
  for (int attempt = 0; attempt < kMaxBuildAttempts; ++attempt) {
    const std::uint64_t s = attempt_seed(seed, attempt);
    for (std::uint64_t i = 0; i < n; ++i) hashes[i] = hash128(keys[i].bytes(), s);
    auto mphf = Mphf::build(hashes);
    if (!mphf) continue;

    f.seed_ = s;
    f.mphf_ = std::move(*mphf);
    f.packed_.assign((f.fingerprint_bits() + 7) / 8, 0);
    for (const Hash128& h : hashes) {
      const std::uint64_t slot = f.mphf_.slot(h);
      const auto width = static_cast<std::uint32_t>(f.width_at(slot));
      f.write_bits(f.offset_of(slot), width, low_bits(fingerprint_of(h), width));
    }
    return f;
  }
  throw std::runtime_error(fmt::format(
      "fingerprint filter: perfect hash did not converge for {} keys after {} seeds", n,
      kMaxBuildAttempts));
}

bool FingerprintFilter::contains(std::string_view key) const noexcept {
  if (n_keys_ == 0) return false;
  const Hash128 h = hash128(key, seed_);
  const std::uint64_t slot = mphf_.slot(h);
  const auto width = static_cast<std::uint32_t>(width_at(slot));
  if (width == 0) return true;
  return read_bits(offset_of(slot), width) == low_bits(fingerprint_of(h), width);
}

double FingerprintFilter::model_false_positive_rate() const noexcept {
  if (n_keys_ == 0) return 0.0;
  const double n = static_cast<double>(n_keys_);
  const double high = static_cast<double>(n_high_);
  return (high * std::ldexp(1.0, -static_cast<int>(j_low_ + 1)) +
          (n - high) * std::ldexp(1.0, -static_cast<int>(j_low_))) /
         n;
}

void FingerprintFilter::write_payload(ByteWriter& out) const {
  out.put_u8(static_cast<std::uint8_t>(j_low_));
  out.put_u64(n_high_);
  out.put_u64(mphf_.bucket_count());
  for (std::uint16_t s : mphf_.seeds()) out.put_u16(s);
  out.put_bytes(packed_);
}

FingerprintFilter FingerprintFilter::read_payload(ByteReader& in, std::uint64_t seed,
                                                  std::uint64_t n_keys) {
  FingerprintFilter f;
  f.seed_ = seed;
  f.n_keys_ = n_keys;
  f.j_low_ = in.get_u8();
  f.n_high_ = in.get_u64();
  if (f.j_low_ > kMaxWidth || (f.j_low_ == kMaxWidth && f.n_high_ != 0) ||
      (n_keys > 0 && f.n_high_ >= n_keys) || (n_keys == 0 && f.n_high_ != 0)) {
    throw FormatError(FormatErrorCode::kInvalidField,
                      fmt::format("widths j_low={} n_high={} for {} keys", f.j_low_, f.n_high_,
                                  n_keys));
  }
  const std::uint64_t n_buckets = in.get_u64();
  if (n_buckets != Mphf::bucket_count_for(n_keys)) {
    throw FormatError(FormatErrorCode::kInvalidField,
                      fmt::format("{} buckets for {} keys", n_buckets, n_keys));
  }
  if (n_buckets > in.remaining() / 2) {
    throw FormatError(FormatErrorCode::kTruncated, "bucket seed array exceeds input");
  }
  std::vector<std::uint16_t> seeds(n_buckets);
  for (auto& s : seeds) s = in.get_u16();
  f.mphf_ = Mphf(n_keys, std::move(seeds));
  const auto bytes = in.get_bytes((f.fingerprint_bits() + 7) / 8);
  f.packed_.assign(bytes.begin(), bytes.end());
  return f;
}

}  // namespace sbf
