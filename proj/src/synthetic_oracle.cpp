#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <fmt/format.h>

#include "oracle_models.hpp"
#include "sbf/hash.hpp"

namespace sbf {
namespace {

constexpr std::string_view kMagic = "SYNO";
constexpr std::uint8_t kVersion = 1;

std::uint64_t keyed_hash(std::string_view key, std::uint64_t seed) {
  return hash128(key, seed).lo;
}

class SyntheticScore final : public ScoreModel {
 public:
  SyntheticScore(std::uint64_t seed, double f_p, double f_n,
                 std::unordered_set<std::string> rejected,
                 std::unordered_set<std::string> accepted)
      : seed_(seed),
        f_p_(f_p),
        f_n_(f_n),
        accept_all_(f_p >= 1.0),
        threshold_(f_p >= 1.0 ? 0 : static_cast<std::uint64_t>(std::ldexp(f_p, 64))),
        rejected_(std::move(rejected)),
        accepted_(std::move(accepted)) {}

  double score(std::string_view key) const override {
    const std::string k(key);
    if (rejected_.contains(k)) return 0.0;
    if (accepted_.contains(k)) return 1.0;
    if (accept_all_) return 1.0;
    return keyed_hash(key, seed_) < threshold_ ? 1.0 : 0.0;
  }

  std::uint64_t size_bits() const override { return 0; }

  Bytes serialize(std::optional<double> tau) const override {
    ByteWriter out;
    out.put_magic(kMagic);
    out.put_u8(kVersion);
    out.put_f64(detail::encode_tau(tau));
    out.put_u64(seed_);
    out.put_f64(f_p_);
    out.put_f64(f_n_);
    for (const auto* set : {&rejected_, &accepted_}) {
      std::vector<std::string_view> sorted(set->begin(), set->end());
      std::sort(sorted.begin(), sorted.end());
      out.put_u64(sorted.size());
      for (std::string_view k : sorted) {
        out.put_u32(static_cast<std::uint32_t>(k.size()));
        out.put_bytes({reinterpret_cast<const std::uint8_t*>(k.data()), k.size()});
      }
    }
    return std::move(out).finish_with_crc();
  }

 private:
  std::uint64_t seed_;
  double f_p_;
  double f_n_;
  bool accept_all_;
  std::uint64_t threshold_;
  std::unordered_set<std::string> rejected_;
  std::unordered_set<std::string> accepted_;
};

void check_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(fmt::format("{} must lie in [0, 1], got {}", name, v));
  }
}

}  // namespace

Oracle make_synthetic_oracle(const KeySet& keys, double f_p, double f_n, std::uint64_t seed) {
  check_probability(f_p, "f_p");
  check_probability(f_n, "f_n");
  const std::size_t m = keys.size();
  const auto n_rejected = static_cast<std::size_t>(std::llround(f_n * static_cast<double>(m)));

  std::vector<std::uint64_t> hashes(m);
  for (std::size_t i = 0; i < m; ++i) hashes[i] = keyed_hash(keys[i].bytes(), seed);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (hashes[a] != hashes[b]) return hashes[a] < hashes[b];
    return keys[a] < keys[b];
  });

  std::unordered_set<std::string> rejected;
  std::unordered_set<std::string> accepted;
  rejected.reserve(n_rejected);
  accepted.reserve(m - n_rejected);
  for (std::size_t r = 0; r < m; ++r) {
    auto& target = r < n_rejected ? rejected : accepted;
    target.emplace(keys[order[r]].bytes());
  }
  return Oracle(std::make_shared<SyntheticScore>(seed, f_p, f_n, std::move(rejected),
                                                 std::move(accepted)),
                0.5);
}

namespace detail {

Oracle read_synthetic_oracle(std::span<const std::uint8_t> bytes) {
  ByteReader in = open_container(bytes, kMagic, kVersion);
  const double tau = in.get_f64();
  const std::uint64_t seed = in.get_u64();
  const double f_p = in.get_f64();
  const double f_n = in.get_f64();
  if (!(f_p >= 0.0 && f_p <= 1.0) || !(f_n >= 0.0 && f_n <= 1.0)) {
    throw FormatError(FormatErrorCode::kInvalidField,
                      fmt::format("synthetic oracle rates f_p={} f_n={}", f_p, f_n));
  }
  std::unordered_set<std::string> sets[2];
  for (auto& set : sets) {
    const std::uint64_t count = in.get_u64();
    if (count > in.remaining() / 4) {
      throw FormatError(FormatErrorCode::kTruncated, "key list exceeds input");
    }
    set.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto key = in.get_bytes(in.get_u32());
      set.emplace(reinterpret_cast<const char*>(key.data()), key.size());
    }
  }
  close_container(in, bytes);
  return Oracle(std::make_shared<SyntheticScore>(seed, f_p, f_n, std::move(sets[0]),
                                                 std::move(sets[1])),
                decode_tau(tau));
}

}  // namespace detail
}  // namespace sbf
