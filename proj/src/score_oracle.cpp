#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include <fmt/format.h>

#include "oracle_models.hpp"

namespace sbf {
namespace {

constexpr std::string_view kMagic = "SORC";
constexpr std::uint8_t kVersion = 1;

using Bigram = std::uint16_t;
using Table = std::vector<std::pair<Bigram, double>>;  // sorted by bigram

Bigram bigram_at(std::string_view key, std::size_t i) {
  return static_cast<Bigram>((static_cast<unsigned char>(key[i]) << 8) |
                             static_cast<unsigned char>(key[i + 1]));
}

class BigramScore final : public ScoreModel {
 public:
  explicit BigramScore(Table table) : table_(std::move(table)), weights_(1u << 16, 0.0) {
    for (const auto& [g, w] : table_) weights_[g] = w;
  }

  double score(std::string_view key) const override {
    double evidence = 0.0;
    for (std::size_t i = 0; i + 1 < key.size(); ++i) evidence += weights_[bigram_at(key, i)];
    evidence /= static_cast<double>(key.size());
    return 1.0 / (1.0 + std::exp(-evidence));
  }

  // Two 16-bit fields per observed bigram.
  std::uint64_t size_bits() const override { return 32 * table_.size(); }

  Bytes serialize(std::optional<double> tau) const override {
    ByteWriter out;
    out.put_magic(kMagic);
    out.put_u8(kVersion);
    out.put_f64(detail::encode_tau(tau));
    out.put_u32(static_cast<std::uint32_t>(table_.size()));
    for (const auto& [g, w] : table_) {
      out.put_u16(g);
      out.put_f64(w);
    }
    return std::move(out).finish_with_crc();
  }

 private:
  Table table_;
  std::vector<double> weights_;
};

void count_bigrams(const KeySet& keys, std::vector<std::uint64_t>& counts) {
  for (const Key& k : keys) {
    const std::string_view b = k.bytes();
    for (std::size_t i = 0; i + 1 < b.size(); ++i) ++counts[bigram_at(b, i)];
  }
}

}  // namespace

Oracle train_score_oracle(const KeySet& positives, const KeySet& negatives, double smoothing) {
  if (positives.empty() || negatives.empty()) {
    throw std::invalid_argument("score oracle needs nonempty positive and negative sets");
  }
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
    throw std::invalid_argument(fmt::format("smoothing must be > 0, got {}", smoothing));
  }
  {
    std::unordered_set<std::string_view> pos;
    pos.reserve(positives.size());
    for (const Key& k : positives) pos.insert(k.bytes());
    for (const Key& k : negatives) {
      if (pos.contains(k.bytes())) {
        throw std::invalid_argument("positive and negative training sets overlap");
      }
    }
  }

  std::vector<std::uint64_t> pos_counts(1u << 16, 0);
  std::vector<std::uint64_t> neg_counts(1u << 16, 0);
  count_bigrams(positives, pos_counts);
  count_bigrams(negatives, neg_counts);

  Table table;
  for (std::uint32_t g = 0; g < (1u << 16); ++g) {
    if (pos_counts[g] == 0 && neg_counts[g] == 0) continue;
    const double w = std::log((static_cast<double>(pos_counts[g]) + smoothing) /
                              (static_cast<double>(neg_counts[g]) + smoothing));
    table.emplace_back(static_cast<Bigram>(g), w);
  }
  return Oracle(std::make_shared<BigramScore>(std::move(table)), std::nullopt);
}

namespace detail {

Oracle read_score_oracle(std::span<const std::uint8_t> bytes) {
  ByteReader in = open_container(bytes, kMagic, kVersion);
  const double tau = in.get_f64();
  const std::uint32_t count = in.get_u32();
  if (count > in.remaining() / 10) {
    throw FormatError(FormatErrorCode::kTruncated, "bigram table exceeds input");
  }
  Table table;
  table.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const Bigram g = in.get_u16();
    const double w = in.get_f64();
    if (!table.empty() && g <= table.back().first) {
      throw FormatError(FormatErrorCode::kInvalidField, "bigram table not strictly sorted");
    }
    table.emplace_back(g, w);
  }
  close_container(in, bytes);
  return Oracle(std::make_shared<BigramScore>(std::move(table)), decode_tau(tau));
}

}  // namespace detail
}  // namespace sbf
