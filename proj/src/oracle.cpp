#include "sbf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "oracle_models.hpp"

namespace sbf {
namespace {

constexpr std::string_view kConstantMagic = "CORC";
constexpr std::uint8_t kConstantVersion = 1;

class ConstantScore final : public ScoreModel {
 public:
  explicit ConstantScore(double value) : value_(value) {}

  double score(std::string_view) const override { return value_; }
  std::uint64_t size_bits() const override { return 64; }

  Bytes serialize(std::optional<double> tau) const override {
    ByteWriter out;
    out.put_magic(kConstantMagic);
    out.put_u8(kConstantVersion);
    out.put_f64(detail::encode_tau(tau));
    out.put_f64(value_);
    return std::move(out).finish_with_crc();
  }

 private:
  double value_;
};

Oracle read_constant_oracle(std::span<const std::uint8_t> bytes) {
  ByteReader in = open_container(bytes, kConstantMagic, kConstantVersion);
  const double tau = in.get_f64();
  const double value = in.get_f64();
  close_container(in, bytes);
  return make_constant_oracle(value, detail::decode_tau(tau));
}

}  // namespace

Oracle::Oracle(std::shared_ptr<const ScoreModel> model, std::optional<double> tau)
    : model_(std::move(model)), tau_(tau) {
  if (!model_) throw std::invalid_argument("oracle needs a score model");
}

bool Oracle::predict(std::string_view key) const {
  if (!tau_) throw std::logic_error("oracle threshold not chosen");
  return model_->score(key) >= *tau_;
}

Oracle Oracle::deserialize(std::span<const std::uint8_t> bytes) {
  const std::string_view magic = peek_magic(bytes);
  if (magic == "SYNO") return detail::read_synthetic_oracle(bytes);
  if (magic == "SORC") return detail::read_score_oracle(bytes);
  if (magic == kConstantMagic) return read_constant_oracle(bytes);
  if (magic.empty()) throw FormatError(FormatErrorCode::kTruncated, "oracle blob too short");
  throw FormatError(FormatErrorCode::kBadMagic, "not an oracle blob");
}

Oracle make_constant_oracle(double score, std::optional<double> tau) {
  return Oracle(std::make_shared<ConstantScore>(score), tau);
}

Oracle choose_tau(const Oracle& oracle, const KeySet& keys, double target_f_n) {
  if (!(target_f_n >= 0.0 && target_f_n <= 1.0)) {
    throw std::invalid_argument(fmt::format("target f_n must lie in [0, 1], got {}", target_f_n));
  }
  if (keys.empty()) throw std::invalid_argument("choose_tau needs a nonempty key set");
  std::vector<double> scores;
  scores.reserve(keys.size());
  for (const Key& k : keys) scores.push_back(oracle.score(k));
  std::sort(scores.begin(), scores.end());
  const auto allowed =
      static_cast<std::size_t>(std::llround(target_f_n * static_cast<double>(keys.size())));
  if (allowed >= scores.size()) {
    return oracle.with_tau(std::nextafter(scores.back(), std::numeric_limits<double>::infinity()));
  }
  // Keys tied with scores[allowed] stay at or above tau, so ties can only
  // lower the realized false-negative count.
  return oracle.with_tau(scores[allowed]);
}

OracleProfile measure_profile(const Oracle& oracle, const KeySet& keys,
                              const KeySet& held_out_negatives) {
  if (held_out_negatives.empty()) {
    throw std::invalid_argument("measure_profile needs held-out negatives");
  }
  std::size_t false_negatives = 0;
  for (const Key& k : keys) false_negatives += oracle.predict(k) ? 0 : 1;
  std::size_t false_positives = 0;
  for (const Key& k : held_out_negatives) false_positives += oracle.predict(k) ? 1 : 0;
  OracleProfile profile;
  profile.f_n = keys.empty() ? 0.0
                             : static_cast<double>(false_negatives) /
                                   static_cast<double>(keys.size());
  profile.f_p =
      static_cast<double>(false_positives) / static_cast<double>(held_out_negatives.size());
  profile.size_bits = oracle.size_bits();
  return profile;
}

KeySet oracle_false_negatives(const Oracle& oracle, const KeySet& keys) {
  std::vector<Key> out;
  for (const Key& k : keys) {
    if (!oracle.predict(k)) out.push_back(k);
  }
  return KeySet(std::move(out));
}

}  // namespace sbf
