#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "sbf/byte_io.hpp"
#include "sbf/key.hpp"
#include "sbf/oracle_profile.hpp"

namespace sbf {

// A deterministic score function U -> [0, 1].
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual double score(std::string_view key) const = 0;
  // Representation cost, tracked as metadata outside the filter bit budget.
  virtual std::uint64_t size_bits() const = 0;
  // Self-describing blob carrying the threshold (NaN when unset).
  virtual Bytes serialize(std::optional<double> tau) const = 0;
};

// A learned function with a threshold: predict(y) = score(y) >= tau.
// Immutable and safe to share between threads.
class Oracle {
 public:
  Oracle(std::shared_ptr<const ScoreModel> model, std::optional<double> tau);

  double score(std::string_view key) const { return model_->score(key); }
  double score(const Key& key) const { return model_->score(key.bytes()); }

  // Throws std::logic_error while the threshold is unset.
  bool predict(std::string_view key) const;
  bool predict(const Key& key) const { return predict(key.bytes()); }

  std::optional<double> tau() const noexcept { return tau_; }
  Oracle with_tau(double tau) const { return Oracle(model_, tau); }
  std::uint64_t size_bits() const { return model_->size_bits(); }
  const ScoreModel& model() const noexcept { return *model_; }

  Bytes serialize() const { return model_->serialize(tau_); }
  // Dispatches on the blob's magic ("SYNO", "SORC", "CORC").
  static Oracle deserialize(std::span<const std::uint8_t> bytes);

 private:
  std::shared_ptr<const ScoreModel> model_;
  std::optional<double> tau_;
};

// Synthetic oracle with scores in {0, 1} and tau = 0.5. Exactly
// round(f_n * m) keys of `keys` (those with the smallest keyed hash) score 0;
// the others score 1. A key outside `keys` scores 1 iff its keyed hash is
// below f_p * 2^64, so each fresh random non-key is a false positive with
// probability f_p. Throws std::invalid_argument for f_p or f_n outside [0, 1].
Oracle make_synthetic_oracle(const KeySet& keys, double f_p, double f_n, std::uint64_t seed);

// Byte-bigram log-odds classifier:
//   score(y) = logistic( sum_g w(g) / |y| ),
//   w(g) = log((count_pos(g) + smoothing) / (count_neg(g) + smoothing)),
// summed over the bigrams of y; bigrams never seen in training weigh 0.
// The threshold is left unset. Throws std::invalid_argument when the sets
// overlap, either is empty, or smoothing <= 0.
Oracle train_score_oracle(const KeySet& positives, const KeySet& negatives, double smoothing);

// Fixed score for every key. Mostly useful for degenerate cases and tests.
Oracle make_constant_oracle(double score, std::optional<double> tau);

// Sets tau to the largest key score such that at most round(target_f_n * m)
// keys score strictly below it; when every key may be a false negative, tau
// is the next double above the maximum score. Throws std::invalid_argument
// for target_f_n outside [0, 1] or an empty key set.
Oracle choose_tau(const Oracle& oracle, const KeySet& keys, double target_f_n);

// f_n = |{z in keys : score(z) < tau}| / m exactly; f_p = fraction of
// held-out negatives with score >= tau. Throws std::invalid_argument when
// held_out_negatives is empty.
OracleProfile measure_profile(const Oracle& oracle, const KeySet& keys,
                              const KeySet& held_out_negatives);

// Keys of `keys` the oracle rejects, in input order.
KeySet oracle_false_negatives(const Oracle& oracle, const KeySet& keys);

}  // namespace sbf
