#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sbf/filters.hpp"
#include "sbf/key.hpp"
#include "sbf/oracle.hpp"
#include "sbf/oracle_profile.hpp"
#include "sbf/planner.hpp"
#include "sbf/sandwich.hpp"

namespace sbf {

// Role prefixes keep the generated sets disjoint by construction.
inline constexpr char kPositiveRole = '\x01';
inline constexpr char kTrainNegativeRole = '\x02';
inline constexpr char kTestNegativeRole = '\x03';

struct Workload {
  KeySet positives;
  KeySet train_negatives;
  KeySet test_negatives;
  std::uint64_t seed = 0;
};

// Keys are the role byte followed by key_len - 1 bytes from mt19937_64.
// Duplicates are redrawn, so set sizes are exact. Throws
// std::invalid_argument for key_len outside [2, 4096] or a count that the
// key space cannot hold.
Workload generate_workload(std::uint64_t m, std::uint64_t n_train_neg, std::uint64_t n_test_neg,
                           std::size_t key_len, std::uint64_t seed);

enum class StructureKind : std::uint8_t { kPlainBloom, kLearned, kSandwiched };

std::string_view to_string(StructureKind kind) noexcept;
StructureKind structure_kind_from_string(std::string_view name);

// A frozen structure together with the plan and oracle profile it was built
// from. model_fpr() reads plan.modeled_fpr.
struct BuiltStructure {
  StructureKind kind = StructureKind::kPlainBloom;
  std::variant<Filter, LearnedBloomFilter, SandwichedFilter> structure;
  BudgetPlan plan;
  OracleProfile oracle_profile;

  bool query(std::string_view key) const;
  bool query(const Key& key) const { return query(key.bytes()); }
  Bytes serialize() const;
};

// Reads any of the three structure blobs, dispatching on the magic.
std::variant<Filter, LearnedBloomFilter, SandwichedFilter> deserialize_structure(
    std::span<const std::uint8_t> bytes);

struct MeasurementReport {
  StructureKind structure = StructureKind::kPlainBloom;
  BudgetPlan plan;
  OracleProfile oracle_profile;
  std::uint64_t probes = 0;
  std::uint64_t false_positives = 0;
  double empirical_fpr = 0.0;
  double model_fpr = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double ns_per_query = 0.0;
  // Set when the row could not be built; measurement fields are then NaN.
  std::string error;
};

// Raised when a structure rejects one of its own keys.
class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfidenceInterval {
  double low;
  double high;
};

inline constexpr double kWilsonZ95 = 1.959963984540054;

ConfidenceInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                   double z = kWilsonZ95);

struct MeasureOptions {
  unsigned threads = 1;
  // Skip timing so that reports are reproducible; ns_per_query is then 0.
  bool deterministic = false;
};

// Checks every positive first and throws ContractViolation on a miss, then
// probes each test negative once.
MeasurementReport measure_fpr(const BuiltStructure& structure, const KeySet& positives,
                              const KeySet& test_negatives, const MeasureOptions& options = {});

struct OracleSettings {
  enum class Kind { kSynthetic, kScore } kind = Kind::kSynthetic;
  double smoothing = 1.0;  // score oracle only
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::uint64_t m = 100000;
  std::size_t key_len = 16;
  std::uint64_t n_train_neg = 100000;
  std::uint64_t n_test_neg = 1000000;
  FilterBackend backend = FilterBackend::kFingerprintPH;
  double f_p = 0.01;
  double f_n = 0.5;
  std::vector<double> budgets{6, 8, 10, 12};
  OracleSettings oracle;
};

struct TrainedOracle {
  Oracle oracle;
  OracleProfile profile;
};

// Synthetic: rates as configured, f_n rounded to whole keys. Score: trained
// on positives and train negatives, tau chosen for the configured f_n, f_p
// measured on the train negatives.
TrainedOracle make_oracle(const ExperimentConfig& config, const Workload& workload);

// Builds a structure at budget b; the sandwich uses the optimized plan for
// the oracle profile.
BuiltStructure build_structure(StructureKind kind, double b, const ExperimentConfig& config,
                               const Workload& workload, const TrainedOracle& oracle);

// Three rows per budget, sorted by b then structure. Construction failures
// become rows with `error` set; a ContractViolation still propagates.
std::vector<MeasurementReport> sweep(const ExperimentConfig& config, const Workload& workload,
                                     const TrainedOracle& oracle,
                                     const MeasureOptions& options = {});

inline constexpr std::string_view kCsvHeader =
    "b,structure,b1,b2,model_fpr,empirical_fpr,ci_low,ci_high,probes,ns_per_query";

std::string to_csv(const std::vector<MeasurementReport>& reports);
std::string to_json(const std::vector<MeasurementReport>& reports);
std::string to_table(const std::vector<MeasurementReport>& reports);

}  // namespace sbf
