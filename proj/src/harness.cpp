#include "sbf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace sbf {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kOracleSeedSalt = 0x8EBC6AF09C88C6E3ULL;

KeySet generate_role(std::uint64_t count, std::size_t key_len, std::uint64_t seed, char role) {
  const std::size_t free_bytes = key_len - 1;
  if (free_bytes < 8) {
    const double capacity = std::ldexp(1.0, static_cast<int>(8 * free_bytes));
    if (static_cast<double>(count) > capacity) {
      throw std::invalid_argument(fmt::format(
          "{} keys do not fit in {} byte keys ({} distinct)", count, key_len, capacity));
    }
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(static_cast<unsigned char>(role))};
  std::mt19937_64 rng(seq);
  std::unordered_set<std::string> seen;
  seen.reserve(count);
  std::vector<Key> keys;
  keys.reserve(count);
  std::string buf(key_len, '\0');
  buf[0] = role;
  while (keys.size() < count) {
    for (std::size_t i = 1; i < key_len; i += 8) {
      std::uint64_t word = rng();
      for (std::size_t j = i; j < std::min(i + 8, key_len); ++j, word >>= 8) {
        buf[j] = static_cast<char>(word & 0xFF);
      }
    }
    if (seen.insert(buf).second) keys.emplace_back(buf);
  }
  return KeySet(std::move(keys));
}

std::uint64_t count_accepted(const BuiltStructure& s, const KeySet& probes, unsigned threads) {
  const std::size_t n = probes.size();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n / 1024 + 1)));
  auto count_range = [&](std::size_t lo, std::size_t hi) {
    std::uint64_t hits = 0;
    for (std::size_t i = lo; i < hi; ++i) hits += s.query(probes[i]) ? 1 : 0;
    return hits;
  };
  if (threads == 1) return count_range(0, n);
  std::vector<std::uint64_t> partial(threads, 0);
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      partial[t] = count_range(n * t / threads, n * (t + 1) / threads);
    });
  }
  for (auto& w : workers) w.join();
  std::uint64_t total = 0;
  for (std::uint64_t p : partial) total += p;
  return total;
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

Workload generate_workload(std::uint64_t m, std::uint64_t n_train_neg, std::uint64_t n_test_neg,
                           std::size_t key_len, std::uint64_t seed) {
  if (key_len < 2 || key_len > kMaxKeyLength) {
    throw std::invalid_argument(
        fmt::format("key_len must lie in [2, {}], got {}", kMaxKeyLength, key_len));
  }
  Workload w;
  w.seed = seed;
  w.positives = generate_role(m, key_len, seed, kPositiveRole);
  w.train_negatives = generate_role(n_train_neg, key_len, seed, kTrainNegativeRole);
  w.test_negatives = generate_role(n_test_neg, key_len, seed, kTestNegativeRole);
  return w;
}

std::string_view to_string(StructureKind kind) noexcept {
  switch (kind) {
    case StructureKind::kPlainBloom:
      return "plain";
    case StructureKind::kLearned:
      return "learned";
    case StructureKind::kSandwiched:
      return "sandwiched";
  }
  return "?";
}

StructureKind structure_kind_from_string(std::string_view name) {
  for (StructureKind k :
       {StructureKind::kPlainBloom, StructureKind::kLearned, StructureKind::kSandwiched}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument(
      fmt::format("unknown structure '{}' (plain, learned, sandwiched)", name));
}

bool BuiltStructure::query(std::string_view key) const {
  return std::visit(
      [&](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Filter>) {
          return s.contains(key);
        } else {
          return s.query(key);
        }
      },
      structure);
}

Bytes BuiltStructure::serialize() const {
  return std::visit([](const auto& s) { return s.serialize(); }, structure);
}

std::variant<Filter, LearnedBloomFilter, SandwichedFilter> deserialize_structure(
    std::span<const std::uint8_t> bytes) {
  const std::string_view magic = peek_magic(bytes);
  if (magic == "SBFL") return Filter::deserialize(bytes);
  if (magic == "LRND") return LearnedBloomFilter::deserialize(bytes);
  if (magic == "SNDW") return SandwichedFilter::deserialize(bytes);
  if (magic.empty()) throw FormatError(FormatErrorCode::kTruncated, "structure file too short");
  throw FormatError(FormatErrorCode::kBadMagic, "not a structure file");
}

ConfidenceInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  // Clamp so the bounds bracket p despite rounding at p = 0 or 1.
  return {std::min(p, std::max(0.0, center - half)), std::max(p, std::min(1.0, center + half))};
}

MeasurementReport measure_fpr(const BuiltStructure& structure, const KeySet& positives,
                              const KeySet& test_negatives, const MeasureOptions& options) {
  for (const Key& k : positives) {
    if (!structure.query(k)) {
      throw ContractViolation(fmt::format("{} structure rejects stored key {}",
                                          to_string(structure.kind), to_hex(k.bytes())));
    }
  }
  MeasurementReport r;
  r.structure = structure.kind;
  r.plan = structure.plan;
  r.oracle_profile = structure.oracle_profile;
  r.model_fpr = structure.plan.modeled_fpr;
  r.probes = test_negatives.size();

  const auto start = std::chrono::steady_clock::now();
  r.false_positives = count_accepted(structure, test_negatives, options.threads);
  const auto elapsed = std::chrono::steady_clock::now() - start;

  r.empirical_fpr = r.probes == 0 ? kNaN
                                  : static_cast<double>(r.false_positives) /
                                        static_cast<double>(r.probes);
  const ConfidenceInterval ci = wilson_interval(r.false_positives, r.probes);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  if (!options.deterministic && r.probes > 0) {
    r.ns_per_query = static_cast<double>(
                         std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count()) /
                     static_cast<double>(r.probes);
  }
  return r;
}

TrainedOracle make_oracle(const ExperimentConfig& config, const Workload& workload) {
  if (config.oracle.kind == OracleSettings::Kind::kSynthetic) {
    Oracle oracle = make_synthetic_oracle(workload.positives, config.f_p, config.f_n,
                                          config.seed ^ kOracleSeedSalt);
    OracleProfile profile;
    profile.f_p = config.f_p;
    const double m = static_cast<double>(workload.positives.size());
    profile.f_n = m == 0 ? config.f_n : std::round(config.f_n * m) / m;
    profile.size_bits = oracle.size_bits();
    return {std::move(oracle), profile};
  }
  const Oracle trained =
      train_score_oracle(workload.positives, workload.train_negatives, config.oracle.smoothing);
  Oracle oracle = choose_tau(trained, workload.positives, config.f_n);
  OracleProfile profile = measure_profile(oracle, workload.positives, workload.train_negatives);
  return {std::move(oracle), profile};
}

BuiltStructure build_structure(StructureKind kind, double b, const ExperimentConfig& config,
                               const Workload& workload, const TrainedOracle& oracle) {
  const KeySet& keys = workload.positives;
  const ModelParams params{alpha(config.backend), oracle.profile.f_p, oracle.profile.f_n, b};
  BudgetPlan plan;
  plan.b = b;
  plan.m = keys.size();
  plan.alpha = params.alpha;
  switch (kind) {
    case StructureKind::kPlainBloom: {
      plan.b1 = b;
      plan.modeled_fpr = std::pow(params.alpha, b);
      Filter f = build_filter(keys, {config.backend, b, initial_filter_seed(config.seed)});
      return {kind, std::move(f), plan, oracle.profile};
    }
    case StructureKind::kLearned: {
      plan.b2 = b;
      plan.modeled_fpr = model_false_positive_rate(params, 0, b);
      LearnedBloomFilter l =
          build_learned_for_budget(keys, oracle.oracle, b, config.backend, config.seed);
      return {kind, std::move(l), plan, oracle.profile};
    }
    case StructureKind::kSandwiched: {
      plan = optimize_backup_bits(params, keys.size());
      SandwichedFilter s = build_sandwiched(keys, oracle.oracle, plan,
                                            SandwichConfig::uniform(config.backend, config.seed));
      return {kind, std::move(s), plan, oracle.profile};
    }
  }
  throw std::invalid_argument("unknown structure kind");
}

std::vector<MeasurementReport> sweep(const ExperimentConfig& config, const Workload& workload,
                                     const TrainedOracle& oracle, const MeasureOptions& options) {
  if (config.budgets.empty()) throw std::invalid_argument("sweep needs at least one budget");
  for (double b : config.budgets) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument(fmt::format("budgets must be finite and >= 0, got {}", b));
    }
  }
  std::vector<MeasurementReport> rows;
  for (double b : config.budgets) {
    for (StructureKind kind :
         {StructureKind::kPlainBloom, StructureKind::kLearned, StructureKind::kSandwiched}) {
      std::optional<BuiltStructure> built;
      try {
        built = build_structure(kind, b, config, workload, oracle);
      } catch (const std::exception& e) {
        MeasurementReport r;
        r.structure = kind;
        r.plan.b = b;
        r.plan.b1 = r.plan.b2 = kNaN;
        r.oracle_profile = oracle.profile;
        r.model_fpr = r.empirical_fpr = r.ci_low = r.ci_high = r.ns_per_query = kNaN;
        r.error = e.what();
        rows.push_back(std::move(r));
        continue;
      }
      rows.push_back(measure_fpr(*built, workload.positives, workload.test_negatives, options));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    if (x.plan.b != y.plan.b) return x.plan.b < y.plan.b;
    return x.structure < y.structure;
  });
  return rows;
}

std::string to_csv(const std::vector<MeasurementReport>& reports) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : reports) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", number(r.plan.b), to_string(r.structure),
                       number(r.plan.b1), number(r.plan.b2), number(r.model_fpr),
                       number(r.empirical_fpr), number(r.ci_low), number(r.ci_high), r.probes,
                       number(r.ns_per_query));
  }
  return out;
}

std::string to_json(const std::vector<MeasurementReport>& reports) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json row = {
        {"b", json_number(r.plan.b)},
        {"structure", to_string(r.structure)},
        {"b1", json_number(r.plan.b1)},
        {"b2", json_number(r.plan.b2)},
        {"model_fpr", json_number(r.model_fpr)},
        {"empirical_fpr", json_number(r.empirical_fpr)},
        {"ci_low", json_number(r.ci_low)},
        {"ci_high", json_number(r.ci_high)},
        {"probes", r.probes},
        {"false_positives", r.false_positives},
        {"ns_per_query", json_number(r.ns_per_query)},
        {"oracle_f_p", json_number(r.oracle_profile.f_p)},
        {"oracle_f_n", json_number(r.oracle_profile.f_n)},
    };
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  return rows.dump(2) + "\n";
}

std::string to_table(const std::vector<MeasurementReport>& reports) {
  std::string out = fmt::format("{:>6} {:<11} {:>8} {:>8} {:>12} {:>12} {:>25} {:>9} {:>8}\n", "b",
                                "structure", "b1", "b2", "model", "empirical", "95% CI", "probes",
                                "ns/query");
  for (const auto& r : reports) {
    if (!r.error.empty()) {
      out += fmt::format("{:>6} {:<11} error: {}\n", r.plan.b, to_string(r.structure), r.error);
      continue;
    }
    out += fmt::format("{:>6} {:<11} {:>8.4f} {:>8.4f} {:>12.6g} {:>12.6g} [{:>11.5g}, {:>11.5g}] "
                       "{:>9} {:>8.1f}\n",
                       r.plan.b, to_string(r.structure), r.plan.b1, r.plan.b2, r.model_fpr,
                       r.empirical_fpr, r.ci_low, r.ci_high, r.probes, r.ns_per_query);
  }
  return out;
}

}  // namespace sbf
