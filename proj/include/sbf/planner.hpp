#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "sbf/oracle_profile.hpp"

namespace sbf {

// Inputs to the sandwich false-positive model. alpha is the backend's
// per-bit decay rate, f_p / f_n the oracle's false-positive probability on
// non-keys and false-negative fraction on the key set, b the total budget in
// bits per key of the key set.
struct ModelParams {
  double alpha = 0.5;
  double f_p = 0.0;
  double f_n = 0.0;
  double b = 0.0;
};

// How a budget of b bits per key is split between the initial filter (b1)
// and the backup filter (b2). All three are per key of the full key set, so
// the backup's rate per stored key is b2 / f_n.
struct BudgetPlan {
  double b = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  std::uint64_t m = 0;
  double alpha = 0.5;
  double modeled_fpr = 1.0;
  // Set when a degenerate oracle profile bypassed the closed form.
  std::string note;
};

// alpha^b1 * (f_p + (1 - f_p) * alpha^(b2 / f_n)).
//
// With f_n = 0 the backup holds no keys and rejects everything, so the backup
// term is 0 for every b2. Throws std::invalid_argument for alpha outside
// (0, 1), probabilities outside [0, 1] or negative allocations.
double model_false_positive_rate(const ModelParams& params, double b1, double b2);

// Closed-form optimal split: the stationary point
//   b2* = f_n * log_alpha( f_p / ((1 - f_p) (1/f_n - 1)) )
// clamped to [0, b], b1 = b - b2. The objective is convex in b1, so the
// clamped stationary point is the constrained minimum. Degenerate profiles
// (f_p or f_n at 0 or 1) are resolved directly and noted in the plan.
BudgetPlan optimize_backup_bits(const ModelParams& params, std::uint64_t m = 0);

// Exhaustive evaluation over b2 in {0, step, 2 step, ..., b} (b itself is
// always included). Ties go to the smaller b2.
BudgetPlan grid_search_allocation(const ModelParams& params, double step, std::uint64_t m = 0);

// Leakage through the backup filter at which extra bits stop paying off
// there: f_p / (1/f_n - 1). Requires f_n strictly inside (0, 1).
double crossover_level(const ModelParams& params);

struct OracleChoice {
  std::size_t index = 0;
  BudgetPlan plan;
};

// Optimizes each profile at (alpha, b) and returns the one with the lowest
// modeled rate; ties go to the smaller oracle, then the lower index. Throws
// std::invalid_argument for an empty list.
OracleChoice select_best_oracle(std::span<const OracleProfile> profiles, double alpha, double b);

}  // namespace sbf
