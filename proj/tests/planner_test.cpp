#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sbf/diagnostics.hpp"
#include "sbf/planner.hpp"

namespace sbf {
namespace {

// Independent reference: the model written with std::pow, minimized by a
// plain scan. Shares no code with the planner.
double reference_rate(double alpha, double fp, double fn, double b1, double b2) {
  return std::pow(alpha, b1) * (fp + (1 - fp) * std::pow(alpha, b2 / fn));
}

double reference_argmin_b2(double alpha, double fp, double fn, double b, double step) {
  double best_b2 = 0;
  double best = reference_rate(alpha, fp, fn, b, 0);
  for (double b2 = step; b2 <= b + 1e-12; b2 += step) {
    const double v = reference_rate(alpha, fp, fn, b - b2, b2);
    if (v < best) {
      best = v;
      best_b2 = b2;
    }
  }
  return best_b2;
}

constexpr ModelParams kWorkedExample{0.5, 0.01, 0.5, 8.0};

TEST(Model, ReproducesWorkedExampleValues) {
  EXPECT_NEAR(model_false_positive_rate(kWorkedExample, 0, 8), 0.010015, 1e-6);
  ModelParams six = kWorkedExample;
  six.b = 6;
  EXPECT_NEAR(model_false_positive_rate(six, 0, 6), 0.010242, 1e-6);
  EXPECT_NEAR(model_false_positive_rate(six, 2.6853, 3.3147), 0.003109, 1e-6);
  // 0.01 + 0.99 * 2^-16 exactly
  EXPECT_DOUBLE_EQ(model_false_positive_rate(kWorkedExample, 0, 8), 0.01 + 0.99 / 65536.0);
}

TEST(Model, ZeroBitsGivesOne) {
  EXPECT_DOUBLE_EQ(model_false_positive_rate(kWorkedExample, 0, 0), 1.0);
}

TEST(Model, EmptyBackupRejectsEverything) {
  const ModelParams p{0.5, 0.02, 0.0, 8};
  EXPECT_DOUBLE_EQ(model_false_positive_rate(p, 3, 0), 0.125 * 0.02);
  EXPECT_DOUBLE_EQ(model_false_positive_rate(p, 3, 5), 0.125 * 0.02);
}

TEST(Model, RejectsInvalidInputs) {
  EXPECT_THROW(model_false_positive_rate({1.0, 0.1, 0.5, 8}, 0, 0), std::invalid_argument);
  EXPECT_THROW(model_false_positive_rate({0.0, 0.1, 0.5, 8}, 0, 0), std::invalid_argument);
  EXPECT_THROW(model_false_positive_rate({0.5, 1.1, 0.5, 8}, 0, 0), std::invalid_argument);
  EXPECT_THROW(model_false_positive_rate({0.5, 0.1, -0.1, 8}, 0, 0), std::invalid_argument);
  EXPECT_THROW(model_false_positive_rate(kWorkedExample, -1, 0), std::invalid_argument);
  EXPECT_THROW(model_false_positive_rate(kWorkedExample, 0, NAN), std::invalid_argument);
}

TEST(Model, StrictlyDecreasingInEachAllocation) {
  double prev = 2;
  for (double b1 = 0; b1 <= 10; b1 += 0.25) {
    const double v = model_false_positive_rate(kWorkedExample, b1, 2);
    EXPECT_LT(v, prev);
    prev = v;
  }
  prev = 2;
  for (double b2 = 0; b2 <= 10; b2 += 0.25) {
    const double v = model_false_positive_rate(kWorkedExample, 1, b2);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Optimize, WorkedExampleOptimum) {
  const BudgetPlan plan = optimize_backup_bits(kWorkedExample, 1000);
  EXPECT_NEAR(plan.b2, std::log2(99.0) / 2, 1e-12);
  EXPECT_NEAR(plan.b2, 3.3147, 1e-4);
  EXPECT_NEAR(plan.b1, 4.6853, 1e-4);
  EXPECT_EQ(plan.m, 1000u);
  EXPECT_NEAR(plan.modeled_fpr, 0.000777, 1e-6);
  EXPECT_DOUBLE_EQ(plan.modeled_fpr, model_false_positive_rate(kWorkedExample, plan.b1, plan.b2));
  EXPECT_TRUE(plan.note.empty());

  ModelParams six = kWorkedExample;
  six.b = 6;
  EXPECT_NEAR(optimize_backup_bits(six).modeled_fpr, 0.003109, 1e-6);
}

TEST(Optimize, RatioOfOneSendsEverythingToInitial) {
  const BudgetPlan plan = optimize_backup_bits({0.5, 0.5, 0.5, 8});
  EXPECT_EQ(plan.b2, 0.0);
  EXPECT_EQ(plan.b1, 8.0);
}

TEST(Optimize, StandardBloomAlpha) {
  const double alpha = std::exp(-std::log(2.0) * std::log(2.0));
  const ModelParams p{alpha, 0.01, 0.5, 8};
  const BudgetPlan plan = optimize_backup_bits(p);
  EXPECT_NEAR(plan.b2, 4.78, 0.005);
  EXPECT_NEAR(plan.b2, reference_argmin_b2(alpha, 0.01, 0.5, 8, 1e-4), 1e-4);
}

TEST(Optimize, ClampsHighWhenBudgetIsSmall) {
  const BudgetPlan plan = optimize_backup_bits({0.5, 0.01, 0.5, 2});
  EXPECT_EQ(plan.b2, 2.0);
  EXPECT_EQ(plan.b1, 0.0);
}

TEST(Optimize, DegenerateProfiles) {
  ScopedWarningCapture capture;
  // f_n = 0: nothing to back up.
  EXPECT_EQ(optimize_backup_bits({0.5, 0.1, 0.0, 8}).b2, 0.0);
  // f_n = 1: backup bits act only on the (1 - f_p) term.
  const BudgetPlan all_fn = optimize_backup_bits({0.5, 0.1, 1.0, 8});
  EXPECT_EQ(all_fn.b2, 0.0);
  EXPECT_LE(all_fn.modeled_fpr, reference_rate(0.5, 0.1, 1.0, 0, 8));
  // f_p = 1: backup never consulted for non-keys.
  EXPECT_EQ(optimize_backup_bits({0.5, 1.0, 0.3, 8}).b2, 0.0);
  // f_p = 0: rate is alpha^(b1 + b2/f_n), so the backup wins.
  const BudgetPlan no_fp = optimize_backup_bits({0.5, 0.0, 0.3, 8});
  EXPECT_EQ(no_fp.b2, 8.0);
  EXPECT_FALSE(no_fp.note.empty());
  EXPECT_EQ(capture.messages().size(), 3u);

  // Each special case agrees with exhaustive search.
  for (ModelParams p : {ModelParams{0.5, 0.1, 0.0, 8}, ModelParams{0.5, 0.1, 1.0, 8},
                        ModelParams{0.5, 1.0, 0.3, 8}, ModelParams{0.5, 0.0, 0.3, 8}}) {
    EXPECT_NEAR(optimize_backup_bits(p).modeled_fpr, grid_search_allocation(p, 1e-3).modeled_fpr,
                1e-15);
  }
}

TEST(Grid, WorkedExample) {
  const BudgetPlan plan = grid_search_allocation(kWorkedExample, 1e-4);
  EXPECT_NEAR(plan.b2, 3.3147, 1e-4);
}

TEST(Grid, TwoPointGrid) {
  // step = b: only (b, 0) and (0, b) are candidates.
  const BudgetPlan plan = grid_search_allocation(kWorkedExample, 8);
  const double initial_only = reference_rate(0.5, 0.01, 0.5, 8, 0);
  const double backup_only = reference_rate(0.5, 0.01, 0.5, 0, 8);
  EXPECT_EQ(plan.b2, initial_only <= backup_only ? 0.0 : 8.0);
}

TEST(Grid, IncludesBudgetEndpoint) {
  // 2 / 0.3 is not an integer; the clamped optimum b2 = b must still be found.
  const BudgetPlan plan = grid_search_allocation({0.5, 0.01, 0.5, 2}, 0.3);
  EXPECT_EQ(plan.b2, 2.0);
}

TEST(Grid, RejectsNonPositiveStep) {
  EXPECT_THROW(grid_search_allocation(kWorkedExample, 0), std::invalid_argument);
}

TEST(Crossover, Values) {
  EXPECT_DOUBLE_EQ(crossover_level(kWorkedExample), 0.01);
  EXPECT_EQ(crossover_level({0.5, 0.0, 0.3, 8}), 0.0);
  EXPECT_THROW(crossover_level({0.5, 0.1, 0.0, 8}), std::invalid_argument);
  EXPECT_THROW(crossover_level({0.5, 0.1, 1.0, 8}), std::invalid_argument);
  // Leakage through the backup at the optimum: 0.99 * 2^(-3.3147 / 0.5) = 0.99 / 99.
  const BudgetPlan plan = optimize_backup_bits(kWorkedExample);
  EXPECT_NEAR(0.99 * std::pow(0.5, plan.b2 / 0.5), 0.01, 1e-14);
}

TEST(SelectOracle, DominatingProfileWins) {
  const std::vector<OracleProfile> profiles{{0.01, 0.5, 0}, {0.02, 0.6, 0}};
  EXPECT_EQ(select_best_oracle(profiles, 0.5, 8).index, 0u);
}

TEST(SelectOracle, Singleton) {
  const std::vector<OracleProfile> profiles{{0.3, 0.3, 10}};
  const OracleChoice choice = select_best_oracle(profiles, 0.5, 8);
  EXPECT_EQ(choice.index, 0u);
  EXPECT_DOUBLE_EQ(choice.plan.b2, optimize_backup_bits({0.5, 0.3, 0.3, 8}).b2);
}

TEST(SelectOracle, NumericComparison) {
  const std::vector<OracleProfile> profiles{{0.01, 0.5, 0}, {0.05, 0.1, 0}};
  // Optimized values checked independently by scan:
  //   (0.01, 0.5): b2 = 3.3147, rate 7.7733e-4
  //   (0.05, 0.1): b2 = 0.7418, rate 3.6290e-4
  const double r0 = reference_rate(0.5, 0.01, 0.5, 8 - reference_argmin_b2(0.5, 0.01, 0.5, 8, 1e-4),
                                   reference_argmin_b2(0.5, 0.01, 0.5, 8, 1e-4));
  const double r1 = reference_rate(0.5, 0.05, 0.1, 8 - reference_argmin_b2(0.5, 0.05, 0.1, 8, 1e-4),
                                   reference_argmin_b2(0.5, 0.05, 0.1, 8, 1e-4));
  ASSERT_LT(r1, r0);
  const OracleChoice choice = select_best_oracle(profiles, 0.5, 8);
  EXPECT_EQ(choice.index, 1u);
  EXPECT_NEAR(choice.plan.modeled_fpr, r1, 1e-9);
  EXPECT_NEAR(choice.plan.b2, grid_search_allocation({0.5, 0.05, 0.1, 8}, 1e-4).b2, 1e-4);
}

TEST(SelectOracle, TiesPreferSmallerOracleThenLowerIndex) {
  const std::vector<OracleProfile> profiles{{0.1, 0.2, 500}, {0.1, 0.2, 100}, {0.1, 0.2, 100}};
  EXPECT_EQ(select_best_oracle(profiles, 0.5, 8).index, 1u);
  EXPECT_THROW(select_best_oracle({}, 0.5, 8), std::invalid_argument);
}

// Property checks over random parameter draws.

struct Draw {
  double alpha, fp, fn, b;
};

std::vector<Draw> random_draws(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> a(0.3, 0.9), q(0.01, 0.99), bud(1, 16);
  std::vector<Draw> out(n);
  for (auto& d : out) d = {a(rng), q(rng), q(rng), bud(rng)};
  return out;
}

TEST(PlannerProperties, ClosedFormMatchesGrid) {
  for (const Draw& d : random_draws(200, 1)) {
    const ModelParams p{d.alpha, d.fp, d.fn, d.b};
    EXPECT_LE(std::abs(optimize_backup_bits(p).b2 - grid_search_allocation(p, 1e-4).b2), 1e-4)
        << d.alpha << " " << d.fp << " " << d.fn << " " << d.b;
  }
}

TEST(PlannerProperties, BackupSizeIndependentOfBudget) {
  for (const Draw& d : random_draws(300, 2)) {
    const double b2 = optimize_backup_bits({d.alpha, d.fp, d.fn, 16}).b2;
    if (!(b2 > 0 && b2 < 6)) continue;
    for (double b : {6.0, 8.0, 10.0, 12.0}) {
      EXPECT_NEAR(optimize_backup_bits({d.alpha, d.fp, d.fn, b}).b2, b2, 1e-9);
    }
  }
}

TEST(PlannerProperties, OptimalRateDecreasesWithBudget) {
  for (const Draw& d : random_draws(200, 3)) {
    double prev = 2;
    for (double b = 0; b <= 16; b += 0.5) {
      const double v = optimize_backup_bits({d.alpha, d.fp, d.fn, b}).modeled_fpr;
      EXPECT_LT(v, prev);
      prev = v;
    }
  }
}

TEST(PlannerProperties, SandwichNeverLoses) {
  for (const Draw& d : random_draws(500, 4)) {
    const ModelParams p{d.alpha, d.fp, d.fn, d.b};
    const BudgetPlan plan = optimize_backup_bits(p);
    const double learned = model_false_positive_rate(p, 0, d.b);
    EXPECT_LE(plan.modeled_fpr, learned);
    if (plan.b2 == d.b) {
      EXPECT_EQ(plan.modeled_fpr, learned);
    } else {
      EXPECT_LT(plan.modeled_fpr, learned);
    }
  }
}

TEST(PlannerProperties, StationarityAndCrossoverIdentities) {
  std::size_t unclamped = 0;
  for (const Draw& d : random_draws(1000, 5)) {
    const ModelParams p{d.alpha, d.fp, d.fn, d.b};
    const BudgetPlan plan = optimize_backup_bits(p);
    if (plan.b2 <= 0 || plan.b2 >= d.b) continue;
    ++unclamped;
    // Backup leakage at the optimum equals the crossover level.
    const double leak = (1 - d.fp) * std::pow(d.alpha, plan.b2 / d.fn);
    EXPECT_NEAR(leak, crossover_level(p), 1e-12 * crossover_level(p));
    // Derivative of the objective in b1 vanishes:
    //   f_p a^b1 = (1/f_n - 1)(1 - f_p) a^b1 a^(b2/f_n)
    const double lhs = d.fp * std::pow(d.alpha, plan.b1);
    const double rhs = (1 / d.fn - 1) * (1 - d.fp) * std::pow(d.alpha, plan.b1) *
                       std::pow(d.alpha, plan.b2 / d.fn);
    EXPECT_NEAR(lhs, rhs, 1e-10 * lhs);
  }
  EXPECT_GT(unclamped, 100u);
}

}  // namespace
}  // namespace sbf
