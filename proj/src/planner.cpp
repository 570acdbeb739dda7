#include "sbf/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "sbf/diagnostics.hpp"

namespace sbf {
namespace {

void validate(const ModelParams& p) {
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) {
    throw std::invalid_argument(fmt::format("alpha must lie in (0, 1), got {}", p.alpha));
  }
  if (!(p.f_p >= 0.0 && p.f_p <= 1.0)) {
    throw std::invalid_argument(fmt::format("f_p must lie in [0, 1], got {}", p.f_p));
  }
  if (!(p.f_n >= 0.0 && p.f_n <= 1.0)) {
    throw std::invalid_argument(fmt::format("f_n must lie in [0, 1], got {}", p.f_n));
  }
  if (!(p.b >= 0.0) || !std::isfinite(p.b)) {
    throw std::invalid_argument(fmt::format("b must be finite and >= 0, got {}", p.b));
  }
}

// alpha^x via the natural log, x >= 0.
double alpha_pow(double alpha, double x) { return std::exp(std::log(alpha) * x); }

double model_unchecked(const ModelParams& p, double b1, double b2) {
  const double backup = p.f_n == 0.0 ? 0.0 : alpha_pow(p.alpha, b2 / p.f_n);
  return alpha_pow(p.alpha, b1) * (p.f_p + (1.0 - p.f_p) * backup);
}

BudgetPlan make_plan(const ModelParams& p, double b2, std::uint64_t m, std::string note = {}) {
  BudgetPlan plan;
  plan.b = p.b;
  plan.b2 = b2;
  plan.b1 = p.b - b2;
  plan.m = m;
  plan.alpha = p.alpha;
  plan.modeled_fpr = model_unchecked(p, plan.b1, plan.b2);
  plan.note = std::move(note);
  return plan;
}

BudgetPlan degenerate_plan(const ModelParams& p, double b2, std::uint64_t m, std::string note) {
  warn(note);
  return make_plan(p, b2, m, std::move(note));
}

}  // namespace

double model_false_positive_rate(const ModelParams& params, double b1, double b2) {
  validate(params);
  if (!(b1 >= 0.0) || !(b2 >= 0.0)) {
    throw std::invalid_argument(fmt::format("allocations must be >= 0, got b1={} b2={}", b1, b2));
  }
  return model_unchecked(params, b1, b2);
}

BudgetPlan optimize_backup_bits(const ModelParams& p, std::uint64_t m) {
  validate(p);
  if (p.f_n == 0.0) {
    return make_plan(p, 0.0, m, "oracle has no false negatives; backup filter unused");
  }
  if (p.f_n == 1.0) {
    // Backup bits only act on the (1 - f_p) term, initial bits on both.
    return degenerate_plan(p, 0.0, m,
                           "oracle rejects every key (f_n = 1); all bits go to the initial filter");
  }
  if (p.f_p == 1.0) {
    return degenerate_plan(p, 0.0, m,
                           "oracle accepts every non-key (f_p = 1); backup filter is never "
                           "consulted, all bits go to the initial filter");
  }
  if (p.f_p == 0.0) {
    // Rate is alpha^(b1 + b2 / f_n) and 1 / f_n > 1.
    return degenerate_plan(p, p.b, m,
                           "oracle has no false positives (f_p = 0); all bits go to the backup "
                           "filter");
  }

  const double ratio_log =
      std::log(p.f_p) - std::log1p(-p.f_p) - std::log(1.0 / p.f_n - 1.0);
  const double stationary = p.f_n * ratio_log / std::log(p.alpha);
  return make_plan(p, std::clamp(stationary, 0.0, p.b), m);
}

BudgetPlan grid_search_allocation(const ModelParams& p, double step, std::uint64_t m) {
  validate(p);
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument(fmt::format("step must be > 0, got {}", step));
  }
  double best_b2 = 0.0;
  double best = model_unchecked(p, p.b, 0.0);
  const auto steps = static_cast<std::uint64_t>(std::floor(p.b / step));
  for (std::uint64_t i = 1; i <= steps; ++i) {
    const double b2 = std::min(static_cast<double>(i) * step, p.b);
    const double v = model_unchecked(p, p.b - b2, b2);
    if (v < best) {
      best = v;
      best_b2 = b2;
    }
  }
  if (static_cast<double>(steps) * step < p.b) {
    const double v = model_unchecked(p, 0.0, p.b);
    if (v < best) best_b2 = p.b;
  }
  return make_plan(p, best_b2, m);
}

double crossover_level(const ModelParams& p) {
  validate(p);
  if (p.f_n <= 0.0 || p.f_n >= 1.0) {
    throw std::invalid_argument(fmt::format("crossover level needs f_n in (0, 1), got {}", p.f_n));
  }
  return p.f_p / (1.0 / p.f_n - 1.0);
}

OracleChoice select_best_oracle(std::span<const OracleProfile> profiles, double alpha, double b) {
  if (profiles.empty()) {
    throw std::invalid_argument("select_best_oracle: no candidate profiles");
  }
  OracleChoice best;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const ModelParams params{alpha, profiles[i].f_p, profiles[i].f_n, b};
    BudgetPlan plan = optimize_backup_bits(params);
    if (i == 0) {
      best = {0, std::move(plan)};
      continue;
    }
    const double a = plan.modeled_fpr;
    const double c = best.plan.modeled_fpr;
    const bool tie = std::abs(a - c) <= 1e-12 * std::max(a, c);
    if ((!tie && a < c) || (tie && profiles[i].size_bits < profiles[best.index].size_bits)) {
      best = {i, std::move(plan)};
    }
  }
  return best;
}

}  // namespace sbf
