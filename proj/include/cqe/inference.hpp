#pragma once
// Strategies that collapse a quantile vector into a single ranking score:
// conservative estimation (CSE), dynamic quantile combination (DQC) and
// conditional expectation (CDE), plus the general quantile interpolator they
// are built on.

#include "cqe/head.hpp"

#include <string>

namespace cqe {

enum class StrategyKind { cse, dqc, cde };

StrategyKind parse_strategy_kind(const std::string& name);
std::string to_string(StrategyKind kind);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::cde;
  double tau_low = 0.25;
  double tau_high = 0.7;
  double k = 0.5;  // DQC blend weight on the low quantile
};

// Throws invalid_argument when a field violates its range (taus in (0,1),
// tau_low < tau_high for dqc, k in [0,1]).
void validate(const StrategyConfig& cfg);

// Linear interpolation between the bracketing grid levels; clamps to the
// first/last estimate outside the grid.
double quantile_at(const QuantileEstimates& estimates,
                   const QuantileLevels& levels, double tau);

// Low-quantile score: quantile_at(tau_low).
double cse(const QuantileEstimates& estimates, const QuantileLevels& levels,
           double tau_low);

// k * t(tau_low) + (1-k) * t(tau_high).
double dqc(const QuantileEstimates& estimates, const QuantileLevels& levels,
           double tau_low, double tau_high, double k);

// Trapezoid approximation of the distribution mean from the quantile grid:
// (sum_i t_i + (t_1 + t_N)/2) / (N+1).
double cde(const QuantileEstimates& estimates);

double apply_strategy(const QuantileEstimates& estimates,
                      const QuantileLevels& levels, const StrategyConfig& cfg);

}  // namespace cqe
