#include "cqe/inference.hpp"

#include <algorithm>

namespace cqe {

StrategyKind parse_strategy_kind(const std::string& name) {
  if (name == "cse") return StrategyKind::cse;
  if (name == "dqc") return StrategyKind::dqc;
  if (name == "cde") return StrategyKind::cde;
  throw std::invalid_argument("unknown strategy '" + name + "' (expected cse, dqc or cde)");
}

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::cse: return "cse";
    case StrategyKind::dqc: return "dqc";
    case StrategyKind::cde: return "cde";
  }
  throw std::logic_error("to_string: bad StrategyKind");
}

void validate(const StrategyConfig& cfg) {
  if (!(cfg.tau_low > 0.0 && cfg.tau_low < 1.0))
    throw std::invalid_argument("strategy: tau_low must lie in (0,1)");
  if (!(cfg.tau_high > 0.0 && cfg.tau_high < 1.0))
    throw std::invalid_argument("strategy: tau_high must lie in (0,1)");
  if (!(cfg.k >= 0.0 && cfg.k <= 1.0))
    throw std::invalid_argument("strategy: k must lie in [0,1]");
  if (cfg.kind == StrategyKind::dqc && !(cfg.tau_low < cfg.tau_high))
    throw std::invalid_argument("strategy: dqc requires tau_low < tau_high");
}

double quantile_at(const QuantileEstimates& estimates,
                   const QuantileLevels& levels, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("quantile_at: tau must lie in (0,1)");
  const Eigen::Index n = estimates.values.size();
  if (n == 0 || n != levels.levels.size())
    throw std::invalid_argument("quantile_at: estimates/levels length mismatch");
  const Vec& t = estimates.values;
  const Vec& lv = levels.levels;
  if (tau <= lv[0]) return t[0];
  if (tau >= lv[n - 1]) return t[n - 1];
  const double* begin = lv.data();
  const Eigen::Index hi = std::upper_bound(begin, begin + n, tau) - begin;
  const Eigen::Index lo = hi - 1;
  const double w = (tau - lv[lo]) / (lv[hi] - lv[lo]);
  return t[lo] + w * (t[hi] - t[lo]);
}

double cse(const QuantileEstimates& estimates, const QuantileLevels& levels,
           double tau_low) {
  return quantile_at(estimates, levels, tau_low);
}

double dqc(const QuantileEstimates& estimates, const QuantileLevels& levels,
           double tau_low, double tau_high, double k) {
  if (!(k >= 0.0 && k <= 1.0))
    throw std::invalid_argument("dqc: k must lie in [0,1]");
  if (!(tau_low < tau_high))
    throw std::invalid_argument("dqc: tau_low must be < tau_high");
  return k * quantile_at(estimates, levels, tau_low) +
         (1.0 - k) * quantile_at(estimates, levels, tau_high);
}

double cde(const QuantileEstimates& estimates) {
  const Eigen::Index n = estimates.values.size();
  if (n == 0) throw std::invalid_argument("cde: empty estimates");
  const Vec& t = estimates.values;
  return (t.sum() + 0.5 * (t[0] + t[n - 1])) / static_cast<double>(n + 1);
}

double apply_strategy(const QuantileEstimates& estimates,
                      const QuantileLevels& levels, const StrategyConfig& cfg) {
  switch (cfg.kind) {
    case StrategyKind::cse: return cse(estimates, levels, cfg.tau_low);
    case StrategyKind::dqc:
      return dqc(estimates, levels, cfg.tau_low, cfg.tau_high, cfg.k);
    case StrategyKind::cde: return cde(estimates);
  }
  throw std::logic_error("apply_strategy: bad StrategyKind");
}

}  // namespace cqe
