#include "cqe/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cqe {

CandidatePool pool_from_spec(const SyntheticSpec& spec, int n,
                             std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("pool_from_spec: n must be >= 1");
  Rng rng(seed);
  CandidatePool pool;
  pool.items.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Candidate c;
    c.features.resize(spec.features.n);
    for (int j = 0; j < spec.features.n; ++j)
      c.features[j] = rng.uniform(spec.features.lo, spec.features.hi);
    c.dist = conditional_dist(spec, c.features);
    pool.items.push_back(std::move(c));
  }
  return pool;
}

std::vector<int> rank_by_scores(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("rank: empty pool");
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

QuantileEstimates oracle_estimates(const Candidate& candidate,
                                   const QuantileLevels& levels) {
  Vec values(levels.n());
  double running = 0.0;
  for (int i = 0; i < levels.n(); ++i) {
    // Running max guards against sub-ulp wobble in the numeric inversions.
    running = std::max(running, dist_quantile(candidate.dist, levels.levels[i]));
    values[i] = running;
  }
  return QuantileEstimates{std::move(values)};
}

std::vector<int> rank(const CqeModel& model, const CandidatePool& pool,
                      const StrategyConfig& strategy) {
  if (pool.items.empty()) throw std::invalid_argument("rank: empty pool");
  validate(strategy);
  std::vector<InteractionRecord> records(pool.items.size());
  for (std::size_t i = 0; i < pool.items.size(); ++i) {
    const Vec& f = pool.items[i].features;
    if (f.size() != static_cast<Eigen::Index>(model.encoder.num_columns.size()))
      throw std::invalid_argument("rank: model/pool feature dims mismatch");
    records[i].numeric_feats.assign(f.data(), f.data() + f.size());
    records[i].duration_s = 1.0;
  }
  return rank_by_scores(strategy_scores(model, records, strategy));
}

std::vector<int> rank_oracle(const CandidatePool& pool, int n_quantiles,
                             const StrategyConfig& strategy) {
  if (pool.items.empty()) throw std::invalid_argument("rank: empty pool");
  validate(strategy);
  const QuantileLevels levels = make_levels(n_quantiles);
  std::vector<double> scores(pool.items.size());
  for (std::size_t i = 0; i < pool.items.size(); ++i)
    scores[i] = apply_strategy(oracle_estimates(pool.items[i], levels), levels,
                               strategy);
  return rank_by_scores(scores);
}

void validate(const UserModelConfig& cfg) {
  if (!(cfg.p_churn >= 0.0 && cfg.p_churn <= 1.0))
    throw std::invalid_argument("user model: p_churn must lie in [0,1]");
  if (!(cfg.threshold_s >= 0.0))
    throw std::invalid_argument("user model: threshold_s must be >= 0");
}

SessionOutcome simulate_session(const CandidatePool& pool,
                                const std::vector<int>& order,
                                const UserModelConfig& user_model, int horizon,
                                std::uint64_t seed) {
  validate(user_model);
  if (horizon < 1) throw std::invalid_argument("simulate_session: horizon must be >= 1");
  if (order.empty()) throw std::invalid_argument("simulate_session: empty ranking");
  for (int idx : order)
    if (idx < 0 || idx >= static_cast<int>(pool.items.size()))
      throw std::invalid_argument("simulate_session: ranking index out of range");

  Rng rng(seed);
  SessionOutcome out;
  for (int step = 0; step < horizon; ++step) {
    const int idx = order[static_cast<std::size_t>(step) % order.size()];
    const double watch = dist_sample(pool.items[static_cast<std::size_t>(idx)].dist, rng);
    out.steps.push_back({idx, watch});
    out.total_watch_s += watch;
    ++out.play_count;
    if (watch < user_model.threshold_s && rng.uniform() < user_model.p_churn) {
      out.churned = true;
      break;
    }
  }
  return out;
}

std::vector<StrategyRow> compare_strategies(
    const CandidatePool& pool, const std::vector<StrategyConfig>& strategies,
    const UserModelConfig& user_model, int horizon, int n_sessions,
    std::uint64_t base_seed, int n_quantiles) {
  if (strategies.empty())
    throw std::invalid_argument("compare_strategies: need at least one strategy");
  if (n_sessions < 1)
    throw std::invalid_argument("compare_strategies: n_sessions must be >= 1");

  std::vector<StrategyRow> rows;
  rows.reserve(strategies.size());
  for (const StrategyConfig& strat : strategies) {
    const std::vector<int> order = rank_oracle(pool, n_quantiles, strat);
    double watch_sum = 0.0, watch_sq = 0.0;
    double plays_sum = 0.0, plays_sq = 0.0;
    int churned = 0;
    for (int s = 0; s < n_sessions; ++s) {
      const SessionOutcome o = simulate_session(
          pool, order, user_model, horizon, base_seed + static_cast<std::uint64_t>(s));
      watch_sum += o.total_watch_s;
      watch_sq += o.total_watch_s * o.total_watch_s;
      plays_sum += o.play_count;
      plays_sq += static_cast<double>(o.play_count) * o.play_count;
      churned += o.churned ? 1 : 0;
    }
    const double n = static_cast<double>(n_sessions);
    auto standard_error = [n](double sum, double sq) {
      if (n < 2) return 0.0;
      const double mean = sum / n;
      const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
      return std::sqrt(var / n);
    };
    StrategyRow row;
    row.strategy = to_string(strat.kind);
    row.mean_watch_s = watch_sum / n;
    row.se_watch = standard_error(watch_sum, watch_sq);
    row.mean_plays = plays_sum / n;
    row.se_plays = standard_error(plays_sum, plays_sq);
    row.churn_rate = static_cast<double>(churned) / n;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cqe
