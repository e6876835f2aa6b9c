#pragma once
// Desk-scale comparison of the ranking strategies over candidate pools with
// known true watch-time distributions: ranking, session simulation with a
// churn rule, and Monte-Carlo strategy comparison.

#include "cqe/inference.hpp"
#include "cqe/synthetic.hpp"
#include "cqe/train.hpp"

#include <string>
#include <vector>

namespace cqe {

struct Candidate {
  Vec features;        // may be empty when only oracle ranking is used
  Distribution dist;   // ground-truth watch-time distribution
};

struct CandidatePool {
  std::vector<Candidate> items;
};

// Samples n candidates' features from the spec and attaches their implied
// true distributions.
CandidatePool pool_from_spec(const SyntheticSpec& spec, int n,
                             std::uint64_t seed);

// Indices sorted by score descending; ties keep the lower candidate index
// first (stable).
std::vector<int> rank_by_scores(const std::vector<double>& scores);

// Model-based ranking: candidates are scored through the trained model on
// their raw feature vectors (empty user/item ids).
std::vector<int> rank(const CqeModel& model, const CandidatePool& pool,
                      const StrategyConfig& strategy);

// Oracle ranking: candidates are scored on their true quantiles at the given
// grid size.
std::vector<int> rank_oracle(const CandidatePool& pool, int n_quantiles,
                             const StrategyConfig& strategy);

// Oracle quantile estimates of one candidate on the grid.
QuantileEstimates oracle_estimates(const Candidate& candidate,
                                   const QuantileLevels& levels);

struct UserModelConfig {
  double p_churn = 0.5;     // churn probability after a watch below threshold
  double threshold_s = 5.0;
};

void validate(const UserModelConfig& cfg);

struct SessionStep {
  int candidate = 0;
  double watch_s = 0.0;
};

struct SessionOutcome {
  double total_watch_s = 0.0;
  int play_count = 0;
  bool churned = false;
  std::vector<SessionStep> steps;
};

// Serves candidates in ranked order (cycling past the pool size), draws the
// realized watch time from the served item's true distribution, and applies
// the churn rule after each play. Stops at churn or horizon. Deterministic
// per seed.
SessionOutcome simulate_session(const CandidatePool& pool,
                                const std::vector<int>& order,
                                const UserModelConfig& user_model, int horizon,
                                std::uint64_t seed);

struct StrategyRow {
  std::string strategy;
  double mean_watch_s = 0.0;
  double se_watch = 0.0;
  double mean_plays = 0.0;
  double se_plays = 0.0;
  double churn_rate = 0.0;
};

// One row per strategy; session s of every strategy uses seed base_seed + s,
// so identical strategies produce identical rows.
std::vector<StrategyRow> compare_strategies(
    const CandidatePool& pool, const std::vector<StrategyConfig>& strategies,
    const UserModelConfig& user_model, int horizon, int n_sessions,
    std::uint64_t base_seed, int n_quantiles);

// Candidate pool file: explicit list of candidates with their true
// distribution parameters, plus the user model. See README for the schema.
struct PoolFile {
  CandidatePool pool;
  UserModelConfig user_model;
  int horizon = 20;
  int n_quantiles = 100;
};

PoolFile parse_pool_json(const std::string& text);
PoolFile load_pool_json(const std::string& path);

}  // namespace cqe
