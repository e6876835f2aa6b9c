#pragma once
// Evaluation metrics: MAE and XAUC for regression-as-ranking, AUC/GAUC and
// nDCG@k for binary interest prediction.

#include "cqe/common.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cqe {

struct EvalPair {
  double prediction = 0.0;
  double target = 0.0;  // watch time, or a 0/1 interest label
  std::string user_id;
};

double mae(const std::vector<EvalPair>& pairs);

// Fraction of pairs (i,j) with y_i != y_j whose prediction ordering matches
// the target ordering; prediction ties count 0.5. Equal-target pairs are
// excluded. Exhaustive when the number of eligible pairs is <= max_pairs,
// otherwise max_pairs pairs are sampled (with replacement) using the seed.
double xauc(const std::vector<EvalPair>& pairs,
            std::size_t max_pairs = 5'000'000, std::uint64_t seed = 0);

// Mann-Whitney AUC with tied scores counted 0.5. Both classes must be
// present, else UndefinedMetric.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct GaucResult {
  double value = 0.0;
  std::size_t users_evaluated = 0;
  std::size_t users_skipped = 0;  // single-class users
};

// Impression-weighted average of per-user AUC. Pair targets are 0/1 labels;
// users whose labels are single-class are skipped and counted.
GaucResult gauc(const std::vector<EvalPair>& pairs);

// Mean over users of DCG@k / ideal DCG@k with binary relevances already in
// ranked order. Users with no positive item are skipped; if none remain,
// UndefinedMetric.
double ndcg_at_k(const std::vector<std::vector<int>>& ranked_relevances, int k);

struct MetricsReport {
  std::optional<double> mae;
  std::optional<double> xauc;
  std::optional<double> gauc;
  std::map<int, double> ndcg_at;
  std::size_t groups_evaluated = 0;
  std::size_t groups_skipped = 0;
  // Per-metric failure messages (e.g. undefined-metric conditions); the
  // remaining metrics are still reported.
  std::map<std::string, std::string> notes;
};

}  // namespace cqe
