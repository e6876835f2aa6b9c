#include "cqe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cqe {

double mae(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("mae: empty input");
  double sum = 0.0;
  for (const EvalPair& p : pairs) sum += std::abs(p.prediction - p.target);
  return sum / static_cast<double>(pairs.size());
}

double xauc(const std::vector<EvalPair>& pairs, std::size_t max_pairs,
            std::uint64_t seed) {
  const std::size_t n = pairs.size();
  if (n < 2) throw std::invalid_argument("xauc: need at least 2 pairs");

  // Count eligible (distinct-target) pairs via target multiplicities.
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = pairs[i].target;
  std::sort(targets.begin(), targets.end());
  std::uint64_t same = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && targets[j] == targets[i]) ++j;
    const std::uint64_t c = j - i;
    same += c * (c - 1) / 2;
    i = j;
  }
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2 - same;
  if (total == 0) throw UndefinedMetric("xauc: all targets identical");

  // score2 accumulates 2 per concordant pair and 1 per prediction tie, so the
  // result is an exact rational num/(2*denominator).
  auto score2 = [&](std::size_t i, std::size_t j) -> std::uint64_t {
    if (pairs[i].prediction == pairs[j].prediction) return 1;
    const bool pred_up = pairs[i].prediction < pairs[j].prediction;
    const bool target_up = pairs[i].target < pairs[j].target;
    return pred_up == target_up ? 2 : 0;
  };

  if (total <= max_pairs) {
    std::uint64_t num2 = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (pairs[i].target != pairs[j].target) num2 += score2(i, j);
    return static_cast<double>(num2) / (2.0 * static_cast<double>(total));
  }

  Rng rng(seed);
  std::uint64_t num2 = 0;
  for (std::size_t k = 0; k < max_pairs; ++k) {
    std::size_t i, j;
    do {
      i = static_cast<std::size_t>(rng.below(n));
      j = static_cast<std::size_t>(rng.below(n));
    } while (i == j || pairs[i].target == pairs[j].target);
    num2 += score2(i, j);
  }
  return static_cast<double>(num2) / (2.0 * static_cast<double>(max_pairs));
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc: scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int l : labels) n_pos += l != 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw UndefinedMetric("auc: both classes must be present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of average ranks (1-based) over positives; ranks are half-integers so
  // the arithmetic below is exact.
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // (i+1 + j)/2
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] != 0) pos_rank_sum += avg_rank;
    i = j;
  }
  const double u = pos_rank_sum -
                   0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

GaucResult gauc(const std::vector<EvalPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("gauc: empty input");
  std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> by_user;
  for (const EvalPair& p : pairs) {
    auto& [scores, labels] = by_user[p.user_id];
    scores.push_back(p.prediction);
    labels.push_back(p.target != 0.0 ? 1 : 0);
  }
  GaucResult out;
  double weighted = 0.0;
  double weight_sum = 0.0;
  double last_auc = 0.0;
  for (const auto& [user, data] : by_user) {
    const auto& [scores, labels] = data;
    const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
    if (!has_pos || !has_neg) {
      ++out.users_skipped;
      continue;
    }
    const double w = static_cast<double>(scores.size());
    last_auc = auc(scores, labels);
    weighted += w * last_auc;
    weight_sum += w;
    ++out.users_evaluated;
  }
  if (out.users_evaluated == 0)
    throw UndefinedMetric("gauc: no user with both classes");
  // With a single evaluable user the weighted mean is that user's AUC; return
  // it directly so the identity holds exactly.
  out.value = out.users_evaluated == 1 ? last_auc : weighted / weight_sum;
  return out;
}

double ndcg_at_k(const std::vector<std::vector<int>>& ranked_relevances, int k) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  if (ranked_relevances.empty())
    throw std::invalid_argument("ndcg_at_k: empty input");
  double sum = 0.0;
  std::size_t evaluated = 0;
  for (const std::vector<int>& rels : ranked_relevances) {
    const int n_pos = static_cast<int>(std::count_if(
        rels.begin(), rels.end(), [](int r) { return r != 0; }));
    if (n_pos == 0) continue;  // no positive item: skip this user
    const int depth = std::min<int>(k, static_cast<int>(rels.size()));
    double dcg = 0.0;
    for (int i = 0; i < depth; ++i)
      if (rels[i] != 0) dcg += 1.0 / std::log2(static_cast<double>(i + 2));
    double idcg = 0.0;
    for (int i = 0; i < std::min(k, n_pos); ++i)
      idcg += 1.0 / std::log2(static_cast<double>(i + 2));
    sum += dcg / idcg;
    ++evaluated;
  }
  if (evaluated == 0)
    throw UndefinedMetric("ndcg_at_k: no user with a positive item");
  return sum / static_cast<double>(evaluated);
}

}  // namespace cqe
