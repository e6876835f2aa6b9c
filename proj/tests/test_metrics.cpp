#include "cqe/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace cqe;

namespace {

std::vector<EvalPair> pairs_of(std::initializer_list<double> preds,
                               std::initializer_list<double> targets) {
  std::vector<EvalPair> out;
  auto p = preds.begin();
  auto t = targets.begin();
  for (; p != preds.end(); ++p, ++t) out.push_back({*p, *t, "u"});
  return out;
}

// O(n^2) brute-force XAUC over all distinct-target pairs.
double brute_xauc(const std::vector<EvalPair>& pairs) {
  double num = 0.0;
  std::uint64_t den = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      if (pairs[i].target == pairs[j].target) continue;
      ++den;
      if (pairs[i].prediction == pairs[j].prediction)
        num += 0.5;
      else if ((pairs[i].prediction < pairs[j].prediction) ==
               (pairs[i].target < pairs[j].target))
        num += 1.0;
    }
  return num / static_cast<double>(den);
}

// O(n^2) brute-force AUC with ties at 0.5.
double brute_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double num = 0.0;
  std::uint64_t den = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[i] != 1 || labels[j] != 0) continue;
      ++den;
      if (scores[i] > scores[j])
        num += 1.0;
      else if (scores[i] == scores[j])
        num += 0.5;
    }
  return num / static_cast<double>(den);
}

}  // namespace

TEST_CASE("mae") {
  CHECK(mae(pairs_of({1, 2, 3}, {1, 2, 3})) == 0.0);
  CHECK(mae(pairs_of({1, 2}, {2, 4})) == doctest::Approx(1.5));
  CHECK_THROWS_AS(mae({}), std::invalid_argument);

  Rng rng(1);
  std::vector<EvalPair> pairs;
  double sum = 0.0;
  for (int i = 0; i < 57; ++i) {
    const double p = rng.normal() * 3.0, t = rng.normal() * 3.0;
    pairs.push_back({p, t, ""});
    sum += std::abs(p - t);
  }
  CHECK(mae(pairs) == doctest::Approx(sum / 57.0).epsilon(1e-14));
}

TEST_CASE("xauc examples") {
  CHECK(xauc(pairs_of({1, 2, 3}, {1, 3, 2})) == doctest::Approx(2.0 / 3.0));
  CHECK(xauc(pairs_of({1, 2, 3, 4}, {10, 20, 30, 40})) == 1.0);
  CHECK(xauc(pairs_of({5, 5, 5}, {1, 2, 3})) == 0.5);
  CHECK_THROWS_AS(xauc(pairs_of({1, 2, 3}, {4, 4, 4})), UndefinedMetric);
  CHECK_THROWS_AS(xauc(pairs_of({1}, {1})), std::invalid_argument);
}

TEST_CASE("xauc equals brute force exactly in exhaustive mode") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<EvalPair> pairs;
    for (int i = 0; i < 60; ++i) {
      // Coarse values make target and prediction ties common.
      const double pred = std::floor(rng.uniform(0.0, 12.0));
      const double target = std::floor(rng.uniform(0.0, 8.0));
      pairs.push_back({pred, target, ""});
    }
    CHECK(xauc(pairs) == brute_xauc(pairs));
  }
}

TEST_CASE("xauc invariances") {
  Rng rng(18);
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 80; ++i)
    pairs.push_back({rng.normal(), rng.uniform(0.0, 5.0), ""});

  const double base = xauc(pairs);
  std::vector<EvalPair> warped = pairs;
  for (EvalPair& p : warped) p.prediction = std::exp(2.0 * p.prediction + 1.0);
  CHECK(xauc(warped) == base);  // strictly increasing transform

  std::vector<EvalPair> flipped = pairs;
  for (EvalPair& p : flipped) p.prediction = -p.prediction;
  CHECK(xauc(flipped) == doctest::Approx(1.0 - base).epsilon(1e-14));
}

TEST_CASE("xauc sampled mode approximates the exhaustive value") {
  Rng rng(19);
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 300; ++i)
    pairs.push_back({rng.normal() + 0.02 * i, rng.uniform(0.0, 10.0) + 0.01 * i, ""});
  const double full = xauc(pairs);
  const double sampled = xauc(pairs, 8000, 5);
  CHECK(std::abs(sampled - full) < 0.03);
  // Same seed, same subsample.
  CHECK(xauc(pairs, 8000, 5) == sampled);
  CHECK(xauc(pairs, 8000, 6) != sampled);
}

TEST_CASE("auc examples and brute-force agreement") {
  CHECK(auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
  CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
  CHECK_THROWS_AS(auc({0.5, 0.6}, {1, 1}), UndefinedMetric);
  CHECK_THROWS_AS(auc({0.5}, {1, 0}), std::invalid_argument);

  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(40));
    std::vector<double> scores(static_cast<std::size_t>(n));
    std::vector<int> labels(static_cast<std::size_t>(n));
    bool pos = false, neg = false;
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] = std::floor(rng.uniform(0.0, 10.0)) / 2.0;
      const int l = rng.uniform() < 0.4 ? 1 : 0;
      labels[static_cast<std::size_t>(i)] = l;
      (l ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    CHECK(auc(scores, labels) == brute_auc(scores, labels));
  }
}

TEST_CASE("gauc weighting, skipping and bounds") {
  // User a: 2 impressions, AUC 1.0. User b: 6 impressions, AUC 0.5.
  std::vector<EvalPair> pairs = {
      {0.1, 0, "a"}, {0.9, 1, "a"},
      {0.5, 0, "b"}, {0.5, 1, "b"}, {0.5, 0, "b"},
      {0.5, 1, "b"}, {0.5, 0, "b"}, {0.5, 1, "b"},
  };
  const GaucResult r = gauc(pairs);
  CHECK(r.value == doctest::Approx(0.625));
  CHECK(r.users_evaluated == 2);
  CHECK(r.users_skipped == 0);

  // A single-class user is skipped and does not move the value.
  std::vector<EvalPair> with_skip = pairs;
  with_skip.push_back({0.7, 1, "c"});
  with_skip.push_back({0.2, 1, "c"});
  const GaucResult r2 = gauc(with_skip);
  CHECK(r2.value == r.value);
  CHECK(r2.users_skipped == 1);

  // Single user: gauc equals that user's auc.
  std::vector<EvalPair> solo = {{0.3, 0, "x"}, {0.6, 1, "x"}, {0.5, 0, "x"}};
  CHECK(gauc(solo).value == auc({0.3, 0.6, 0.5}, {0, 1, 0}));

  std::vector<EvalPair> hopeless = {{0.3, 1, "x"}, {0.6, 1, "x"}};
  CHECK_THROWS_AS(gauc(hopeless), UndefinedMetric);
}

TEST_CASE("gauc lies between the per-user extremes") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<EvalPair> pairs;
    std::vector<double> per_user;
    for (int u = 0; u < 5; ++u) {
      std::vector<double> scores;
      std::vector<int> labels;
      const int m = 4 + static_cast<int>(rng.below(10));
      for (int i = 0; i < m; ++i) {
        scores.push_back(rng.normal());
        labels.push_back(i % 2);  // both classes guaranteed
      }
      for (int i = 0; i < m; ++i)
        pairs.push_back({scores[static_cast<std::size_t>(i)],
                         static_cast<double>(labels[static_cast<std::size_t>(i)]),
                         "u" + std::to_string(u)});
      per_user.push_back(auc(scores, labels));
    }
    const double g = gauc(pairs).value;
    CHECK(g >= *std::min_element(per_user.begin(), per_user.end()) - 1e-12);
    CHECK(g <= *std::max_element(per_user.begin(), per_user.end()) + 1e-12);
  }
}

TEST_CASE("ndcg at k") {
  CHECK(ndcg_at_k({{1, 1, 1, 0}}, 3) == doctest::Approx(1.0));
  // Single relevant item at rank 2 of 2: (1/log2(3)) / 1.
  CHECK(ndcg_at_k({{0, 1}}, 2) == doctest::Approx(1.0 / std::log2(3.0)));
  CHECK(ndcg_at_k({{0, 1}}, 2) == doctest::Approx(0.6309).epsilon(1e-4));
  CHECK(ndcg_at_k({{1, 0, 0}}, 1) == doctest::Approx(1.0));

  // Users without positives are skipped.
  CHECK(ndcg_at_k({{0, 1}, {0, 0, 0}}, 2) == doctest::Approx(1.0 / std::log2(3.0)));
  CHECK_THROWS_AS(ndcg_at_k({{0, 0}}, 2), UndefinedMetric);
  CHECK_THROWS_AS(ndcg_at_k({{1, 0}}, 0), std::invalid_argument);
  CHECK_THROWS_AS(ndcg_at_k({}, 1), std::invalid_argument);

  // Averaged over evaluable users.
  const double a = 1.0;                      // {1,0}: dcg 1, idcg 1
  const double b = 1.0 / std::log2(3.0);     // {0,1}
  CHECK(ndcg_at_k({{1, 0}, {0, 1}}, 2) == doctest::Approx(0.5 * (a + b)));
}
