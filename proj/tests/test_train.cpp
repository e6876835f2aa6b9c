#include "cqe/train.hpp"

#include "cqe/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>

using namespace cqe;

namespace {

std::vector<InteractionRecord> records_from_rows(const std::vector<SyntheticRow>& rows,
                                                 int n_users) {
  std::vector<InteractionRecord> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    InteractionRecord r;
    r.user_id = "u" + std::to_string(i % static_cast<std::size_t>(n_users));
    r.item_id = "v" + std::to_string(i);
    r.numeric_feats.assign(rows[i].x.data(), rows[i].x.data() + rows[i].x.size());
    r.duration_s = rows[i].duration_s;
    r.watch_time_s = rows[i].watch_s;
    out.push_back(std::move(r));
  }
  return out;
}

// mu = 2.0 + 1.2*x0, sigma = 0.15 + 1.1*x1: spread varies independently of
// the location, so the strategies disagree.
SyntheticSpec hetero_spec() {
  SyntheticSpec spec;
  spec.family = Family::lognormal;
  spec.features.n = 2;
  spec.mu = {(Vec(2) << 1.2, 0.0).finished(), 2.0};
  spec.sigma = {(Vec(2) << 0.0, 1.1).finished(), 0.15};
  return spec;
}

TrainConfig small_config(int n_quantiles) {
  TrainConfig cfg;
  cfg.n_quantiles = n_quantiles;
  cfg.hidden = {16, 8};
  cfg.optimizer = OptAlgo::adam;
  cfg.lr = 5e-3;
  cfg.epochs = 8;
  cfg.batch_size = 64;
  cfg.n_dims = 32;
  return cfg;
}

}  // namespace

TEST_CASE("constant targets pull every quantile to the constant") {
  std::vector<InteractionRecord> data;
  Rng rng(1);
  for (int i = 0; i < 400; ++i) {
    InteractionRecord r;
    r.user_id = "u" + std::to_string(i % 10);
    r.item_id = "v" + std::to_string(i);
    r.numeric_feats = {rng.uniform(), rng.uniform()};
    r.duration_s = 30.0;
    r.watch_time_s = 12.5;
    data.push_back(std::move(r));
  }
  TrainConfig cfg = small_config(3);
  cfg.hidden = {8};
  cfg.n_dims = 8;
  cfg.epochs = 150;
  cfg.lr = 1e-2;
  const TrainResult result = train(data, cfg, 7);
  for (int i = 0; i < 10; ++i) {
    const QuantileEstimates est = predict_quantiles(result.model, data[static_cast<std::size_t>(i * 17)]);
    for (int q = 0; q < 3; ++q)
      CHECK(std::abs(est.values[q] - 12.5) / 12.5 < 0.01);
  }
}

TEST_CASE("training loss is non-increasing up to rare upticks") {
  const SyntheticSpec spec = hetero_spec();
  const auto data = records_from_rows(synth_generate(spec, 1500, 5), 30);
  TrainConfig cfg = small_config(5);
  cfg.optimizer = OptAlgo::sgd;
  cfg.lr = 2e-4;
  cfg.epochs = 30;
  const TrainResult result = train(data, cfg, 11);
  REQUIRE(result.epoch_loss.size() == 30);
  int upticks = 0;
  for (std::size_t e = 1; e < result.epoch_loss.size(); ++e)
    if (result.epoch_loss[e] > result.epoch_loss[e - 1]) ++upticks;
  CHECK(upticks <= static_cast<int>(0.05 * (result.epoch_loss.size() - 1)) + 1);
  CHECK(result.epoch_loss.back() < result.epoch_loss.front());
}

TEST_CASE("training is deterministic per seed") {
  const SyntheticSpec spec = hetero_spec();
  const auto data = records_from_rows(synth_generate(spec, 600, 9), 20);
  const TrainConfig cfg = small_config(4);
  const TrainResult a = train(data, cfg, 123);
  const TrainResult b = train(data, cfg, 123);
  REQUIRE(a.epoch_loss.size() == b.epoch_loss.size());
  for (std::size_t e = 0; e < a.epoch_loss.size(); ++e)
    CHECK(a.epoch_loss[e] == b.epoch_loss[e]);
  for (std::size_t l = 0; l < a.model.mlp.layers.size(); ++l) {
    CHECK(a.model.mlp.layers[l].w == b.model.mlp.layers[l].w);
    CHECK(a.model.mlp.layers[l].b == b.model.mlp.layers[l].b);
  }
  const TrainResult c = train(data, cfg, 124);
  CHECK(a.epoch_loss.back() != c.epoch_loss.back());
}

TEST_CASE("oracle quantiles rank almost perfectly against true means") {
  const SyntheticSpec spec = hetero_spec();
  const auto rows = synth_generate(spec, 800, 21);
  auto data = records_from_rows(rows, 40);
  // Targets are the true conditional means, scores the oracle CDE.
  const QuantileLevels levels = make_levels(100);
  std::vector<double> scores(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].watch_time_s = true_mean(spec, rows[i].x);
    Vec q(100);
    for (int j = 0; j < 100; ++j)
      q[j] = true_quantile(spec, rows[i].x, levels.levels[j]);
    scores[i] = cde(QuantileEstimates{q});
  }
  const MetricsReport report = evaluate_scores(scores, data, Task::watchtime);
  REQUIRE(report.xauc.has_value());
  CHECK(*report.xauc > 0.95);
}

TEST_CASE("cse and cde reports differ on heteroscedastic data") {
  const SyntheticSpec spec = hetero_spec();
  const auto data = records_from_rows(synth_generate(spec, 1200, 30), 30);
  const TrainResult result = train(data, small_config(9), 31);

  StrategyConfig cse_cfg{StrategyKind::cse, 0.25, 0.7, 0.5};
  StrategyConfig cde_cfg{StrategyKind::cde, 0.25, 0.7, 0.5};
  const MetricsReport a = evaluate(result.model, data, cse_cfg, Task::watchtime);
  const MetricsReport b = evaluate(result.model, data, cde_cfg, Task::watchtime);
  REQUIRE(a.mae.has_value());
  REQUIRE(b.mae.has_value());
  CHECK(*a.mae != *b.mae);
}

TEST_CASE("evaluate validates its inputs") {
  const SyntheticSpec spec = hetero_spec();
  const auto data = records_from_rows(synth_generate(spec, 300, 10), 10);
  const TrainResult result = train(data, small_config(3), 3);

  StrategyConfig cfg{StrategyKind::cde, 0.25, 0.7, 0.5};
  CHECK_THROWS_AS(evaluate(result.model, {}, cfg, Task::watchtime),
                  std::invalid_argument);

  auto wrong = data;
  for (auto& r : wrong) r.numeric_feats.push_back(1.0);
  CHECK_THROWS_AS(evaluate(result.model, wrong, cfg, Task::watchtime),
                  std::invalid_argument);

  CHECK_THROWS_AS(train({}, small_config(3), 1), std::invalid_argument);
}

TEST_CASE("interest task reports gauc and ndcg") {
  const SyntheticSpec spec = hetero_spec();
  const auto data = records_from_rows(synth_generate(spec, 900, 15), 15);
  const TrainResult result = train(data, small_config(5), 8);
  StrategyConfig cfg{StrategyKind::cde, 0.25, 0.7, 0.5};
  const MetricsReport report = evaluate(result.model, data, cfg, Task::interest);
  REQUIRE(report.gauc.has_value());
  CHECK(*report.gauc >= 0.0);
  CHECK(*report.gauc <= 1.0);
  CHECK(report.ndcg_at.count(1) == 1);
  CHECK(report.ndcg_at.count(3) == 1);
  CHECK(report.ndcg_at.count(5) == 1);
  CHECK(report.groups_evaluated + report.groups_skipped == 15);
}

TEST_CASE("non-finite loss aborts with a numeric failure naming the epoch") {
  // Targets near the double range force the summed loss to overflow.
  std::vector<InteractionRecord> data;
  for (int i = 0; i < 64; ++i) {
    InteractionRecord r;
    r.user_id = "u0";
    r.item_id = "v" + std::to_string(i);
    r.numeric_feats = {0.5, 0.5};
    r.duration_s = 30.0;
    r.watch_time_s = 1e308;
    data.push_back(std::move(r));
  }
  TrainConfig cfg = small_config(3);
  cfg.optimizer = OptAlgo::sgd;
  try {
    train(data, cfg, 2);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("model save/load reproduces identical predictions") {
  const SyntheticSpec spec = hetero_spec();
  const auto data = records_from_rows(synth_generate(spec, 500, 20), 20);
  const TrainResult result = train(data, small_config(7), 77);

  const std::string path = "cqe_model_roundtrip.txt";
  save_model(result.model, {{"note", "test"}}, path);
  const CqeModel back = load_model(path);

  CHECK(back.levels.n() == 7);
  CHECK(back.encoder.hash_seed == result.model.encoder.hash_seed);
  CHECK(back.encoder.num_columns == result.model.encoder.num_columns);
  for (int i = 0; i < 25; ++i) {
    const auto& rec = data[static_cast<std::size_t>(i * 7)];
    const QuantileEstimates a = predict_quantiles(result.model, rec);
    const QuantileEstimates b = predict_quantiles(back, rec);
    CHECK(a.values == b.values);
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), IoError);
}
