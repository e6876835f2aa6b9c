#pragma once
// Model assembly (encoder + MLP + monotone head), the mini-batch training
// loop, evaluation against both tasks, and plain-text model serialization.

#include "cqe/data.hpp"
#include "cqe/head.hpp"
#include "cqe/inference.hpp"
#include "cqe/metrics.hpp"
#include "cqe/nn.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace cqe {

struct TrainConfig {
  int n_quantiles = 100;
  std::vector<int> hidden = {64, 32};
  OptAlgo optimizer = OptAlgo::adam;
  double lr = 1e-3;
  int epochs = 20;
  int batch_size = 256;
  int n_dims = 2048;  // encoder output width
};

void validate(const TrainConfig& cfg);

struct CqeModel {
  FeatureEncoder encoder;
  QuantileLevels levels;
  Mlp mlp;
};

struct TrainResult {
  CqeModel model;
  std::vector<double> epoch_loss;  // mean per-sample training loss per epoch
};

// Shuffled mini-batch training with mean-reduced quantile-regression loss.
// Deterministic for a fixed (data, config, seed); a non-finite loss aborts
// with NumericError reporting the last completed epoch.
TrainResult train(const std::vector<InteractionRecord>& data,
                  const TrainConfig& cfg, std::uint64_t seed);

QuantileEstimates predict_quantiles(const CqeModel& model,
                                    const InteractionRecord& record);

// Strategy scores for every record (row-batched internally).
std::vector<double> strategy_scores(const CqeModel& model,
                                    const std::vector<InteractionRecord>& data,
                                    const StrategyConfig& strategy);

enum class Task { watchtime, interest };

Task parse_task(const std::string& name);
std::string to_string(Task task);

// watchtime: MAE + XAUC of strategy scores against realized watch time.
// interest: GAUC + nDCG@{1,3,5} of strategy scores against the 18s label.
// Undefined-metric conditions are recorded in report.notes; the remaining
// metrics are still computed.
MetricsReport evaluate(const CqeModel& model,
                       const std::vector<InteractionRecord>& data,
                       const StrategyConfig& strategy, Task task,
                       std::size_t xauc_max_pairs = 5'000'000,
                       std::uint64_t metric_seed = 0);

// Same contract, but with precomputed scores (used to evaluate oracle
// predictors through the identical metric path).
MetricsReport evaluate_scores(const std::vector<double>& scores,
                              const std::vector<InteractionRecord>& data,
                              Task task, std::size_t xauc_max_pairs = 5'000'000,
                              std::uint64_t metric_seed = 0);

struct PipelineCheck {
  double max_rel_error = 0.0;
  std::size_t param_count = 0;
  std::uint64_t data_seed_used = 0;
};

// End-to-end gradient check of encoder -> MLP -> head -> quantile loss on a
// deterministic random dataset: analytic backprop against central finite
// differences. Data seeds whose activations or residuals sit within 1e-3 of a
// ReLU/pinball kink are re-drawn (bounded attempts) so the comparison is well
// posed.
PipelineCheck pipeline_grad_check(const std::vector<int>& hidden,
                                  int n_quantiles, int n_samples, int n_dims,
                                  std::uint64_t seed, double eps);

// Versioned plain-text serialization; floats are written round-trip exact, so
// a reloaded model reproduces identical predictions. The provenance pairs are
// echoed into the file header.
void save_model(const CqeModel& model,
                const std::vector<std::pair<std::string, std::string>>& provenance,
                const std::string& path);
CqeModel load_model(const std::string& path);

}  // namespace cqe
