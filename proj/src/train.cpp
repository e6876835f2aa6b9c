#include "cqe/train.hpp"

#include "cqe/loss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace cqe {

void validate(const TrainConfig& cfg) {
  if (cfg.n_quantiles < 1)
    throw std::invalid_argument("config: n_quantiles must be >= 1");
  for (int h : cfg.hidden)
    if (h < 1) throw std::invalid_argument("config: hidden sizes must be >= 1");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("config: lr must be > 0");
  if (cfg.epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (cfg.batch_size < 1)
    throw std::invalid_argument("config: batch_size must be >= 1");
  if (cfg.n_dims < 2) throw std::invalid_argument("config: n_dims must be >= 2");
}

TrainResult train(const std::vector<InteractionRecord>& data,
                  const TrainConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  if (data.empty()) throw std::invalid_argument("train: empty dataset");

  std::vector<std::string> num_columns(data.front().numeric_feats.size());
  for (std::size_t j = 0; j < num_columns.size(); ++j)
    num_columns[j] = "num_" + std::to_string(j);

  TrainResult result;
  CqeModel& model = result.model;
  model.encoder = fit_encoder(data, cfg.n_dims, seed, num_columns);
  model.levels = make_levels(cfg.n_quantiles);

  std::vector<int> sizes;
  sizes.push_back(model.encoder.n_dims());
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(cfg.n_quantiles);
  model.mlp = init_mlp(sizes, seed);
  // Small positive bias on the increment outputs so the ReLU head does not
  // start in an all-dead state.
  model.mlp.layers.back().b.setConstant(0.1);

  OptState opt = make_opt_state(cfg.optimizer, model.mlp);
  Rng shuffle_rng(seed ^ 0xD1B54A32D192ED03ULL);

  const std::size_t n = data.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(idx, shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const double b = static_cast<double>(stop - start);

      const Mat x = encode_batch(data, idx, start, stop, model.encoder);
      Vec y(stop - start);
      for (std::size_t i = start; i < stop; ++i)
        y[static_cast<Eigen::Index>(i - start)] = data[idx[i]].watch_time_s;

      ForwardCache cache;
      const Mat d_raw = forward(model.mlp, x, &cache);
      const Mat t = head_forward_batch(d_raw);
      Mat grad_t;
      const double batch_loss = qr_loss_batch(y, t, model.levels, grad_t);
      if (!std::isfinite(batch_loss))
        throw NumericError("train: non-finite loss in epoch " +
                           std::to_string(epoch + 1) + "; last completed epoch " +
                           std::to_string(epoch) +
                           (result.epoch_loss.empty()
                                ? std::string()
                                : " (loss " + fmt_g17(result.epoch_loss.back()) + ")"));
      epoch_loss += batch_loss;

      // Mean reduction over the batch.
      const Mat grad_d = head_backward_batch(d_raw, grad_t) / b;
      const Mlp grads = backward(model.mlp, cache, grad_d);
      step(model.mlp, grads, opt, cfg.lr);
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

QuantileEstimates predict_quantiles(const CqeModel& model,
                                    const InteractionRecord& record) {
  const Vec x = encode(record, model.encoder);
  return head_forward(forward_one(model.mlp, x));
}

std::vector<double> strategy_scores(const CqeModel& model,
                                    const std::vector<InteractionRecord>& data,
                                    const StrategyConfig& strategy) {
  validate(strategy);
  const std::size_t n = data.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<double> scores(n);
  constexpr std::size_t chunk = 1024;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t stop = std::min(n, start + chunk);
    const Mat x = encode_batch(data, idx, start, stop, model.encoder);
    const Mat t = head_forward_batch(forward(model.mlp, x));
    for (std::size_t i = start; i < stop; ++i) {
      QuantileEstimates est{t.row(static_cast<Eigen::Index>(i - start)).transpose()};
      scores[i] = apply_strategy(est, model.levels, strategy);
    }
  }
  return scores;
}

Task parse_task(const std::string& name) {
  if (name == "watchtime") return Task::watchtime;
  if (name == "interest") return Task::interest;
  throw std::invalid_argument("unknown task '" + name +
                              "' (expected watchtime or interest)");
}

std::string to_string(Task task) {
  return task == Task::watchtime ? "watchtime" : "interest";
}

MetricsReport evaluate_scores(const std::vector<double>& scores,
                              const std::vector<InteractionRecord>& data,
                              Task task, std::size_t xauc_max_pairs,
                              std::uint64_t metric_seed) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  if (scores.size() != data.size())
    throw std::invalid_argument("evaluate: score/record count mismatch");

  MetricsReport report;
  if (task == Task::watchtime) {
    std::vector<EvalPair> pairs(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      pairs[i] = {scores[i], data[i].watch_time_s, data[i].user_id};
    report.mae = mae(pairs);
    try {
      report.xauc = xauc(pairs, xauc_max_pairs, metric_seed);
    } catch (const UndefinedMetric& e) {
      report.notes["xauc"] = e.what();
    }
    return report;
  }

  std::vector<EvalPair> pairs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double label = interest_label(data[i].duration_s, data[i].watch_time_s);
    pairs[i] = {scores[i], label, data[i].user_id};
  }
  try {
    const GaucResult g = gauc(pairs);
    report.gauc = g.value;
    report.groups_evaluated = g.users_evaluated;
    report.groups_skipped = g.users_skipped;
  } catch (const UndefinedMetric& e) {
    report.notes["gauc"] = e.what();
  }

  // Per-user ranked relevance lists: order by score descending, ties by
  // original record order.
  std::map<std::string, std::vector<std::size_t>> by_user;
  for (std::size_t i = 0; i < data.size(); ++i) by_user[data[i].user_id].push_back(i);
  std::vector<std::vector<int>> ranked;
  ranked.reserve(by_user.size());
  for (auto& [user, rows] : by_user) {
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] > scores[b];
    });
    std::vector<int> rels(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      rels[r] = static_cast<int>(pairs[rows[r]].target);
    ranked.push_back(std::move(rels));
  }
  for (int k : {1, 3, 5}) {
    try {
      report.ndcg_at[k] = ndcg_at_k(ranked, k);
    } catch (const UndefinedMetric& e) {
      report.notes["ndcg@" + std::to_string(k)] = e.what();
    }
  }
  return report;
}

MetricsReport evaluate(const CqeModel& model,
                       const std::vector<InteractionRecord>& data,
                       const StrategyConfig& strategy, Task task,
                       std::size_t xauc_max_pairs, std::uint64_t metric_seed) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  if (data.front().numeric_feats.size() != model.encoder.num_columns.size())
    throw std::invalid_argument("evaluate: model/dataset feature dims mismatch");
  const std::vector<double> scores = strategy_scores(model, data, strategy);
  return evaluate_scores(scores, data, task, xauc_max_pairs, metric_seed);
}

PipelineCheck pipeline_grad_check(const std::vector<int>& hidden,
                                  int n_quantiles, int n_samples, int n_dims,
                                  std::uint64_t seed, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("pipeline_grad_check: eps must be > 0");
  if (n_samples < 1 || n_quantiles < 1)
    throw std::invalid_argument("pipeline_grad_check: bad sample/quantile count");

  const QuantileLevels levels = make_levels(n_quantiles);
  constexpr double kink_margin = 1e-3;

  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    const std::uint64_t data_seed = seed + attempt;
    Rng rng(data_seed);
    std::vector<InteractionRecord> records(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
      InteractionRecord& r = records[static_cast<std::size_t>(i)];
      r.user_id = "u" + std::to_string(rng.below(16));
      r.item_id = "v" + std::to_string(i);
      r.numeric_feats = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      r.duration_s = 30.0;
      r.watch_time_s = std::exp(rng.uniform(0.0, 3.0));
    }
    FeatureEncoder enc = fit_encoder(records, n_dims, data_seed, {"num_0", "num_1"});
    std::vector<int> sizes{enc.n_dims()};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(n_quantiles);
    const Mlp mlp = init_mlp(sizes, seed);

    // The loss surface is piecewise smooth; insist every sample sits clear of
    // the ReLU and pinball kinks before differentiating.
    std::vector<std::size_t> idx(records.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const Mat x = encode_batch(records, idx, 0, records.size(), enc);
    ForwardCache cache;
    const Mat d_raw = forward(mlp, x, &cache);
    const Mat t = head_forward_batch(d_raw);
    bool clear = d_raw.array().abs().minCoeff() > kink_margin;
    for (const Mat& pre : cache.pre)
      clear = clear && pre.array().abs().minCoeff() > kink_margin;
    for (Eigen::Index i = 0; clear && i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j)
        if (std::abs(records[static_cast<std::size_t>(i)].watch_time_s - t(i, j)) <=
            kink_margin) {
          clear = false;
          break;
        }
    if (!clear) continue;

    const double inv_n = 1.0 / static_cast<double>(n_samples);
    Vec y(records.size());
    for (std::size_t s = 0; s < records.size(); ++s)
      y[static_cast<Eigen::Index>(s)] = records[s].watch_time_s;
    auto loss_fn = [&](const Mlp& p) {
      const Mat tt = head_forward_batch(forward(p, x));
      Mat unused;
      return qr_loss_batch(y, tt, levels, unused) * inv_n;
    };

    Mat grad_t;
    qr_loss_batch(y, t, levels, grad_t);
    const Mat grad_d = head_backward_batch(d_raw, grad_t) * inv_n;
    const Mlp analytic = backward(mlp, cache, grad_d);

    PipelineCheck out;
    out.max_rel_error = grad_check(mlp, loss_fn, analytic, eps);
    out.param_count = mlp.param_count();
    out.data_seed_used = data_seed;
    return out;
  }
  throw NumericError("pipeline_grad_check: no kink-free sample found");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
constexpr const char* kMagic = "cqe-model v1";
}

void save_model(const CqeModel& model,
                const std::vector<std::pair<std::string, std::string>>& provenance,
                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  out << kMagic << "\n";
  for (const auto& [key, value] : provenance) out << "# " << key << " = " << value << "\n";

  const FeatureEncoder& enc = model.encoder;
  out << "encoder " << enc.hash_dims << " " << enc.hash_seed << " "
      << enc.num_columns.size() << "\n";
  for (std::size_t j = 0; j < enc.num_columns.size(); ++j)
    out << "num_col " << enc.num_columns[j] << " " << fmt_g17(enc.num_mean[j]) << " "
        << fmt_g17(enc.num_std[j]) << "\n";

  out << "levels " << model.levels.n() << "\n";

  const std::vector<int> sizes = model.mlp.layer_sizes();
  out << "layers " << sizes.size();
  for (int s : sizes) out << " " << s;
  out << "\n";
  for (std::size_t l = 0; l < model.mlp.layers.size(); ++l) {
    const Layer& layer = model.mlp.layers[l];
    out << "layer " << l << " " << layer.w.rows() << " " << layer.w.cols() << "\n";
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
        if (c) out << " ";
        out << fmt_g17(layer.w(r, c));
      }
      out << "\n";
    }
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) {
      if (i) out << " ";
      out << fmt_g17(layer.b[i]);
    }
    out << "\n";
  }
  out << "end\n";
  if (!out) throw IoError("failed writing model file '" + path + "'");
}

namespace {

std::string next_content_line(std::istream& in, const std::string& path) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return line;
  }
  throw DataError("model file '" + path + "': truncated");
}

}  // namespace

CqeModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("model file '" + path + "': empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMagic)
    throw DataError("model file '" + path + "': bad magic '" + line + "'");

  CqeModel model;
  {
    std::istringstream ss(next_content_line(in, path));
    std::string tag;
    std::size_t n_num = 0;
    ss >> tag >> model.encoder.hash_dims >> model.encoder.hash_seed >> n_num;
    if (tag != "encoder" || !ss)
      throw DataError("model file '" + path + "': bad encoder line");
    model.encoder.num_mean.resize(static_cast<Eigen::Index>(n_num));
    model.encoder.num_std.resize(static_cast<Eigen::Index>(n_num));
    for (std::size_t j = 0; j < n_num; ++j) {
      std::istringstream ls(next_content_line(in, path));
      std::string col;
      double mean, sd;
      ls >> tag >> col >> mean >> sd;
      if (tag != "num_col" || !ls)
        throw DataError("model file '" + path + "': bad num_col line");
      model.encoder.num_columns.push_back(col);
      model.encoder.num_mean[static_cast<Eigen::Index>(j)] = mean;
      model.encoder.num_std[static_cast<Eigen::Index>(j)] = sd;
    }
    model.encoder.fitted = true;
  }
  {
    std::istringstream ss(next_content_line(in, path));
    std::string tag;
    int n = 0;
    ss >> tag >> n;
    if (tag != "levels" || !ss || n < 1)
      throw DataError("model file '" + path + "': bad levels line");
    model.levels = make_levels(n);
  }
  std::vector<int> sizes;
  {
    std::istringstream ss(next_content_line(in, path));
    std::string tag;
    std::size_t count = 0;
    ss >> tag >> count;
    if (tag != "layers" || !ss || count < 2)
      throw DataError("model file '" + path + "': bad layers line");
    sizes.resize(count);
    for (std::size_t i = 0; i < count; ++i) ss >> sizes[i];
    if (!ss) throw DataError("model file '" + path + "': bad layers line");
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    std::istringstream ss(next_content_line(in, path));
    std::string tag;
    std::size_t index = 0;
    Eigen::Index rows = 0, cols = 0;
    ss >> tag >> index >> rows >> cols;
    if (tag != "layer" || !ss || index != l || rows != sizes[l + 1] || cols != sizes[l])
      throw DataError("model file '" + path + "': bad layer header for layer " +
                      std::to_string(l));
    Layer layer;
    layer.w.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::istringstream rs(next_content_line(in, path));
      for (Eigen::Index c = 0; c < cols; ++c) rs >> layer.w(r, c);
      if (!rs)
        throw DataError("model file '" + path + "': bad weight row in layer " +
                        std::to_string(l));
    }
    layer.b.resize(rows);
    std::istringstream bs(next_content_line(in, path));
    for (Eigen::Index i = 0; i < rows; ++i) bs >> layer.b[i];
    if (!bs)
      throw DataError("model file '" + path + "': bad bias row in layer " +
                      std::to_string(l));
    model.mlp.layers.push_back(std::move(layer));
  }
  if (next_content_line(in, path) != "end")
    throw DataError("model file '" + path + "': missing end marker");
  return model;
}

}  // namespace cqe
