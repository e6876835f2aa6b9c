#include "cqe/cli.hpp"

#include "cqe/config.hpp"
#include "cqe/data.hpp"
#include "cqe/harness.hpp"
#include "cqe/synthetic.hpp"
#include "cqe/train.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace cqe {

namespace {

using Echo = std::vector<std::pair<std::string, std::string>>;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write output file '" + path + "'");
  return out;
}

void write_echo(std::ostream& out, const Echo& echo) {
  for (const auto& [key, value] : echo) out << "# " << key << " = " << value << "\n";
}

std::vector<InteractionRecord> load_records(const std::string& path,
                                            LoadReport* report_out = nullptr) {
  LoadReport report = load_csv(path);
  if (report.records.empty())
    throw DataError("'" + path + "': no usable rows (" +
                    std::to_string(report.rows_skipped) + " skipped)");
  if (report.rows_skipped > 0)
    std::cerr << "note: skipped " << report.rows_skipped << " of "
              << report.rows_total << " rows in '" << path << "'\n";
  if (report_out) *report_out = report;
  return std::move(report.records);
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const std::string& spec_path, int n, std::uint64_t seed,
                 const std::string& out_path) {
  const SyntheticSpec spec = load_spec_json(spec_path);
  const std::vector<SyntheticRow> rows = synth_generate(spec, n, seed);

  std::ofstream out = open_out(out_path);
  Echo echo{{"generator", "cqe gen-data"},
            {"family", to_string(spec.family)},
            {"t_max", fmt_g17(spec.t_max)},
            {"n", std::to_string(n)},
            {"seed", std::to_string(seed)}};
  write_echo(out, echo);
  out << "user_id,item_id,duration_s,watch_time_s";
  for (int j = 0; j < spec.features.n; ++j) out << ",num_" << j;
  out << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SyntheticRow& row = rows[i];
    out << "u" << (i % static_cast<std::size_t>(spec.n_users)) << ",v"
        << (i % static_cast<std::size_t>(spec.n_items)) << ","
        << fmt_g17(row.duration_s) << "," << fmt_g17(row.watch_s);
    for (int j = 0; j < spec.features.n; ++j) out << "," << fmt_g17(row.x[j]);
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + out_path + "'");

  // Sidecar: the spec that generated the file plus the generator arguments.
  std::ofstream side = open_out(out_path + ".spec.json");
  side << "{\n  \"generator\": {\"n\": " << n << ", \"seed\": " << seed
       << "},\n  \"spec\": ";
  std::istringstream spec_json(spec_to_json(spec));
  std::string line;
  bool first = true;
  while (std::getline(spec_json, line)) {
    if (!first) side << "\n  ";
    side << line;
    first = false;
  }
  side << "\n}\n";
  if (!side) throw IoError("failed writing '" + out_path + ".spec.json'");

  std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& data_path,
              const std::string& model_out, const std::string& trace_out) {
  const std::vector<InteractionRecord> records = load_records(data_path);
  const TrainResult result = train(records, to_train_config(cfg), cfg.seed);

  save_model(result.model, config_echo(cfg), model_out);

  std::ofstream trace = open_out(trace_out);
  write_echo(trace, config_echo(cfg));
  trace << "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
    trace << (e + 1) << "," << fmt_g17(result.epoch_loss[e]) << "\n";
  if (!trace) throw IoError("failed writing '" + trace_out + "'");

  std::cout << "trained " << result.model.mlp.param_count() << " parameters over "
            << result.epoch_loss.size() << " epochs; final loss "
            << fmt_g17(result.epoch_loss.back()) << "\n";
  std::cout << "model: " << model_out << "\ntrace: " << trace_out << "\n";
  return 0;
}

void print_report(std::ostream& out, const MetricsReport& report, Task task) {
  if (report.mae) out << "mae = " << fmt_g17(*report.mae) << "\n";
  if (report.xauc) out << "xauc = " << fmt_g17(*report.xauc) << "\n";
  if (report.gauc) out << "gauc = " << fmt_g17(*report.gauc) << "\n";
  for (const auto& [k, v] : report.ndcg_at)
    out << "ndcg@" << k << " = " << fmt_g17(v) << "\n";
  if (task == Task::interest)
    out << "groups_evaluated = " << report.groups_evaluated << "\n"
        << "groups_skipped = " << report.groups_skipped << "\n";
  for (const auto& [metric, msg] : report.notes)
    out << "undefined " << metric << ": " << msg << "\n";
}

void write_report_csv(const std::string& path, const Echo& echo,
                      const MetricsReport& report, Task task) {
  std::ofstream out = open_out(path);
  write_echo(out, echo);
  out << "metric,value\n";
  if (report.mae) out << "mae," << fmt_g17(*report.mae) << "\n";
  if (report.xauc) out << "xauc," << fmt_g17(*report.xauc) << "\n";
  if (report.gauc) out << "gauc," << fmt_g17(*report.gauc) << "\n";
  for (const auto& [k, v] : report.ndcg_at)
    out << "ndcg@" << k << "," << fmt_g17(v) << "\n";
  if (task == Task::interest)
    out << "groups_evaluated," << report.groups_evaluated << "\n"
        << "groups_skipped," << report.groups_skipped << "\n";
  for (const auto& [metric, msg] : report.notes) out << "# undefined " << metric << ": " << msg << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

Echo strategy_echo(const StrategyConfig& strategy, Task task,
                   std::size_t max_pairs, std::uint64_t seed) {
  return {{"strategy", to_string(strategy.kind)},
          {"tau_low", fmt_g17(strategy.tau_low)},
          {"tau_high", fmt_g17(strategy.tau_high)},
          {"k", fmt_g17(strategy.k)},
          {"task", to_string(task)},
          {"xauc_max_pairs", std::to_string(max_pairs)},
          {"seed", std::to_string(seed)}};
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const StrategyConfig& strategy, Task task, std::size_t max_pairs,
             std::uint64_t seed, const std::string& out_path) {
  const CqeModel model = load_model(model_path);
  LoadReport data_report;
  const std::vector<InteractionRecord> records = load_records(data_path, &data_report);
  if (data_report.num_columns != model.encoder.num_columns)
    throw DataError("'" + data_path + "': numeric columns do not match the model (" +
                    std::to_string(data_report.num_columns.size()) + " vs " +
                    std::to_string(model.encoder.num_columns.size()) + ")");

  const MetricsReport report = evaluate(model, records, strategy, task, max_pairs, seed);
  print_report(std::cout, report, task);
  if (!out_path.empty())
    write_report_csv(out_path, strategy_echo(strategy, task, max_pairs, seed), report,
                     task);
  return 0;
}

int cmd_rank(const std::string& model_path, const std::string& pool_path,
             const StrategyConfig& strategy, const std::string& out_path) {
  const CqeModel model = load_model(model_path);
  const PoolFile pf = load_pool_json(pool_path);
  for (const Candidate& c : pf.pool.items)
    if (c.features.size() == 0)
      throw DataError("'" + pool_path + "': rank needs 'features' on every candidate");
  const std::vector<int> order = rank(model, pf.pool, strategy);

  std::ostringstream body;
  body << "rank,candidate\n";
  for (std::size_t r = 0; r < order.size(); ++r)
    body << r << "," << order[r] << "\n";
  std::cout << body.str();
  if (!out_path.empty()) {
    std::ofstream out = open_out(out_path);
    write_echo(out, strategy_echo(strategy, Task::watchtime, 0, 0));
    out << body.str();
    if (!out) throw IoError("failed writing '" + out_path + "'");
  }
  return 0;
}

int cmd_grad_check(const std::vector<int>& hidden, int n_quantiles, int n_samples,
                   int n_dims, std::uint64_t seed, double eps,
                   const std::string& out_path) {
  const PipelineCheck check =
      pipeline_grad_check(hidden, n_quantiles, n_samples, n_dims, seed, eps);
  constexpr double tolerance = 1e-4;
  std::ostringstream body;
  body << "params = " << check.param_count << "\n"
       << "data_seed = " << check.data_seed_used << "\n"
       << "max_rel_error = " << fmt_g17(check.max_rel_error) << "\n"
       << "tolerance = " << fmt_g17(tolerance) << "\n"
       << "result = " << (check.max_rel_error < tolerance ? "pass" : "fail") << "\n";
  std::cout << body.str();
  if (!out_path.empty()) {
    std::ofstream out = open_out(out_path);
    out << body.str();
  }
  if (check.max_rel_error >= tolerance)
    throw NumericError("grad-check: max relative error " +
                       fmt_g17(check.max_rel_error) + " exceeds tolerance");
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& data_path,
              const std::vector<int>& n_list, Task task,
              const std::string& out_path) {
  if (n_list.empty()) throw ConfigError("sweep-quantiles: empty n_list");
  const std::vector<InteractionRecord> records = load_records(data_path);

  std::ofstream out = open_out(out_path);
  write_echo(out, config_echo(cfg));
  if (task == Task::watchtime)
    out << "n_quantiles,status,mae,xauc\n";
  else
    out << "n_quantiles,status,gauc,ndcg@1,ndcg@3,ndcg@5\n";

  for (int n : n_list) {
    try {
      RunConfig row_cfg = cfg;
      row_cfg.n_quantiles = n;
      validate(row_cfg);
      const TrainResult result = train(records, to_train_config(row_cfg), row_cfg.seed);
      const MetricsReport report = evaluate(result.model, records,
                                            to_strategy_config(row_cfg), task);
      auto cell = [](const std::optional<double>& v) {
        return v ? fmt_g17(*v) : std::string();
      };
      if (task == Task::watchtime) {
        out << n << ",ok," << cell(report.mae) << "," << cell(report.xauc) << "\n";
      } else {
        out << n << ",ok," << cell(report.gauc);
        for (int k : {1, 3, 5}) {
          const auto it = report.ndcg_at.find(k);
          out << "," << (it != report.ndcg_at.end() ? fmt_g17(it->second) : std::string());
        }
        out << "\n";
      }
    } catch (const std::exception& e) {
      // Record the failure and keep sweeping.
      std::string msg = e.what();
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      out << n << ",error: " << msg;
      out << (task == Task::watchtime ? ",," : ",,,,");
      out << "\n";
    }
    out.flush();
  }
  if (!out) throw IoError("failed writing '" + out_path + "'");
  std::cout << "sweep written to " << out_path << "\n";
  return 0;
}

int cmd_compare(const RunConfig& cfg, const std::string& pool_path,
                const std::vector<std::string>& strategy_names, int n_sessions,
                std::uint64_t seed, const std::string& out_path) {
  if (strategy_names.empty()) throw ConfigError("compare: need at least one strategy");
  const PoolFile pf = load_pool_json(pool_path);

  std::vector<StrategyConfig> strategies;
  for (const std::string& name : strategy_names) {
    StrategyConfig sc = to_strategy_config(cfg);
    sc.kind = parse_strategy_kind(name);
    validate(sc);
    strategies.push_back(sc);
  }

  const std::vector<StrategyRow> rows = compare_strategies(
      pf.pool, strategies, pf.user_model, pf.horizon, n_sessions, seed,
      pf.n_quantiles);

  std::ostringstream body;
  body << "strategy,mean_watch_s,se_watch,mean_plays,se_plays,churn_rate\n";
  for (const StrategyRow& row : rows)
    body << row.strategy << "," << fmt_g17(row.mean_watch_s) << ","
         << fmt_g17(row.se_watch) << "," << fmt_g17(row.mean_plays) << ","
         << fmt_g17(row.se_plays) << "," << fmt_g17(row.churn_rate) << "\n";

  std::cout << body.str();
  std::ofstream out = open_out(out_path);
  write_echo(out, config_echo(cfg));
  Echo extra{{"pool", pool_path},
             {"n_sessions", std::to_string(n_sessions)},
             {"compare_seed", std::to_string(seed)},
             {"horizon", std::to_string(pf.horizon)},
             {"p_churn", fmt_g17(pf.user_model.p_churn)},
             {"threshold_s", fmt_g17(pf.user_model.threshold_s)}};
  write_echo(out, extra);
  out << body.str();
  if (!out) throw IoError("failed writing '" + out_path + "'");
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"conditional quantile engine for watch-time prediction"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path, model_path, pool_path, spec_path;
  std::string trace_path, strategy_name = "cde", task_name = "watchtime";
  std::string n_list_str = "1,10,100", strategies_str = "cse,dqc,cde";
  std::string hidden_str = "8,16";
  int n_rows = 1000, n_sessions = 10000, n_quantiles = 5, n_samples = 4, n_dims = 12;
  std::uint64_t seed = 42;
  bool seed_given = false;
  double tau_low = -1.0, tau_high = -1.0, k_blend = -1.0, eps = 1e-5;
  std::size_t max_pairs = 5'000'000;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed")->each([&](const std::string&) {
      seed_given = true;
    });
  };

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic interaction CSV");
  gen->add_option("--spec", spec_path, "synthetic spec JSON")->required();
  gen->add_option("--n", n_rows, "number of rows")->required();
  add_seed(gen);
  gen->add_option("--out", out_path, "output CSV path")->required();

  CLI::App* tr = app.add_subcommand("train", "train a quantile model");
  tr->add_option("--config", config_path, "run config file");
  tr->add_option("--data", data_path, "training CSV")->required();
  tr->add_option("--out", model_path, "model output path")->required();
  tr->add_option("--trace", trace_path, "loss trace CSV (default <out>.loss.csv)");
  add_seed(tr);

  CLI::App* ev = app.add_subcommand("eval", "evaluate a trained model");
  ev->add_option("--config", config_path, "run config file");
  ev->add_option("--model", model_path, "model file")->required();
  ev->add_option("--data", data_path, "evaluation CSV")->required();
  ev->add_option("--strategy", strategy_name, "cse | dqc | cde");
  ev->add_option("--task", task_name, "watchtime | interest");
  ev->add_option("--tau-low", tau_low, "CSE/DQC low quantile");
  ev->add_option("--tau-high", tau_high, "DQC high quantile");
  ev->add_option("--k", k_blend, "DQC blend weight");
  ev->add_option("--max-pairs", max_pairs, "XAUC exhaustive/sampling threshold");
  add_seed(ev);
  ev->add_option("--out", out_path, "optional report CSV");

  CLI::App* rk = app.add_subcommand("rank", "rank a candidate pool with a model");
  rk->add_option("--config", config_path, "run config file");
  rk->add_option("--model", model_path, "model file")->required();
  rk->add_option("--pool", pool_path, "pool JSON")->required();
  rk->add_option("--strategy", strategy_name, "cse | dqc | cde");
  rk->add_option("--tau-low", tau_low, "CSE/DQC low quantile");
  rk->add_option("--tau-high", tau_high, "DQC high quantile");
  rk->add_option("--k", k_blend, "DQC blend weight");
  rk->add_option("--out", out_path, "optional ranking CSV");

  CLI::App* gc = app.add_subcommand("grad-check", "finite-difference gradient check");
  gc->add_option("--hidden", hidden_str, "hidden layer sizes");
  gc->add_option("--n-quantiles", n_quantiles, "output quantile count");
  gc->add_option("--samples", n_samples, "sample count");
  gc->add_option("--n-dims", n_dims, "encoder width");
  gc->add_option("--eps", eps, "finite-difference step");
  add_seed(gc);
  gc->add_option("--out", out_path, "optional report path");

  CLI::App* sw = app.add_subcommand("sweep-quantiles", "train/evaluate over a grid of N");
  sw->add_option("--config", config_path, "run config file");
  sw->add_option("--data", data_path, "training CSV")->required();
  sw->add_option("--n-list", n_list_str, "comma-separated quantile counts")->required();
  sw->add_option("--task", task_name, "watchtime | interest");
  add_seed(sw);
  sw->add_option("--out", out_path, "output CSV")->required();

  CLI::App* cp = app.add_subcommand("compare", "simulate strategies over a pool");
  cp->add_option("--config", config_path, "run config file");
  cp->add_option("--pool", pool_path, "pool JSON")->required();
  cp->add_option("--strategies", strategies_str, "comma-separated strategy kinds");
  cp->add_option("--n-sessions", n_sessions, "sessions per strategy");
  add_seed(cp);
  cp->add_option("--out", out_path, "output CSV")->required();

  std::vector<std::string> cli_args(args.rbegin(), args.rend());
  try {
    app.parse(cli_args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed_given) cfg.seed = seed;

    auto strategy_from_flags = [&]() {
      StrategyConfig sc = to_strategy_config(cfg);
      sc.kind = parse_strategy_kind(strategy_name);
      if (tau_low >= 0.0) sc.tau_low = tau_low;
      if (tau_high >= 0.0) sc.tau_high = tau_high;
      if (k_blend >= 0.0) sc.k = k_blend;
      validate(sc);
      return sc;
    };
    auto parse_int_list = [](const std::string& s, const char* what) {
      std::vector<int> out;
      std::istringstream ss(s);
      std::string part;
      while (std::getline(ss, part, ',')) {
        try {
          out.push_back(std::stoi(part));
        } catch (const std::exception&) {
          throw ConfigError(std::string(what) + ": bad entry '" + part + "'");
        }
      }
      if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
      return out;
    };

    if (gen->parsed()) return cmd_gen_data(spec_path, n_rows, cfg.seed, out_path);
    if (tr->parsed()) {
      if (trace_path.empty()) trace_path = model_path + ".loss.csv";
      return cmd_train(cfg, data_path, model_path, trace_path);
    }
    if (ev->parsed())
      return cmd_eval(model_path, data_path, strategy_from_flags(),
                      parse_task(task_name), max_pairs, cfg.seed, out_path);
    if (rk->parsed())
      return cmd_rank(model_path, pool_path, strategy_from_flags(), out_path);
    if (gc->parsed())
      return cmd_grad_check(parse_int_list(hidden_str, "--hidden"), n_quantiles,
                            n_samples, n_dims, cfg.seed, eps, out_path);
    if (sw->parsed())
      return cmd_sweep(cfg, data_path, parse_int_list(n_list_str, "--n-list"),
                       parse_task(task_name), out_path);
    if (cp->parsed()) {
      std::vector<std::string> names;
      std::istringstream ss(strategies_str);
      std::string part;
      while (std::getline(ss, part, ',')) names.push_back(part);
      return cmd_compare(cfg, pool_path, names, n_sessions, cfg.seed, out_path);
    }
    throw ConfigError("no subcommand");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace cqe
