#include "cqe/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cqe {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || errno == ERANGE)
    throw ConfigError("config key '" + key + "': bad number '" + value + "'");
  return v;
}

long long to_int(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size() || errno == ERANGE)
    throw ConfigError("config key '" + key + "': bad integer '" + value + "'");
  return v;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::istringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty())
      throw ConfigError("config key '" + key + "': empty list entry");
    out.push_back(static_cast<int>(to_int(key, part)));
  }
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    if (key == "n_quantiles")
      cfg.n_quantiles = static_cast<int>(to_int(key, value));
    else if (key == "tau_low")
      cfg.tau_low = to_double(key, value);
    else if (key == "tau_high")
      cfg.tau_high = to_double(key, value);
    else if (key == "k")
      cfg.k = to_double(key, value);
    else if (key == "hidden_sizes")
      cfg.hidden_sizes = to_int_list(key, value);
    else if (key == "optimizer")
      cfg.optimizer = value;
    else if (key == "lr")
      cfg.lr = to_double(key, value);
    else if (key == "epochs")
      cfg.epochs = static_cast<int>(to_int(key, value));
    else if (key == "batch_size")
      cfg.batch_size = static_cast<int>(to_int(key, value));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(to_int(key, value));
    else if (key == "n_dims")
      cfg.n_dims = static_cast<int>(to_int(key, value));
    else if (key == "strategy")
      cfg.strategy = value;
    else
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": unknown config key '" + key + "'");
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void validate(const RunConfig& cfg) {
  try {
    validate(to_train_config(cfg));
    validate(to_strategy_config(cfg));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.tau_low < cfg.tau_high))
    throw ConfigError("config: tau_low must be < tau_high");
}

TrainConfig to_train_config(const RunConfig& cfg) {
  TrainConfig tc;
  tc.n_quantiles = cfg.n_quantiles;
  tc.hidden = cfg.hidden_sizes;
  if (cfg.optimizer == "sgd")
    tc.optimizer = OptAlgo::sgd;
  else if (cfg.optimizer == "adam")
    tc.optimizer = OptAlgo::adam;
  else
    throw std::invalid_argument("config: optimizer must be sgd or adam");
  tc.lr = cfg.lr;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.n_dims = cfg.n_dims;
  return tc;
}

StrategyConfig to_strategy_config(const RunConfig& cfg) {
  StrategyConfig sc;
  sc.kind = parse_strategy_kind(cfg.strategy);
  sc.tau_low = cfg.tau_low;
  sc.tau_high = cfg.tau_high;
  sc.k = cfg.k;
  validate(sc);
  return sc;
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg) {
  std::string hidden;
  for (std::size_t i = 0; i < cfg.hidden_sizes.size(); ++i) {
    if (i) hidden += ",";
    hidden += std::to_string(cfg.hidden_sizes[i]);
  }
  return {
      {"n_quantiles", std::to_string(cfg.n_quantiles)},
      {"tau_low", fmt_g17(cfg.tau_low)},
      {"tau_high", fmt_g17(cfg.tau_high)},
      {"k", fmt_g17(cfg.k)},
      {"hidden_sizes", hidden},
      {"optimizer", cfg.optimizer},
      {"lr", fmt_g17(cfg.lr)},
      {"epochs", std::to_string(cfg.epochs)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"seed", std::to_string(cfg.seed)},
      {"n_dims", std::to_string(cfg.n_dims)},
      {"strategy", cfg.strategy},
  };
}

}  // namespace cqe
