#pragma once
// Flat key=value run configuration shared by the CLI commands. Unknown keys
// are hard errors so sweep configs cannot silently typo a knob.

#include "cqe/inference.hpp"
#include "cqe/nn.hpp"
#include "cqe/train.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cqe {

struct RunConfig {
  int n_quantiles = 100;
  double tau_low = 0.25;
  double tau_high = 0.7;
  double k = 0.5;
  std::vector<int> hidden_sizes = {64, 32};
  std::string optimizer = "adam";  // sgd | adam
  double lr = 1e-3;
  int epochs = 20;
  int batch_size = 256;
  std::uint64_t seed = 42;
  int n_dims = 2048;
  std::string strategy = "cde";  // cse | dqc | cde
};

// Parses "key = value" lines ('#' comments and blank lines allowed). Unknown
// keys, unparsable values and out-of-range values raise ConfigError.
RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig load_config(const std::string& path);

void validate(const RunConfig& cfg);

TrainConfig to_train_config(const RunConfig& cfg);
StrategyConfig to_strategy_config(const RunConfig& cfg);

// Key/value lines echoed into artifact headers, in declaration order.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg);

}  // namespace cqe
