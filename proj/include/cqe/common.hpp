#pragma once
// Shared aliases, error categories and the deterministic RNG used across the
// library. All numeric work is double precision; Eigen is the only math
// dependency.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cqe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error categories. The CLI maps them onto exit codes:
// usage/config -> 1, data -> 2, numeric failure -> 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : DataError {
  using DataError::DataError;
};
struct IoError : DataError {
  using DataError::DataError;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Raised when a metric has no defined value on the given input (e.g. AUC with
// a single class). Callers that aggregate several metrics catch it per metric.
struct UndefinedMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// mt19937_64 with hand-rolled variate transforms so every draw is reproducible
// from the seed alone, independent of the standard library's distribution
// implementations (those are unspecified and differ across toolchains).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal();

  // Uniform integer in [0, bound), rejection sampled (no modulo bias).
  std::uint64_t below(std::uint64_t bound);

  // Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// In-place Fisher-Yates shuffle driven by Rng (std::shuffle is not
// reproducible across standard libraries).
void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng);

// Round-trip-safe decimal formatting (%.17g). Every double written to an
// artifact goes through this so reruns are byte-identical and reloads exact.
std::string fmt_g17(double v);

}  // namespace cqe
