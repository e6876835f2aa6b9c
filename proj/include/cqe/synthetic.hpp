#pragma once
// Parametric ground-truth watch-time distributions with an analytic quantile
// oracle, plus the synthetic dataset generator built on top of them. Watch
// times are capped at t_max (W = min(W_raw, t_max)), and the quantile/mean
// oracles apply the same cap.

#include "cqe/common.hpp"

#include <string>
#include <variant>
#include <vector>

namespace cqe {

struct Lognormal {
  double mu = 0.0;
  double sigma = 1.0;  // >= 0; sigma == 0 is the point mass at exp(mu)
};

struct GammaDist {
  double shape = 1.0;  // > 0
  double scale = 1.0;  // > 0
};

// Two-component lognormal mixture; w is the weight of component a.
struct LognormalMix {
  double w = 0.5;  // in (0,1)
  Lognormal a;
  Lognormal b;
};

using DistFamily = std::variant<Lognormal, GammaDist, LognormalMix>;

// One concrete conditional distribution, capped at t_max.
struct Distribution {
  DistFamily family;
  double t_max = 300.0;
};

// CDF/quantile/mean of the capped variable min(W_raw, t_max). The mixture
// quantile is found by bisection on the CDF to a residual <= 1e-9; the gamma
// quantile by bisection on the regularized incomplete gamma.
double dist_cdf(const Distribution& d, double t);
double dist_quantile(const Distribution& d, double tau);
double dist_mean(const Distribution& d);
double dist_sample(const Distribution& d, Rng& rng);

// ---------------------------------------------------------------------------

enum class Family { lognormal, gamma, lognormal_mix };

Family parse_family(const std::string& name);  // SchemaError on unknown name
std::string to_string(Family family);

// value = w . x + b
struct AffineMap {
  Vec w;
  double b = 0.0;
};
double affine_eval(const AffineMap& m, const Eigen::Ref<const Vec>& x);

struct FeatureSampler {
  int n = 2;           // feature dimension
  double lo = 0.0;     // iid uniform per coordinate
  double hi = 1.0;
};

// Conditional distribution family whose parameters are affine in the feature
// vector. Which maps apply depends on the family:
//   lognormal:      mu, sigma
//   gamma:          shape, scale
//   lognormal_mix:  mu, sigma (component a), mu2, sigma2, mix_w
struct SyntheticSpec {
  Family family = Family::lognormal;
  double t_max = 300.0;
  FeatureSampler features;
  int n_users = 100;        // synthetic user ids cycle over this many values
  int n_items = 1000;       // synthetic item ids cycle over this many values
  double dur_lo = 5.0;      // durations sampled uniform in [dur_lo, dur_hi]
  double dur_hi = 60.0;
  AffineMap mu, sigma;
  AffineMap shape, scale;
  AffineMap mix_w, mu2, sigma2;
};

// Instantiates the distribution at x and validates the resulting parameters
// (sigma >= 0, shape/scale > 0, mixture weight in (0,1)); invalid values raise
// invalid_argument.
Distribution conditional_dist(const SyntheticSpec& spec,
                              const Eigen::Ref<const Vec>& x);

double true_quantile(const SyntheticSpec& spec, const Eigen::Ref<const Vec>& x,
                     double tau);
double true_mean(const SyntheticSpec& spec, const Eigen::Ref<const Vec>& x);

struct SyntheticRow {
  Vec x;
  double watch_s = 0.0;
  double duration_s = 0.0;
};

// Deterministic per seed. Draw order per row: features, then watch time, then
// duration.
std::vector<SyntheticRow> synth_generate(const SyntheticSpec& spec, int n,
                                         std::uint64_t seed);

// JSON (de)serialization of the spec; parse errors name the offending field.
SyntheticSpec load_spec_json(const std::string& path);
SyntheticSpec parse_spec_json(const std::string& text);
std::string spec_to_json(const SyntheticSpec& spec);

}  // namespace cqe
