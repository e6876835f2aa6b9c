#include "cqe/synthetic.hpp"

#include "cqe/stats.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace cqe {

namespace {

double lognormal_cdf(const Lognormal& d, double t) {
  if (t <= 0.0) return 0.0;
  if (d.sigma == 0.0) return t < std::exp(d.mu) ? 0.0 : 1.0;
  return norm_cdf((std::log(t) - d.mu) / d.sigma);
}

double raw_cdf(const DistFamily& f, double t) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Lognormal>) {
          return lognormal_cdf(d, t);
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          if (t <= 0.0) return 0.0;
          return gamma_p(d.shape, t / d.scale);
        } else {
          return d.w * lognormal_cdf(d.a, t) + (1.0 - d.w) * lognormal_cdf(d.b, t);
        }
      },
      f);
}

// Bisection on a monotone CDF. The bracket is grown geometrically, then
// narrowed until both the interval and the CDF residual are tiny.
double invert_cdf(const DistFamily& f, double tau, double hi_guess) {
  double lo = 0.0;
  double hi = std::max(hi_guess, 1e-12);
  for (int i = 0; i < 2048 && raw_cdf(f, hi) < tau; ++i) hi *= 2.0;
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 400; ++i) {
    mid = 0.5 * (lo + hi);
    const double c = raw_cdf(f, mid);
    if (c < tau)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, hi) && std::abs(c - tau) <= 1e-10) break;
  }
  return 0.5 * (lo + hi);
}

double raw_quantile(const DistFamily& f, double tau) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Lognormal>) {
          if (d.sigma == 0.0) return std::exp(d.mu);
          return std::exp(d.mu + d.sigma * norm_quantile(tau));
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          const double guess = d.scale * (d.shape + 10.0 * std::sqrt(d.shape) + 10.0);
          return invert_cdf(f, tau, guess);
        } else {
          const double qa = raw_quantile(DistFamily{d.a}, std::max(tau, 0.999));
          const double qb = raw_quantile(DistFamily{d.b}, std::max(tau, 0.999));
          return invert_cdf(f, tau, std::max(qa, qb));
        }
      },
      f);
}

// E[W * 1{W <= cap}] for the uncapped variable.
double mean_below(const DistFamily& f, double cap) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Lognormal>) {
          if (d.sigma == 0.0) {
            const double v = std::exp(d.mu);
            return v <= cap ? v : 0.0;
          }
          return std::exp(d.mu + 0.5 * d.sigma * d.sigma) *
                 norm_cdf((std::log(cap) - d.mu - d.sigma * d.sigma) / d.sigma);
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          return d.shape * d.scale * gamma_p(d.shape + 1.0, cap / d.scale);
        } else {
          return d.w * mean_below(DistFamily{d.a}, cap) +
                 (1.0 - d.w) * mean_below(DistFamily{d.b}, cap);
        }
      },
      f);
}

double raw_sample(const DistFamily& f, Rng& rng) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Lognormal>) {
          return std::exp(d.mu + d.sigma * rng.normal());
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          return rng.gamma(d.shape) * d.scale;
        } else {
          const bool first = rng.uniform() < d.w;
          const Lognormal& c = first ? d.a : d.b;
          return std::exp(c.mu + c.sigma * rng.normal());
        }
      },
      f);
}

}  // namespace

double dist_cdf(const Distribution& d, double t) {
  if (t >= d.t_max) return 1.0;
  return raw_cdf(d.family, t);
}

double dist_quantile(const Distribution& d, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("dist_quantile: tau must lie in (0,1)");
  return std::min(raw_quantile(d.family, tau), d.t_max);
}

double dist_mean(const Distribution& d) {
  const double tail = 1.0 - raw_cdf(d.family, d.t_max);
  return mean_below(d.family, d.t_max) + d.t_max * tail;
}

double dist_sample(const Distribution& d, Rng& rng) {
  return std::min(raw_sample(d.family, rng), d.t_max);
}

// ---------------------------------------------------------------------------

Family parse_family(const std::string& name) {
  if (name == "lognormal") return Family::lognormal;
  if (name == "gamma") return Family::gamma;
  if (name == "lognormal_mix") return Family::lognormal_mix;
  throw SchemaError("spec field 'family': unknown value '" + name +
                    "' (expected lognormal, gamma or lognormal_mix)");
}

std::string to_string(Family family) {
  switch (family) {
    case Family::lognormal: return "lognormal";
    case Family::gamma: return "gamma";
    case Family::lognormal_mix: return "lognormal_mix";
  }
  throw std::logic_error("to_string: bad Family");
}

double affine_eval(const AffineMap& m, const Eigen::Ref<const Vec>& x) {
  if (m.w.size() != x.size())
    throw std::invalid_argument("affine map / feature dimension mismatch");
  return m.w.dot(x) + m.b;
}

Distribution conditional_dist(const SyntheticSpec& spec,
                              const Eigen::Ref<const Vec>& x) {
  Distribution out;
  out.t_max = spec.t_max;
  switch (spec.family) {
    case Family::lognormal: {
      Lognormal d{affine_eval(spec.mu, x), affine_eval(spec.sigma, x)};
      if (!(d.sigma >= 0.0) || !std::isfinite(d.sigma) || !std::isfinite(d.mu))
        throw std::invalid_argument("lognormal: sigma(x) must be >= 0 and finite");
      out.family = d;
      break;
    }
    case Family::gamma: {
      GammaDist d{affine_eval(spec.shape, x), affine_eval(spec.scale, x)};
      if (!(d.shape > 0.0) || !(d.scale > 0.0))
        throw std::invalid_argument("gamma: shape(x) and scale(x) must be > 0");
      out.family = d;
      break;
    }
    case Family::lognormal_mix: {
      LognormalMix d;
      d.w = affine_eval(spec.mix_w, x);
      d.a = {affine_eval(spec.mu, x), affine_eval(spec.sigma, x)};
      d.b = {affine_eval(spec.mu2, x), affine_eval(spec.sigma2, x)};
      if (!(d.w > 0.0 && d.w < 1.0))
        throw std::invalid_argument("lognormal_mix: weight(x) must lie in (0,1)");
      if (!(d.a.sigma >= 0.0) || !(d.b.sigma >= 0.0))
        throw std::invalid_argument("lognormal_mix: sigmas must be >= 0");
      out.family = d;
      break;
    }
  }
  return out;
}

double true_quantile(const SyntheticSpec& spec, const Eigen::Ref<const Vec>& x,
                     double tau) {
  return dist_quantile(conditional_dist(spec, x), tau);
}

double true_mean(const SyntheticSpec& spec, const Eigen::Ref<const Vec>& x) {
  return dist_mean(conditional_dist(spec, x));
}

std::vector<SyntheticRow> synth_generate(const SyntheticSpec& spec, int n,
                                         std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("synth_generate: n must be >= 1");
  if (spec.features.n < 1)
    throw std::invalid_argument("synth_generate: feature dimension must be >= 1");
  if (!(spec.features.lo <= spec.features.hi))
    throw std::invalid_argument("synth_generate: feature range is empty");
  if (!(spec.dur_lo > 0.0 && spec.dur_lo <= spec.dur_hi))
    throw std::invalid_argument("synth_generate: duration range invalid");
  if (!(spec.t_max > 0.0))
    throw std::invalid_argument("synth_generate: t_max must be > 0");

  Rng rng(seed);
  std::vector<SyntheticRow> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SyntheticRow row;
    row.x.resize(spec.features.n);
    for (int j = 0; j < spec.features.n; ++j)
      row.x[j] = rng.uniform(spec.features.lo, spec.features.hi);
    const Distribution dist = conditional_dist(spec, row.x);
    row.watch_s = dist_sample(dist, rng);
    row.duration_s = rng.uniform(spec.dur_lo, spec.dur_hi);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// JSON I/O

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

double require_number(const json& obj, const std::string& ctx, const char* key) {
  if (!obj.contains(key))
    throw SchemaError("spec field '" + ctx + key + "': missing");
  if (!obj[key].is_number())
    throw SchemaError("spec field '" + ctx + key + "': expected a number");
  return obj[key].get<double>();
}

AffineMap parse_affine(const json& params, const char* key, int n_features) {
  if (!params.contains(key))
    throw SchemaError(std::string("spec field 'params.") + key + "': missing");
  const json& m = params[key];
  if (!m.is_object())
    throw SchemaError(std::string("spec field 'params.") + key +
                      "': expected an object with 'bias' and 'weights'");
  AffineMap out;
  out.b = require_number(m, std::string("params.") + key + ".", "bias");
  if (!m.contains("weights") || !m["weights"].is_array())
    throw SchemaError(std::string("spec field 'params.") + key +
                      ".weights': expected an array");
  const auto& arr = m["weights"];
  if (static_cast<int>(arr.size()) != n_features)
    throw SchemaError(std::string("spec field 'params.") + key +
                      ".weights': length must equal features.n");
  out.w.resize(n_features);
  for (int i = 0; i < n_features; ++i) {
    if (!arr[i].is_number())
      throw SchemaError(std::string("spec field 'params.") + key +
                        ".weights': expected numbers");
    out.w[i] = arr[i].get<double>();
  }
  return out;
}

ordered_json affine_to_json(const AffineMap& m) {
  ordered_json out;
  out["bias"] = m.b;
  out["weights"] = std::vector<double>(m.w.data(), m.w.data() + m.w.size());
  return out;
}

}  // namespace

SyntheticSpec parse_spec_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("spec JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("spec JSON: top level must be an object");

  static const std::vector<std::string> known = {
      "family", "t_max", "features", "n_users", "n_items", "duration", "params"};
  for (const auto& [key, _] : root.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw SchemaError("spec field '" + key + "': unknown key");

  SyntheticSpec spec;
  if (!root.contains("family") || !root["family"].is_string())
    throw SchemaError("spec field 'family': missing or not a string");
  spec.family = parse_family(root["family"].get<std::string>());

  if (root.contains("t_max")) spec.t_max = require_number(root, "", "t_max");
  if (root.contains("n_users")) {
    if (!root["n_users"].is_number_integer() || root["n_users"].get<int>() < 1)
      throw SchemaError("spec field 'n_users': expected a positive integer");
    spec.n_users = root["n_users"].get<int>();
  }
  if (root.contains("n_items")) {
    if (!root["n_items"].is_number_integer() || root["n_items"].get<int>() < 1)
      throw SchemaError("spec field 'n_items': expected a positive integer");
    spec.n_items = root["n_items"].get<int>();
  }
  if (root.contains("features")) {
    const json& f = root["features"];
    if (!f.is_object()) throw SchemaError("spec field 'features': expected an object");
    if (f.contains("n")) {
      if (!f["n"].is_number_integer() || f["n"].get<int>() < 1)
        throw SchemaError("spec field 'features.n': expected a positive integer");
      spec.features.n = f["n"].get<int>();
    }
    if (f.contains("low")) spec.features.lo = require_number(f, "features.", "low");
    if (f.contains("high")) spec.features.hi = require_number(f, "features.", "high");
  }
  if (root.contains("duration")) {
    const json& d = root["duration"];
    if (!d.is_object()) throw SchemaError("spec field 'duration': expected an object");
    if (d.contains("low")) spec.dur_lo = require_number(d, "duration.", "low");
    if (d.contains("high")) spec.dur_hi = require_number(d, "duration.", "high");
  }

  if (!root.contains("params") || !root["params"].is_object())
    throw SchemaError("spec field 'params': missing or not an object");
  const json& params = root["params"];
  const int nf = spec.features.n;
  switch (spec.family) {
    case Family::lognormal:
      spec.mu = parse_affine(params, "mu", nf);
      spec.sigma = parse_affine(params, "sigma", nf);
      break;
    case Family::gamma:
      spec.shape = parse_affine(params, "shape", nf);
      spec.scale = parse_affine(params, "scale", nf);
      break;
    case Family::lognormal_mix:
      spec.mu = parse_affine(params, "mu", nf);
      spec.sigma = parse_affine(params, "sigma", nf);
      spec.mu2 = parse_affine(params, "mu2", nf);
      spec.sigma2 = parse_affine(params, "sigma2", nf);
      spec.mix_w = parse_affine(params, "mix_w", nf);
      break;
  }
  return spec;
}

SyntheticSpec load_spec_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spec file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec_json(ss.str());
}

std::string spec_to_json(const SyntheticSpec& spec) {
  ordered_json root;
  root["family"] = to_string(spec.family);
  root["t_max"] = spec.t_max;
  root["features"] = {{"n", spec.features.n},
                      {"low", spec.features.lo},
                      {"high", spec.features.hi}};
  root["n_users"] = spec.n_users;
  root["n_items"] = spec.n_items;
  root["duration"] = {{"low", spec.dur_lo}, {"high", spec.dur_hi}};
  ordered_json params;
  switch (spec.family) {
    case Family::lognormal:
      params["mu"] = affine_to_json(spec.mu);
      params["sigma"] = affine_to_json(spec.sigma);
      break;
    case Family::gamma:
      params["shape"] = affine_to_json(spec.shape);
      params["scale"] = affine_to_json(spec.scale);
      break;
    case Family::lognormal_mix:
      params["mu"] = affine_to_json(spec.mu);
      params["sigma"] = affine_to_json(spec.sigma);
      params["mu2"] = affine_to_json(spec.mu2);
      params["sigma2"] = affine_to_json(spec.sigma2);
      params["mix_w"] = affine_to_json(spec.mix_w);
      break;
  }
  root["params"] = std::move(params);
  return root.dump(2) + "\n";
}

}  // namespace cqe
