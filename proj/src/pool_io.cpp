#include "cqe/harness.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace cqe {

namespace {

using nlohmann::json;

double number_at(const json& obj, const std::string& ctx, const char* key,
                 double fallback, bool required) {
  if (!obj.contains(key)) {
    if (required) throw SchemaError("pool field '" + ctx + key + "': missing");
    return fallback;
  }
  if (!obj[key].is_number())
    throw SchemaError("pool field '" + ctx + key + "': expected a number");
  return obj[key].get<double>();
}

}  // namespace

PoolFile parse_pool_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("pool JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("pool JSON: top level must be an object");

  PoolFile out;
  const double default_t_max = number_at(root, "", "t_max", 300.0, false);
  if (root.contains("n_quantiles")) {
    if (!root["n_quantiles"].is_number_integer() || root["n_quantiles"].get<int>() < 1)
      throw SchemaError("pool field 'n_quantiles': expected a positive integer");
    out.n_quantiles = root["n_quantiles"].get<int>();
  }
  if (root.contains("user_model")) {
    const json& um = root["user_model"];
    if (!um.is_object())
      throw SchemaError("pool field 'user_model': expected an object");
    out.user_model.p_churn =
        number_at(um, "user_model.", "p_churn", out.user_model.p_churn, false);
    out.user_model.threshold_s =
        number_at(um, "user_model.", "threshold_s", out.user_model.threshold_s, false);
    if (um.contains("horizon")) {
      if (!um["horizon"].is_number_integer() || um["horizon"].get<int>() < 1)
        throw SchemaError("pool field 'user_model.horizon': expected a positive integer");
      out.horizon = um["horizon"].get<int>();
    }
  }

  if (!root.contains("candidates") || !root["candidates"].is_array() ||
      root["candidates"].empty())
    throw SchemaError("pool field 'candidates': missing or empty");

  std::size_t index = 0;
  for (const json& c : root["candidates"]) {
    const std::string ctx = "candidates[" + std::to_string(index) + "].";
    if (!c.is_object()) throw SchemaError("pool field '" + ctx + "': expected an object");
    if (!c.contains("family") || !c["family"].is_string())
      throw SchemaError("pool field '" + ctx + "family': missing or not a string");
    const std::string family = c["family"].get<std::string>();

    Candidate cand;
    cand.dist.t_max = number_at(c, ctx, "t_max", default_t_max, false);
    if (family == "lognormal") {
      Lognormal d{number_at(c, ctx, "mu", 0.0, true),
                  number_at(c, ctx, "sigma", 0.0, true)};
      if (!(d.sigma >= 0.0))
        throw SchemaError("pool field '" + ctx + "sigma': must be >= 0");
      cand.dist.family = d;
    } else if (family == "gamma") {
      GammaDist d{number_at(c, ctx, "shape", 0.0, true),
                  number_at(c, ctx, "scale", 0.0, true)};
      if (!(d.shape > 0.0) || !(d.scale > 0.0))
        throw SchemaError("pool field '" + ctx + "shape/scale': must be > 0");
      cand.dist.family = d;
    } else if (family == "lognormal_mix") {
      LognormalMix d;
      d.w = number_at(c, ctx, "w", 0.0, true);
      d.a = {number_at(c, ctx, "mu1", 0.0, true), number_at(c, ctx, "sigma1", 0.0, true)};
      d.b = {number_at(c, ctx, "mu2", 0.0, true), number_at(c, ctx, "sigma2", 0.0, true)};
      if (!(d.w > 0.0 && d.w < 1.0))
        throw SchemaError("pool field '" + ctx + "w': must lie in (0,1)");
      if (!(d.a.sigma >= 0.0) || !(d.b.sigma >= 0.0))
        throw SchemaError("pool field '" + ctx + "sigma1/sigma2': must be >= 0");
      cand.dist.family = d;
    } else {
      throw SchemaError("pool field '" + ctx + "family': unknown value '" + family + "'");
    }

    if (c.contains("features")) {
      if (!c["features"].is_array())
        throw SchemaError("pool field '" + ctx + "features': expected an array");
      const auto& arr = c["features"];
      cand.features.resize(static_cast<Eigen::Index>(arr.size()));
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number())
          throw SchemaError("pool field '" + ctx + "features': expected numbers");
        cand.features[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
      }
    }
    out.pool.items.push_back(std::move(cand));
    ++index;
  }
  return out;
}

PoolFile load_pool_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pool file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pool_json(ss.str());
}

}  // namespace cqe
