#include "cqe/nn.hpp"

#include <cmath>

namespace cqe {

std::vector<int> Mlp::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(input_dim());
  for (const Layer& l : layers) sizes.push_back(static_cast<int>(l.w.rows()));
  return sizes;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers) n += static_cast<std::size_t>(l.w.size() + l.b.size());
  return n;
}

bool Mlp::same_shape(const Mlp& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].w.rows() != other.layers[i].w.rows()) return false;
    if (layers[i].w.cols() != other.layers[i].w.cols()) return false;
    if (layers[i].b.size() != other.layers[i].b.size()) return false;
  }
  return true;
}

Mlp init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("init_mlp: need at least input and output sizes");
  for (int s : layer_sizes)
    if (s < 1) throw std::invalid_argument("init_mlp: layer sizes must be >= 1");

  Rng rng(seed);
  Mlp mlp;
  mlp.layers.resize(layer_sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Layer& layer = mlp.layers[l];
    layer.w.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.w(r, c) = rng.uniform(-limit, limit);
    layer.b = Vec::Zero(fan_out);
  }
  return mlp;
}

Mlp zeros_like(const Mlp& params) {
  Mlp z;
  z.layers.reserve(params.layers.size());
  for (const Layer& l : params.layers)
    z.layers.push_back({Mat::Zero(l.w.rows(), l.w.cols()), Vec::Zero(l.b.size())});
  return z;
}

void add_scaled(Mlp& acc, const Mlp& g, double scale) {
  if (!acc.same_shape(g)) throw std::invalid_argument("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < acc.layers.size(); ++i) {
    acc.layers[i].w += scale * g.layers[i].w;
    acc.layers[i].b += scale * g.layers[i].b;
  }
}

Mat forward(const Mlp& params, const Mat& x, ForwardCache* cache) {
  if (x.cols() != params.input_dim())
    throw std::invalid_argument("forward: input dim mismatch");
  const std::size_t n_layers = params.layers.size();
  if (cache) {
    cache->act.assign(1, x);
    cache->pre.clear();
    cache->pre.reserve(n_layers);
  }
  Mat a = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Layer& layer = params.layers[l];
    Mat z = a * layer.w.transpose();
    z.rowwise() += layer.b.transpose();
    if (cache) cache->pre.push_back(z);
    if (l + 1 < n_layers)
      a = z.cwiseMax(0.0);
    else
      a = std::move(z);
    if (cache) cache->act.push_back(a);
  }
  return a;
}

Vec forward_one(const Mlp& params, const Vec& x, ForwardCache* cache) {
  Mat out = forward(params, x.transpose(), cache);
  return out.row(0).transpose();
}

Mlp backward(const Mlp& params, const ForwardCache& cache,
             const Mat& grad_output) {
  const std::size_t n_layers = params.layers.size();
  if (cache.act.size() != n_layers + 1 || cache.pre.size() != n_layers)
    throw std::logic_error("backward: cache does not match params");
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (cache.pre[l].cols() != params.layers[l].w.rows() ||
        cache.act[l].cols() != params.layers[l].w.cols())
      throw std::logic_error("backward: cache does not match params");
  }
  if (grad_output.rows() != cache.act[0].rows() ||
      grad_output.cols() != params.output_dim())
    throw std::invalid_argument("backward: grad_output shape mismatch");

  Mlp grads = zeros_like(params);
  Mat delta = grad_output;  // output layer is identity
  for (std::size_t l = n_layers; l-- > 0;) {
    grads.layers[l].w = delta.transpose() * cache.act[l];
    grads.layers[l].b = delta.colwise().sum().transpose();
    if (l > 0) {
      Mat back = delta * params.layers[l].w;
      // ReLU derivative; defined as 0 at exactly 0.
      delta = (cache.pre[l - 1].array() > 0.0).select(back, 0.0);
    }
  }
  return grads;
}

Mlp backward_one(const Mlp& params, const ForwardCache& cache,
                 const Vec& grad_output) {
  return backward(params, cache, grad_output.transpose());
}

OptState make_opt_state(OptAlgo algo, const Mlp& params) {
  OptState st;
  st.algo = algo;
  if (algo == OptAlgo::adam) {
    Mlp z = zeros_like(params);
    st.m = z.layers;
    st.v = std::move(z.layers);
  }
  return st;
}

void step(Mlp& params, const Mlp& grads, OptState& state, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("step: lr must be > 0");
  if (!params.same_shape(grads)) throw std::invalid_argument("step: shape mismatch");
  for (const Layer& l : grads.layers)
    if (!l.w.allFinite() || !l.b.allFinite())
      throw NumericError("step: non-finite gradient");

  if (state.algo == OptAlgo::sgd) {
    ++state.step_count;
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
      params.layers[i].w -= lr * grads.layers[i].w;
      params.layers[i].b -= lr * grads.layers[i].b;
    }
    return;
  }

  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  const long t = ++state.step_count;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = beta1 * m + (1.0 - beta1) * g;
    v.array() = beta2 * v.array() + (1.0 - beta2) * g.array().square();
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    update(params.layers[i].w, grads.layers[i].w, state.m[i].w, state.v[i].w);
    update(params.layers[i].b, grads.layers[i].b, state.m[i].b, state.v[i].b);
  }
}

double grad_check(const Mlp& params,
                  const std::function<double(const Mlp&)>& loss,
                  const Mlp& analytic_grads, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be > 0");
  if (!params.same_shape(analytic_grads))
    throw std::invalid_argument("grad_check: gradient shape mismatch");

  Mlp p = params;
  double max_rel = 0.0;
  auto probe = [&](double& slot, double analytic) {
    const double orig = slot;
    slot = orig + eps;
    const double lp = loss(p);
    slot = orig - eps;
    const double lm = loss(p);
    slot = orig;
    if (!std::isfinite(lp) || !std::isfinite(lm))
      throw NumericError("grad_check: non-finite loss");
    const double numeric = (lp - lm) / (2.0 * eps);
    const double rel = std::abs(analytic - numeric) /
                       std::max({std::abs(analytic), std::abs(numeric), 1e-12});
    max_rel = std::max(max_rel, rel);
  };
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    Mat& w = p.layers[l].w;
    const Mat& gw = analytic_grads.layers[l].w;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) probe(w(r, c), gw(r, c));
    Vec& b = p.layers[l].b;
    const Vec& gb = analytic_grads.layers[l].b;
    for (Eigen::Index i = 0; i < b.size(); ++i) probe(b[i], gb[i]);
  }
  return max_rel;
}

}  // namespace cqe
