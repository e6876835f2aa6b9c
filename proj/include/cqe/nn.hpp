#pragma once
// Minimal dense feed-forward network with exact analytic gradients, SGD/Adam
// steps and a finite-difference gradient checker. ReLU on hidden layers,
// identity on the output layer.

#include "cqe/common.hpp"

#include <functional>

namespace cqe {

struct Layer {
  Mat w;  // (out, in)
  Vec b;  // (out)
};

struct Mlp {
  std::vector<Layer> layers;

  int input_dim() const { return static_cast<int>(layers.front().w.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().w.rows()); }
  std::vector<int> layer_sizes() const;
  std::size_t param_count() const;
  bool same_shape(const Mlp& other) const;
};

// Weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero. Deterministic
// for a fixed seed.
Mlp init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

Mlp zeros_like(const Mlp& params);
void add_scaled(Mlp& acc, const Mlp& g, double scale);

// Activations kept by forward for the backward pass. One sample per row;
// act[0] is the input batch, act[l+1] the output of layer l, pre[l] its
// pre-activation.
struct ForwardCache {
  std::vector<Mat> act;
  std::vector<Mat> pre;
};

// Batched forward: x is (n_samples, input_dim), result (n_samples,
// output_dim).
Mat forward(const Mlp& params, const Mat& x, ForwardCache* cache = nullptr);
// Single-sample convenience wrapper.
Vec forward_one(const Mlp& params, const Vec& x, ForwardCache* cache = nullptr);

// Gradient of sum_rows(output . grad_output) with respect to every parameter.
// The cache must come from forward() on the same params.
Mlp backward(const Mlp& params, const ForwardCache& cache,
             const Mat& grad_output);
Mlp backward_one(const Mlp& params, const ForwardCache& cache,
                 const Vec& grad_output);

enum class OptAlgo { sgd, adam };

// Adam constants: beta1=0.9, beta2=0.999, eps=1e-8, bias-corrected.
struct OptState {
  OptAlgo algo = OptAlgo::sgd;
  std::vector<Layer> m;  // first moments (adam only), shapes mirror params
  std::vector<Layer> v;  // second moments
  long step_count = 0;
};

OptState make_opt_state(OptAlgo algo, const Mlp& params);

// In-place parameter update. SGD: p -= lr*g. Adam: bias-corrected update.
// Non-finite gradients raise NumericError.
void step(Mlp& params, const Mlp& grads, OptState& state, double lr);

// Central-difference check of analytic_grads against loss(params). Returns
// max over parameters of |analytic - numeric| / max(|analytic|, |numeric|,
// 1e-12).
double grad_check(const Mlp& params,
                  const std::function<double(const Mlp&)>& loss,
                  const Mlp& analytic_grads, double eps);

}  // namespace cqe
