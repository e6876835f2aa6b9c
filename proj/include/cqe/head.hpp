#pragma once
// Monotone quantile output head: fixed quantile-level grid plus the
// ReLU + cumulative-sum transform that makes the estimates non-crossing by
// construction, with its backward pass.

#include "cqe/common.hpp"

namespace cqe {

// Fixed grid tau_i = (i+1)/(n+1), i = 0..n-1. Strictly increasing, all in
// (0,1).
struct QuantileLevels {
  Vec levels;
  int n() const { return static_cast<int>(levels.size()); }
};

QuantileLevels make_levels(int n);

// Non-decreasing, non-negative watch-time estimates, one per quantile level.
struct QuantileEstimates {
  Vec values;
  int n() const { return static_cast<int>(values.size()); }
};

// t[i] = sum_{j<=i} max(d_raw[j], 0).
QuantileEstimates head_forward(const Eigen::Ref<const Vec>& d_raw);

// grad_d_raw[j] = (sum_{i>=j} grad_t[i]) * 1[d_raw[j] > 0].
// ReLU derivative at exactly 0 is taken as 0.
Vec head_backward(const Eigen::Ref<const Vec>& d_raw,
                  const Eigen::Ref<const Vec>& grad_t);

// Row-wise batched variants used by the training loop; one sample per row.
Mat head_forward_batch(const Eigen::Ref<const Mat>& d_raw);
Mat head_backward_batch(const Eigen::Ref<const Mat>& d_raw,
                        const Eigen::Ref<const Mat>& grad_t);

}  // namespace cqe
