#pragma once
// Training objectives: pinball loss per quantile level, the aggregated
// multi-quantile objective, and the two baseline objectives (binary
// cross-entropy on interest labels, plain MSE).

#include "cqe/common.hpp"
#include "cqe/head.hpp"

namespace cqe {

// tau*(y - t) when y >= t, else (1 - tau)*(t - y). tau must lie in (0,1).
double pinball(double y, double t, double tau);

// d/dt of pinball. The kink at y == t is resolved on the y >= t branch, so
// pinball_grad(y, y, tau) == -tau.
double pinball_grad(double y, double t, double tau);

struct LossValue {
  double value = 0.0;
  Vec grad;  // d(value)/d(estimates)
};

// Unweighted sum of pinball losses over all quantile levels.
LossValue qr_loss(double y, const QuantileEstimates& estimates,
                  const QuantileLevels& levels);

// Batched form for the training loop: y[i] against row i of t. Returns the
// sum of per-sample losses and fills grad_t (same shape as t).
double qr_loss_batch(const Eigen::Ref<const Vec>& y,
                     const Eigen::Ref<const Mat>& t,
                     const QuantileLevels& levels, Mat& grad_t);

struct ScalarLoss {
  double value = 0.0;
  double grad = 0.0;
};

// -r*log(sigmoid(z)) - (1-r)*log(1-sigmoid(z)), evaluated in the stable
// log-sum-exp form. grad is with respect to the logit: sigmoid(z) - r.
ScalarLoss bce_baseline(double r, double logit);

// (pred - y)^2 with gradient 2*(pred - y).
ScalarLoss mse_baseline(double y, double pred);

}  // namespace cqe
