#include "cqe/loss.hpp"

#include <cmath>

namespace cqe {

namespace {
void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("pinball: tau must lie in (0,1)");
}
}  // namespace

double pinball(double y, double t, double tau) {
  check_tau(tau);
  return y >= t ? tau * (y - t) : (1.0 - tau) * (t - y);
}

double pinball_grad(double y, double t, double tau) {
  check_tau(tau);
  return y >= t ? -tau : 1.0 - tau;
}

LossValue qr_loss(double y, const QuantileEstimates& estimates,
                  const QuantileLevels& levels) {
  if (estimates.values.size() != levels.levels.size())
    throw std::invalid_argument("qr_loss: estimates/levels length mismatch");
  const int n = estimates.n();
  LossValue out;
  out.grad.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = estimates.values[i];
    const double tau = levels.levels[i];
    out.value += pinball(y, t, tau);
    out.grad[i] = pinball_grad(y, t, tau);
  }
  return out;
}

double qr_loss_batch(const Eigen::Ref<const Vec>& y,
                     const Eigen::Ref<const Mat>& t,
                     const QuantileLevels& levels, Mat& grad_t) {
  if (y.size() != t.rows() || t.cols() != levels.levels.size())
    throw std::invalid_argument("qr_loss_batch: shape mismatch");
  grad_t.resize(t.rows(), t.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < t.cols(); ++j) {
    const double tau = levels.levels[j];
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      const double diff = y[i] - t(i, j);
      if (diff >= 0.0) {
        total += tau * diff;
        grad_t(i, j) = -tau;
      } else {
        total += (tau - 1.0) * diff;
        grad_t(i, j) = 1.0 - tau;
      }
    }
  }
  return total;
}

ScalarLoss bce_baseline(double r, double logit) {
  if (!(r >= 0.0 && r <= 1.0))
    throw std::invalid_argument("bce_baseline: r must lie in [0,1]");
  const double value =
      std::max(logit, 0.0) - logit * r + std::log1p(std::exp(-std::abs(logit)));
  const double sig = 1.0 / (1.0 + std::exp(-logit));
  return ScalarLoss{value, sig - r};
}

ScalarLoss mse_baseline(double y, double pred) {
  const double d = pred - y;
  return ScalarLoss{d * d, 2.0 * d};
}

}  // namespace cqe
