#include "cqe/head.hpp"

namespace cqe {

QuantileLevels make_levels(int n) {
  if (n < 1) throw std::invalid_argument("make_levels: n must be >= 1");
  Vec lv(n);
  for (int i = 0; i < n; ++i) lv[i] = static_cast<double>(i + 1) / (n + 1);
  return QuantileLevels{std::move(lv)};
}

QuantileEstimates head_forward(const Eigen::Ref<const Vec>& d_raw) {
  const Eigen::Index n = d_raw.size();
  Vec t(n);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += std::max(d_raw[i], 0.0);
    t[i] = acc;
  }
  return QuantileEstimates{std::move(t)};
}

Vec head_backward(const Eigen::Ref<const Vec>& d_raw,
                  const Eigen::Ref<const Vec>& grad_t) {
  if (d_raw.size() != grad_t.size())
    throw std::invalid_argument("head_backward: size mismatch");
  const Eigen::Index n = d_raw.size();
  Vec g(n);
  double acc = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    acc += grad_t[i];
    g[i] = d_raw[i] > 0.0 ? acc : 0.0;
  }
  return g;
}

Mat head_forward_batch(const Eigen::Ref<const Mat>& d_raw) {
  Mat t = d_raw.cwiseMax(0.0);
  for (Eigen::Index j = 1; j < t.cols(); ++j) t.col(j) += t.col(j - 1);
  return t;
}

Mat head_backward_batch(const Eigen::Ref<const Mat>& d_raw,
                        const Eigen::Ref<const Mat>& grad_t) {
  if (d_raw.rows() != grad_t.rows() || d_raw.cols() != grad_t.cols())
    throw std::invalid_argument("head_backward_batch: shape mismatch");
  Mat g = grad_t;
  for (Eigen::Index j = g.cols() - 2; j >= 0; --j) g.col(j) += g.col(j + 1);
  return (d_raw.array() > 0.0).select(g, 0.0);
}

}  // namespace cqe
