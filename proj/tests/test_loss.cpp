#include "cqe/loss.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace cqe;

TEST_CASE("pinball direct evaluations") {
  CHECK(pinball(2.0, 1.0, 0.5) == doctest::Approx(0.5));
  CHECK(pinball(1.0, 2.0, 0.25) == doctest::Approx(0.75));
  for (double tau : {0.1, 0.5, 0.9}) CHECK(pinball(3.3, 3.3, tau) == 0.0);
  CHECK_THROWS_AS(pinball(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pinball(1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(pinball(1.0, 1.0, -0.2), std::invalid_argument);
}

TEST_CASE("pinball_grad branches and kink convention") {
  CHECK(pinball_grad(2.0, 1.0, 0.3) == doctest::Approx(-0.3));
  CHECK(pinball_grad(1.0, 2.0, 0.3) == doctest::Approx(0.7));
  // The y == t kink resolves on the y >= t branch.
  CHECK(pinball_grad(5.0, 5.0, 0.9) == doctest::Approx(-0.9));
}

TEST_CASE("qr_loss aggregates pinball over levels") {
  QuantileLevels lv1 = make_levels(1);
  QuantileEstimates est1{Vec::Constant(1, 1.0)};
  const LossValue l1 = qr_loss(2.0, est1, lv1);
  CHECK(l1.value == doctest::Approx(0.5));
  CHECK(l1.grad[0] == doctest::Approx(-0.5));

  // tau = (1/3, 2/3), t = (1, 3), y = 2: (1/3)(2-1) + (1-2/3)(3-2) = 2/3.
  QuantileLevels lv2 = make_levels(2);
  Vec t2(2);
  t2 << 1.0, 3.0;
  const LossValue l2 = qr_loss(2.0, QuantileEstimates{t2}, lv2);
  CHECK(l2.value == doctest::Approx(2.0 / 3.0));

  Vec t3 = Vec::Constant(4, 7.0);
  CHECK(qr_loss(7.0, QuantileEstimates{t3}, make_levels(4)).value == 0.0);

  CHECK_THROWS_AS(qr_loss(1.0, QuantileEstimates{t3}, lv2), std::invalid_argument);
}

TEST_CASE("qr_loss_batch matches scalar path") {
  Rng rng(12);
  const QuantileLevels lv = make_levels(5);
  Mat t(6, 5);
  Vec y(6);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(0.0, 10.0);
  for (Eigen::Index i = 0; i < 6; ++i) y[i] = rng.uniform(0.0, 10.0);
  Mat grad;
  const double total = qr_loss_batch(y, t, lv, grad);
  double expected = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i) {
    const LossValue row = qr_loss(y[i], QuantileEstimates{t.row(i).transpose()}, lv);
    expected += row.value;
    CHECK(grad.row(i).transpose() == row.grad);
  }
  CHECK(total == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("bce baseline values and gradient") {
  CHECK(bce_baseline(1.0, 40.0).value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bce_baseline(0.5, 0.0).value == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(bce_baseline(1.5, 0.0), std::invalid_argument);

  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const double r = rng.uniform();
    const double z = rng.uniform(-6.0, 6.0);
    const ScalarLoss l = bce_baseline(r, z);
    const double h = 1e-6;
    const double numeric = (bce_baseline(r, z + h).value - bce_baseline(r, z - h).value) / (2.0 * h);
    CHECK(l.grad == doctest::Approx(numeric).epsilon(1e-5));
    const double sig = 1.0 / (1.0 + std::exp(-z));
    CHECK(l.grad == doctest::Approx(sig - r).epsilon(1e-12));
  }
}

TEST_CASE("mse baseline") {
  CHECK(mse_baseline(4.2, 4.2).value == 0.0);
  const ScalarLoss l = mse_baseline(1.0, 3.0);
  CHECK(l.value == doctest::Approx(4.0));
  CHECK(l.grad == doctest::Approx(4.0));
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const double y = rng.uniform(-5.0, 5.0), p = rng.uniform(-5.0, 5.0);
    const double h = 1e-6;
    const double numeric = (mse_baseline(y, p + h).value - mse_baseline(y, p - h).value) / (2.0 * h);
    CHECK(mse_baseline(y, p).grad == doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("empirical pinball minimizer is the sample quantile") {
  Rng rng(2024);
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t n = trial % 2 == 0 ? 101 : 501;
    std::vector<double> y(n);
    for (double& v : y) v = rng.uniform() < 0.3 ? rng.normal() * 2.0 : 5.0 + rng.normal();
    std::vector<double> sorted = y;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front(), hi = sorted.back();
    const double range = hi - lo;

    for (double tau : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      // Brute-force grid minimizer of the empirical pinball loss.
      const double step = 0.5e-3 * range;
      double best_t = lo, best_loss = std::numeric_limits<double>::infinity();
      for (double t = lo; t <= hi; t += step) {
        double loss = 0.0;
        for (double v : y) loss += pinball(v, t, tau);
        if (loss < best_loss) {
          best_loss = loss;
          best_t = t;
        }
      }
      // n*tau is never an integer here, so the minimizer is the unique
      // ceil(n*tau)-th order statistic.
      const std::size_t rank = static_cast<std::size_t>(
          std::ceil(static_cast<double>(n) * tau));
      const double sample_q = sorted[rank - 1];
      CHECK(std::abs(best_t - sample_q) <= 1e-3 * range);
    }
  }
}

TEST_CASE("qr_loss is convex in the estimates") {
  Rng rng(55);
  const QuantileLevels lv = make_levels(6);
  for (int trial = 0; trial < 200; ++trial) {
    const double y = rng.uniform(-3.0, 8.0);
    Vec a(6), b(6);
    for (int i = 0; i < 6; ++i) {
      a[i] = rng.uniform(-2.0, 9.0);
      b[i] = rng.uniform(-2.0, 9.0);
    }
    const Vec mid = 0.5 * (a + b);
    const double lm = qr_loss(y, QuantileEstimates{mid}, lv).value;
    const double la = qr_loss(y, QuantileEstimates{a}, lv).value;
    const double lb = qr_loss(y, QuantileEstimates{b}, lv).value;
    CHECK(lm <= 0.5 * (la + lb) + 1e-12);
  }
}

TEST_CASE("qr_loss gradient matches finite differences away from kinks") {
  Rng rng(66);
  const QuantileLevels lv = make_levels(4);
  for (int trial = 0; trial < 50; ++trial) {
    const double y = rng.uniform(0.0, 10.0);
    Vec t(4);
    for (int i = 0; i < 4; ++i) {
      t[i] = rng.uniform(0.0, 10.0);
      if (std::abs(t[i] - y) < 1e-3) t[i] += 2e-3;  // stay clear of the kink
    }
    const LossValue l = qr_loss(y, QuantileEstimates{t}, lv);
    const double h = 1e-6;
    for (int i = 0; i < 4; ++i) {
      Vec tp = t, tm = t;
      tp[i] += h;
      tm[i] -= h;
      const double numeric = (qr_loss(y, QuantileEstimates{tp}, lv).value -
                              qr_loss(y, QuantileEstimates{tm}, lv).value) /
                             (2.0 * h);
      CHECK(l.grad[i] == doctest::Approx(numeric).epsilon(1e-7));
    }
  }
}
