#include "cqe/inference.hpp"

#include <doctest.h>

#include <cmath>

using namespace cqe;

namespace {

QuantileEstimates est_of(std::initializer_list<double> vals) {
  Vec v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return QuantileEstimates{std::move(v)};
}

}  // namespace

TEST_CASE("quantile_at interpolation and clamping") {
  const QuantileLevels lv = make_levels(3);  // 0.25, 0.5, 0.75
  const QuantileEstimates est = est_of({1.0, 2.0, 4.0});

  // Grid hits are exact.
  CHECK(quantile_at(est, lv, 0.25) == 1.0);
  CHECK(quantile_at(est, lv, 0.5) == 2.0);
  CHECK(quantile_at(est, lv, 0.75) == 4.0);

  CHECK(quantile_at(est, lv, 0.625) == doctest::Approx(3.0));

  // Outside the grid: clamp to the end estimates.
  CHECK(quantile_at(est, lv, 0.01) == 1.0);
  CHECK(quantile_at(est, lv, 0.99) == 4.0);

  CHECK_THROWS_AS(quantile_at(est, lv, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(quantile_at(est, lv, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(quantile_at(est, make_levels(2), 0.5), std::invalid_argument);
}

TEST_CASE("cse is the low-quantile lookup") {
  const QuantileLevels lv = make_levels(3);
  const QuantileEstimates est = est_of({1.0, 2.0, 4.0});
  CHECK(cse(est, lv, 0.25) == 1.0);  // grid hit at the first level

  const QuantileEstimates flat = est_of({3.5, 3.5, 3.5});
  for (double tau : {0.05, 0.2, 0.25, 0.3, 0.6, 0.95})
    CHECK(cse(flat, lv, tau) == doctest::Approx(3.5));

  // Off-grid tau_low (the N=100 grid has no 0.25 level) interpolates.
  const QuantileLevels lv100 = make_levels(100);
  Vec ramp(100);
  for (int i = 0; i < 100; ++i) ramp[i] = static_cast<double>(i);
  const double q = cse(QuantileEstimates{ramp}, lv100, 0.25);
  CHECK(q > ramp[24]);
  CHECK(q < ramp[25]);
}

TEST_CASE("dqc blends the two quantiles") {
  // Levels 0.25 and 0.7 carry values 2 and 10.
  QuantileLevels lv{(Vec(2) << 0.25, 0.7).finished()};
  const QuantileEstimates est = est_of({2.0, 10.0});

  CHECK(dqc(est, lv, 0.25, 0.7, 1.0) == cse(est, lv, 0.25));
  CHECK(dqc(est, lv, 0.25, 0.7, 0.0) == quantile_at(est, lv, 0.7));
  CHECK(dqc(est, lv, 0.25, 0.7, 0.3) == doctest::Approx(7.6));

  CHECK_THROWS_AS(dqc(est, lv, 0.25, 0.7, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(dqc(est, lv, 0.25, 0.7, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(dqc(est, lv, 0.7, 0.25, 0.5), std::invalid_argument);
}

TEST_CASE("cde closed-form cases") {
  CHECK(cde(est_of({5.0})) == 5.0);
  CHECK(cde(est_of({1.0, 3.0})) == 2.0);  // exact
  for (int n : {1, 3, 10, 99}) {
    const QuantileEstimates flat{Vec::Constant(n, 7.5)};
    CHECK(cde(flat) == doctest::Approx(7.5).epsilon(1e-14));
  }
  CHECK_THROWS_AS(cde(QuantileEstimates{Vec()}), std::invalid_argument);
}

TEST_CASE("strategies are monotone in the estimates and bounded") {
  Rng rng(81);
  const QuantileLevels lv = make_levels(7);
  for (int trial = 0; trial < 200; ++trial) {
    Vec inc(7), bump(7);
    double acc = 0.0;
    for (int i = 0; i < 7; ++i) {
      acc += rng.uniform(0.0, 2.0);
      inc[i] = acc;
      bump[i] = rng.uniform(0.0, 1.0);
    }
    // b dominates a elementwise and both are non-decreasing.
    Vec b = inc;
    double extra = 0.0;
    for (int i = 0; i < 7; ++i) {
      extra += bump[i];
      b[i] += extra;
    }
    const QuantileEstimates ea{inc}, eb{b};

    StrategyConfig cfg;
    for (StrategyKind kind : {StrategyKind::cse, StrategyKind::dqc, StrategyKind::cde}) {
      cfg.kind = kind;
      CHECK(apply_strategy(eb, lv, cfg) >= apply_strategy(ea, lv, cfg) - 1e-12);
    }

    CHECK(cde(ea) >= ea.values[0] - 1e-12);
    CHECK(cde(ea) <= ea.values[6] + 1e-12);

    const double low = quantile_at(ea, lv, cfg.tau_low);
    const double high = quantile_at(ea, lv, cfg.tau_high);
    const double mid = dqc(ea, lv, cfg.tau_low, cfg.tau_high, rng.uniform());
    CHECK(mid >= std::min(low, high) - 1e-12);
    CHECK(mid <= std::max(low, high) + 1e-12);
  }
}

TEST_CASE("dqc is linear in k") {
  Rng rng(82);
  const QuantileLevels lv = make_levels(9);
  for (int trial = 0; trial < 50; ++trial) {
    Vec v(9);
    double acc = 0.0;
    for (int i = 0; i < 9; ++i) {
      acc += rng.uniform(0.0, 3.0);
      v[i] = acc;
    }
    const QuantileEstimates est{v};
    const double a = dqc(est, lv, 0.2, 0.8, 0.2);
    const double m = dqc(est, lv, 0.2, 0.8, 0.5);
    const double b = dqc(est, lv, 0.2, 0.8, 0.8);
    CHECK(m == doctest::Approx(0.5 * (a + b)).epsilon(1e-12));
  }
}

TEST_CASE("cde converges to the true mean as the grid refines") {
  // Uniform(2, 10): quantile a + (b-a)tau, mean 6. The trapezoid rule is
  // exact on a linear quantile function.
  auto uniform_q = [](double tau) { return 2.0 + 8.0 * tau; };
  // Exponential(lambda=0.5): quantile -ln(1-tau)/lambda, mean 2.
  auto expo_q = [](double tau) { return -std::log(1.0 - tau) / 0.5; };

  double prev_uniform = std::numeric_limits<double>::infinity();
  double prev_expo = std::numeric_limits<double>::infinity();
  double last_expo = 0.0;
  for (int n : {9, 99, 499}) {
    const QuantileLevels lv = make_levels(n);
    Vec u(n), e(n);
    for (int i = 0; i < n; ++i) {
      u[i] = uniform_q(lv.levels[i]);
      e[i] = expo_q(lv.levels[i]);
    }
    const double err_u = std::abs(cde(QuantileEstimates{u}) - 6.0);
    const double err_e = std::abs(cde(QuantileEstimates{e}) - 2.0);
    CHECK(err_u <= prev_uniform + 1e-12);
    CHECK(err_e <= prev_expo + 1e-12);
    prev_uniform = err_u;
    prev_expo = err_e;
    last_expo = err_e;
  }
  CHECK(prev_uniform < 1e-12);
  CHECK(last_expo < 0.05);
}

TEST_CASE("strategy kind parsing") {
  CHECK(parse_strategy_kind("cse") == StrategyKind::cse);
  CHECK(parse_strategy_kind("dqc") == StrategyKind::dqc);
  CHECK(parse_strategy_kind("cde") == StrategyKind::cde);
  CHECK_THROWS_AS(parse_strategy_kind("mean"), std::invalid_argument);

  StrategyConfig cfg;
  cfg.kind = StrategyKind::dqc;
  cfg.tau_low = 0.8;
  cfg.tau_high = 0.3;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}
