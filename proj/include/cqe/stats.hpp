#pragma once
// Scalar probability helpers shared by the synthetic-data oracle and tests:
// normal CDF/quantile and the regularized lower incomplete gamma function.

namespace cqe {

// Standard normal CDF, accurate in both tails (erfc based).
double norm_cdf(double z);

// Inverse standard normal CDF; rational initial guess refined by Halley steps
// against norm_cdf. p in (0,1).
double norm_quantile(double p);

// Regularized lower incomplete gamma P(a, x); a > 0, x >= 0.
double gamma_p(double a, double x);

}  // namespace cqe
