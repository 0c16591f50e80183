#ifndef DML_STATS_HPP
#define DML_STATS_HPP

#include <functional>
#include <span>
#include <vector>

namespace dml {

/// Standard Gaussian CDF.
double normal_cdf(double x);

/// Standard Gaussian density.
double normal_pdf(double x);

/// Inverse standard Gaussian CDF, accurate to ~1e-15 (rational initial guess
/// refined by Newton steps on erfc). p must lie strictly in (0, 1).
double normal_quantile(double p);

/// Logistic link 1 / (1 + exp(-t)).
double logistic(double t);

/// Mean of `values` computed over a sorted copy. The result depends only on
/// the multiset of values, not on their order, which keeps estimates
/// bit-identical under row permutations.
double stable_mean(std::span<const double> values);

/// Sample standard deviation (divisor n-1), order-independent like stable_mean.
double sample_sd(std::span<const double> values);

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

} // namespace dml

#endif
