#pragma once

#include <span>

namespace qvpn {

double mean(std::span<const double> xs);

/// Pearson product-moment coefficient. Throws ValidationError on length mismatch,
/// fewer than two points or zero variance in either input.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// One-sample Kolmogorov-Smirnov statistic against Uniform(lo, hi).
double ks_statistic_uniform(std::span<const double> samples, double lo, double hi);

/// Asymptotic critical value c(alpha) / sqrt(n) of the one-sample KS test.
double ks_critical_value(double alpha, std::size_t n);

}  // namespace qvpn
