#include "qvpn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qvpn/errors.hpp"

namespace qvpn {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ValidationError("pearson: inputs differ in length");
  if (xs.size() < 2) throw ValidationError("pearson: need at least two points");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw ValidationError("pearson: degenerate variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double ks_statistic_uniform(std::span<const double> samples, double lo, double hi) {
  if (samples.empty() || !(hi > lo)) throw ValidationError("ks: invalid sample or range");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = std::clamp((sorted[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0) || n == 0) throw ValidationError("ks: invalid alpha or n");
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

}  // namespace qvpn
