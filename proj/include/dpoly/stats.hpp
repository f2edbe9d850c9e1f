#pragma once

// Sample statistics and confidence intervals used by the Monte Carlo checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace dpoly {

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

struct MeanEstimate {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased sample variance
  double std_error = 0.0;
  std::size_t n = 0;
};

inline MeanEstimate mean_estimate(std::span<const double> xs) {
  MeanEstimate e;
  e.n = xs.size();
  if (e.n == 0) return e;
  // Welford
  double m = 0.0, s = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double delta = x - m;
    m += delta / static_cast<double>(k);
    s += delta * (x - m);
  }
  e.mean = m;
  e.variance = e.n > 1 ? s / static_cast<double>(e.n - 1) : 0.0;
  e.std_error = std::sqrt(e.variance / static_cast<double>(e.n));
  return e;
}

/// Standard error of the mean of a correlated series from nonoverlapping
/// batch means.
inline double batch_means_std_error(std::span<const double> xs, std::size_t batches = 50) {
  batches = std::min(batches, xs.size());
  if (batches < 2) return std::numeric_limits<double>::infinity();
  const std::size_t len = xs.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += xs[i];
    means[b] = s / static_cast<double>(len);
  }
  return mean_estimate(means).std_error;
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Wilson score interval for a binomial proportion; `confidence` is two-sided.
inline Interval wilson_interval(std::size_t successes, std::size_t n, double confidence) {
  if (n == 0) return {0.0, 1.0};
  const double z = normal_quantile(0.5 + 0.5 * confidence);
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double nn = static_cast<double>(n);
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Chi-square interval for a normal-population variance.
inline Interval variance_interval(double sample_variance, std::size_t n, double confidence) {
  if (n < 2) return {0.0, std::numeric_limits<double>::infinity()};
  const boost::math::chi_squared_distribution<double> chi(static_cast<double>(n - 1));
  const double a = 0.5 * (1.0 - confidence);
  const double k = static_cast<double>(n - 1) * sample_variance;
  return {k / boost::math::quantile(chi, 1.0 - a), k / boost::math::quantile(chi, a)};
}

}  // namespace dpoly
