#pragma once

// Monte Carlo checks of the Wilson statistic: the exponential drift
// E[Phi_t] = e^{-kappa t} Phi_0 and the variance bound Var(Phi_t) <= C0 L^3.

#include <cmath>
#include <vector>

#include "dpoly/simulate.hpp"
#include "dpoly/stats.hpp"
#include "dpoly/wilson.hpp"

namespace dpoly {

struct DriftPoint {
  double t = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double expected = 0.0;
  /// (mean - expected) / std_error, 0 when the sample is deterministic
  double z = 0.0;
};

struct DriftReport {
  double kappa = 0.0;
  double phi0 = 0.0;
  std::vector<DriftPoint> points;
  double max_abs_z = 0.0;
  /// Weighted least-squares slope of -log(mean) against t.
  double fitted_rate = 0.0;
  double rate_ratio = 0.0;
};

/// Records must share the start and the sample times.
inline DriftReport drift_check(const std::vector<TrajectoryRecord>& recs, const WilsonStatistic& stat) {
  if (recs.empty() || recs.front().samples.empty()) throw DomainError("no samples");
  DriftReport r;
  r.kappa = stat.kappa();
  r.phi0 = recs.front().samples.front().phi;
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  for (std::size_t k = 0; k < recs.front().samples.size(); ++k) {
    const auto v = phi_at(recs, k);
    const auto m = mean_estimate(v);
    DriftPoint p;
    p.t = recs.front().samples[k].t;
    p.mean = m.mean;
    p.std_error = m.std_error;
    p.expected = std::exp(-r.kappa * p.t) * r.phi0;
    p.z = m.std_error > 0.0 ? (m.mean - p.expected) / m.std_error : (m.mean == p.expected ? 0.0 : INFINITY);
    r.max_abs_z = std::max(r.max_abs_z, std::abs(p.z));
    r.points.push_back(p);
    // log-mean regression where the mean is resolved; weight by the
    // inverse variance of log(mean), (mean / se)^2
    if (m.mean > 5.0 * m.std_error && m.mean > 0.0) {
      const double y = std::log(m.mean);
      const double w = m.std_error > 0.0 ? (m.mean / m.std_error) * (m.mean / m.std_error) : 1e12;
      sw += w;
      swx += w * p.t;
      swy += w * y;
      swxx += w * p.t * p.t;
      swxy += w * p.t * y;
    }
  }
  const double det = sw * swxx - swx * swx;
  r.fitted_rate = det > 0.0 ? -(sw * swxy - swx * swy) / det : 0.0;
  r.rate_ratio = r.fitted_rate / r.kappa;
  return r;
}

struct VariancePoint {
  double t = 0.0;
  double variance = 0.0;
  Interval ci;
};

struct VarianceReport {
  int L = 0;
  std::vector<VariancePoint> points;
  /// max_t Var(Phi_t) / L^3 and the upper end of its 95% interval
  double sup_ratio = 0.0;
  double sup_ratio_upper = 0.0;
  double initial_variance = 0.0;
};

inline VarianceReport variance_check(const std::vector<TrajectoryRecord>& recs, int L, double confidence = 0.95) {
  if (recs.empty() || recs.front().samples.empty()) throw DomainError("no samples");
  VarianceReport r;
  r.L = L;
  const double L3 = std::pow(static_cast<double>(L), 3);
  for (std::size_t k = 0; k < recs.front().samples.size(); ++k) {
    const auto m = mean_estimate(phi_at(recs, k));
    VariancePoint p{recs.front().samples[k].t, m.variance, variance_interval(m.variance, m.n, confidence)};
    if (k == 0) r.initial_variance = m.variance;
    if (m.variance / L3 > r.sup_ratio) {
      r.sup_ratio = m.variance / L3;
      r.sup_ratio_upper = p.ci.upper / L3;
    }
    r.points.push_back(p);
  }
  return r;
}

}  // namespace dpoly
