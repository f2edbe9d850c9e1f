#pragma once

// Small numerical helpers shared across modules.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace dpoly {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// log(sum_i exp(x_i)) with max shift and compensated accumulation.
inline double log_sum_exp(std::span<const double> xs) {
  double mx = kNegInf;
  for (double x : xs) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  CompensatedSum s;
  for (double x : xs)
    if (x != kNegInf) s.add(std::exp(x - mx));
  return mx + std::log(s.value());
}

/// log n! for n = 0..n_max.
inline std::vector<double> log_factorials(int n_max) {
  std::vector<double> lf(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) lf[static_cast<std::size_t>(n)] = std::lgamma(n + 1.0);
  return lf;
}

}  // namespace dpoly
