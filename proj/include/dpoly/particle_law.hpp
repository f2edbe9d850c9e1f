#pragma once

// Exact combinatorics of particle counts under the uniform measure on
// closed paths: partition function, random-walk return probabilities, the
// law of N_1, the Conv(c, nbar) checker, and moment/ratio bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dpoly/errors.hpp"
#include "dpoly/numeric.hpp"

namespace dpoly {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

namespace detail {

inline void require_even(int L) {
  if (L < 0 || L % 2 != 0) throw DomainError("L must be a nonnegative even integer");
}

inline BigInt big_factorial(int n) {
  BigInt f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

inline BigInt to_big(unsigned __int128 v) {
  BigInt hi = static_cast<std::uint64_t>(v >> 64);
  return (hi << 64) + static_cast<std::uint64_t>(v);
}

/// Closed-walk dynamic program on the box [-L/2, L/2]^d.  With T integral
/// and step_weight 1 it counts walks; with T = double and step_weight
/// 1/(2d) it returns the return probability.
template <class T>
T closed_walk_dp(int L, int d, const T& step_weight) {
  const int R = L / 2;
  const int side = 2 * R + 1;
  std::size_t cells = 1;
  for (int a = 0; a < d; ++a) {
    cells *= static_cast<std::size_t>(side);
    if (cells > 50'000'000) throw CapacityError("random-walk dynamic program exceeds memory budget");
  }
  std::vector<std::size_t> stride(static_cast<std::size_t>(d));
  stride[0] = 1;
  for (int a = 1; a < d; ++a) stride[a] = stride[a - 1] * static_cast<std::size_t>(side);
  std::size_t origin = 0;
  for (int a = 0; a < d; ++a) origin += static_cast<std::size_t>(R) * stride[a];

  std::vector<T> cur(cells, T(0)), next(cells, T(0));
  cur[origin] = T(1);
  std::vector<int> coord(static_cast<std::size_t>(d));
  for (int k = 0; k < L; ++k) {
    // positions reachable after k+1 steps and able to return in L-k-1 steps
    const int r = std::min(k + 1, L - k - 1);
    std::fill(next.begin(), next.end(), T(0));
    std::fill(coord.begin(), coord.end(), -r);
    while (true) {
      std::size_t idx = 0;
      for (int a = 0; a < d; ++a) idx += static_cast<std::size_t>(coord[a] + R) * stride[a];
      T acc(0);
      for (int a = 0; a < d; ++a) {
        if (coord[a] > -R) acc += cur[idx - stride[a]];
        if (coord[a] < R) acc += cur[idx + stride[a]];
      }
      next[idx] = acc * step_weight;
      int a = 0;
      while (a < d && ++coord[a] > r) coord[a++] = -r;
      if (a == d) break;
    }
    std::swap(cur, next);
  }
  return cur[origin];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Random-walk return probability and partition function.

/// p_L: probability that simple random walk on Z^d is back at the origin
/// after L steps, by convolution of L single steps.
inline double srw_return_probability(int L, int d) {
  detail::require_even(L);
  if (d < 1) throw DomainError("d must be positive");
  return detail::closed_walk_dp<double>(L, d, 1.0 / (2.0 * d));
}

inline double log_srw_return_probability(int L, int d) {
  return std::log(srw_return_probability(L, d));
}

/// Number of closed L-step walks on Z^d, counted by the same convolution
/// in exact integer arithmetic.  Equals (2d)^L p_L.
inline BigInt closed_walk_count(int L, int d) {
  detail::require_even(L);
  if (d < 1) throw DomainError("d must be positive");
  if (static_cast<double>(L) * std::log2(2.0 * d) < 126.0)
    return detail::to_big(detail::closed_walk_dp<unsigned __int128>(L, d, 1));
  return detail::closed_walk_dp<BigInt>(L, d, BigInt(1));
}

/// Z_L^d by the multinomial-squared sum over (n_1..n_d), sum n_j = L/2.
inline BigInt partition_function_multinomial(int L, int d) {
  detail::require_even(L);
  if (d < 1) throw DomainError("d must be positive");
  const int half = L / 2;
  std::vector<BigInt> fact(static_cast<std::size_t>(L) + 1);
  fact[0] = 1;
  for (int k = 1; k <= L; ++k) fact[k] = fact[k - 1] * k;

  BigInt total = 0;
  std::vector<int> n(static_cast<std::size_t>(d), 0);
  // enumerate compositions of `half` into d nonnegative parts
  auto recurse = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == d - 1) {
      n[pos] = remaining;
      BigInt denom = 1;
      for (int v : n) denom *= fact[v] * fact[v];
      total += fact[L] / denom;
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      n[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  recurse(recurse, 0, half);
  return total;
}

struct PartitionFunction {
  BigInt multinomial;  ///< multinomial-squared sum
  BigInt random_walk;  ///< (2d)^L p_L by walk counting
};

/// Both exact routes; throws ConsistencyError if they disagree.
inline PartitionFunction partition_function(int L, int d) {
  PartitionFunction z{partition_function_multinomial(L, d), closed_walk_count(L, d)};
  if (z.multinomial != z.random_walk)
    throw ConsistencyError("partition function routes disagree at L=" + std::to_string(L) +
                           ", d=" + std::to_string(d));
  return z;
}

/// log Z_m^k for every even m <= L_max and every k <= d, by the recursion
/// Z_m^k = sum_j m!/((j!)^2 (m-2j)!) Z_{m-2j}^{k-1}, Z_0^0 = 1.
class LogPartitionTable {
 public:
  LogPartitionTable(int L_max, int d) : L_max_(L_max), d_(d), lf_(log_factorials(L_max)) {
    detail::require_even(L_max);
    if (d < 0) throw DomainError("d must be nonnegative");
    const std::size_t half = static_cast<std::size_t>(L_max / 2) + 1;
    table_.assign(static_cast<std::size_t>(d) + 1, std::vector<double>(half, kNegInf));
    table_[0][0] = 0.0;
    std::vector<double> terms;
    for (int k = 1; k <= d; ++k) {
      for (int m = 0; m <= L_max; m += 2) {
        terms.clear();
        for (int j = 0; 2 * j <= m; ++j) {
          const double prev = table_[k - 1][static_cast<std::size_t>((m - 2 * j) / 2)];
          if (prev == kNegInf) continue;
          terms.push_back(multinomial_log(m, j) + prev);
        }
        table_[k][static_cast<std::size_t>(m / 2)] = log_sum_exp(terms);
      }
    }
  }

  /// log Z_m^k.
  double operator()(int m, int k) const {
    if (m < 0 || m > L_max_ || m % 2 != 0 || k < 0 || k > d_)
      throw DomainError("partition table lookup out of range");
    return table_[static_cast<std::size_t>(k)][static_cast<std::size_t>(m / 2)];
  }

  /// log of L!/((j!)^2 (L-2j)!): choices of j particle and j anti-particle
  /// positions of one type.
  double multinomial_log(int m, int j) const {
    return lf_[static_cast<std::size_t>(m)] - 2.0 * lf_[static_cast<std::size_t>(j)] -
           lf_[static_cast<std::size_t>(m - 2 * j)];
  }

  int max_length() const noexcept { return L_max_; }
  int dim() const noexcept { return d_; }

 private:
  int L_max_;
  int d_;
  std::vector<double> lf_;
  std::vector<std::vector<double>> table_;
};

inline double log_partition_function(int L, int d) { return LogPartitionTable(L, d)(L, d); }

// ---------------------------------------------------------------------------
// Law of N_1.

/// gamma(n) = mu(N_1 = n), n = 0..L/2, stored as log-weights.
class CountDistribution {
 public:
  CountDistribution(int L, int d, std::vector<double> log_weights)
      : L_(L), d_(d), logw_(std::move(log_weights)) {}

  int length() const noexcept { return L_; }
  int dim() const noexcept { return d_; }
  int max_count() const noexcept { return L_ / 2; }
  /// nbar = L/(2d), kept real.
  double center() const noexcept { return static_cast<double>(L_) / (2.0 * d_); }

  const std::vector<double>& log_weights() const noexcept { return logw_; }
  double log_weight(int n) const {
    if (n < 0 || n > L_ / 2) return kNegInf;
    return logw_[static_cast<std::size_t>(n)];
  }
  double weight(int n) const { return std::exp(log_weight(n)); }

  /// E[g(N)] for a callable g.
  template <class F>
  double expect(F&& g) const {
    CompensatedSum s;
    for (int n = 0; n <= L_ / 2; ++n) {
      const double lw = logw_[static_cast<std::size_t>(n)];
      if (lw != kNegInf) s.add(std::exp(lw) * g(static_cast<double>(n)));
    }
    return s.value();
  }

  double total_mass() const {
    return expect([](double) { return 1.0; });
  }
  double mean() const {
    return expect([](double n) { return n; });
  }
  double variance() const {
    const double m = mean();
    return expect([m](double n) { return (n - m) * (n - m); });
  }

 private:
  int L_;
  int d_;
  std::vector<double> logw_;
};

inline CountDistribution count_distribution(const LogPartitionTable& table, int L, int d) {
  detail::require_even(L);
  if (d < 1) throw DomainError("d must be positive");
  if (L > table.max_length() || d > table.dim()) throw DomainError("partition table too small");
  const double log_z = table(L, d);
  std::vector<double> logw(static_cast<std::size_t>(L / 2) + 1, kNegInf);
  for (int k = 0; 2 * k <= L; ++k) {
    const double rest = table(L - 2 * k, d - 1);
    if (rest == kNegInf) continue;
    logw[static_cast<std::size_t>(k)] = table.multinomial_log(L, k) + rest - log_z;
  }
  return CountDistribution(L, d, std::move(logw));
}

inline CountDistribution count_distribution(int L, int d) {
  detail::require_even(L);
  if (d < 1) throw DomainError("d must be positive");
  return count_distribution(LogPartitionTable(L, d), L, d);
}

/// Exact rational gamma(0..L/2); intended for L <= 64.
inline std::vector<Rational> count_distribution_exact(int L, int d) {
  detail::require_even(L);
  if (d < 1) throw DomainError("d must be positive");
  if (L > 64) throw CapacityError("exact rational mode is limited to L <= 64");
  const BigInt z = partition_function_multinomial(L, d);
  std::vector<Rational> gamma(static_cast<std::size_t>(L / 2) + 1);
  for (int k = 0; 2 * k <= L; ++k) {
    const int rest_len = L - 2 * k;
    BigInt rest;
    if (d == 1)
      rest = rest_len == 0 ? 1 : 0;
    else
      rest = partition_function_multinomial(rest_len, d - 1);
    const BigInt ways = detail::big_factorial(L) /
                        (detail::big_factorial(k) * detail::big_factorial(k) * detail::big_factorial(rest_len));
    gamma[static_cast<std::size_t>(k)] = Rational(ways * rest, z);
  }
  return gamma;
}

// ---------------------------------------------------------------------------
// Conv(c, nbar).

struct ConvReport {
  int L = 0;
  int d = 0;
  double c = 0.0;       ///< constant the margins were evaluated at
  double nbar = 0.0;
  int n_min = 0;
  int n_max = 0;
  // log-scale margins; a condition holds when its margin is >= 0
  double support_margin = 0.0;     ///< c^-1 nbar <= n_max - nbar <= c nbar, same for nbar - n_min
  double decay_up_margin = 0.0;    ///< ratio decay above nbar
  double decay_down_margin = 0.0;  ///< mirrored decay below nbar
  double envelope_lower_margin = 0.0;
  double envelope_upper_margin = 0.0;
  bool holds = false;
  std::optional<double> c_found;   ///< minimal c on the search grid, if any
};

namespace detail {

inline ConvReport conv_margins(const CountDistribution& g, double c) {
  ConvReport r;
  r.L = g.length();
  r.d = g.dim();
  r.c = c;
  r.nbar = g.center();
  r.n_min = 0;
  r.n_max = g.max_count();
  const double nbar = r.nbar;
  const double lc = std::log(c);

  auto two_sided = [&](double span) {
    if (span <= 0.0) return kNegInf;
    const double ls = std::log(span);
    return std::min(ls - (std::log(nbar) - lc), (lc + std::log(nbar)) - ls);
  };
  r.support_margin = std::min(two_sided(r.n_max - nbar), two_sided(nbar - r.n_min));

  double up = std::numeric_limits<double>::infinity();
  double down = std::numeric_limits<double>::infinity();
  double env_lo = std::numeric_limits<double>::infinity();
  double env_hi = std::numeric_limits<double>::infinity();
  for (int n = r.n_min; n <= r.n_max; ++n) {
    const double lg = g.log_weight(n);
    if (n >= nbar && n + 1 <= r.n_max) {
      const double log_ratio = g.log_weight(n + 1) - lg;
      up = std::min(up, lc - (n - nbar) / (c * nbar) - log_ratio);
    }
    if (n <= nbar && n - 1 >= r.n_min) {
      const double log_ratio = g.log_weight(n - 1) - lg;
      down = std::min(down, lc - (nbar - n) / (c * nbar) - log_ratio);
    }
    const double dev2 = (nbar - n) * (nbar - n);
    const double lower = -lc - 0.5 * std::log(nbar) - c * dev2 / nbar;
    const double upper = lc - 0.5 * std::log(nbar) - dev2 / (c * nbar);
    env_lo = std::min(env_lo, lg - lower);
    env_hi = std::min(env_hi, upper - lg);
  }
  r.decay_up_margin = up;
  r.decay_down_margin = down;
  r.envelope_lower_margin = env_lo;
  r.envelope_upper_margin = env_hi;
  constexpr double slack = -1e-12;
  r.holds = r.support_margin >= slack && up >= slack && down >= slack && env_lo >= slack &&
            env_hi >= slack;
  return r;
}

}  // namespace detail

/// Minimal c with Conv(c, nbar): geometric grid 1, 1.25, ..., up to 2^10,
/// then bisection inside the first passing cell.  All conditions are
/// monotone in c.
inline std::optional<double> minimal_conv_constant(const CountDistribution& g) {
  double prev = 0.0;
  double c = 1.0;
  while (c <= 1024.0 * (1.0 + 1e-12)) {
    if (detail::conv_margins(g, c).holds) {
      if (prev == 0.0) return c;
      double lo = prev, hi = c;
      while (hi - lo > 1e-9 * hi) {
        const double mid = 0.5 * (lo + hi);
        (detail::conv_margins(g, mid).holds ? hi : lo) = mid;
      }
      return hi;
    }
    prev = c;
    c *= 1.25;
  }
  return std::nullopt;
}

/// Margins at the given c, plus the minimal c found by search.
inline ConvReport conv_condition_check(const CountDistribution& g, double c) {
  if (!(c > 0.0)) throw DomainError("Conv constant must be positive");
  ConvReport r = detail::conv_margins(g, c);
  r.c_found = minimal_conv_constant(g);
  return r;
}

// ---------------------------------------------------------------------------
// Moments and ratio bounds.

struct MomentReport {
  int L = 0;
  int d = 0;
  double sigma2 = 0.0;  ///< Var(N_1)
  double var_x = 0.0;   ///< Var((N_1 - L/2d)^2 - sigma^2)
  /// Smallest C with n^2/(C(L-2n)^2) <= gamma(n)/gamma(n+1) <= C n^2/(L-2n)^2
  /// over n = 1..L/2-1.
  double ratio_constant = 1.0;
  double sigma2_over_L = 0.0;
  double var_x_over_L2 = 0.0;
};

inline MomentReport moment_bounds(const CountDistribution& g) {
  MomentReport r;
  r.L = g.length();
  r.d = g.dim();
  const double nbar = g.center();
  r.sigma2 = g.expect([nbar](double n) { return (n - nbar) * (n - nbar); });
  const double m4 = g.expect([nbar](double n) { return std::pow(n - nbar, 4); });
  r.var_x = m4 - r.sigma2 * r.sigma2;
  r.sigma2_over_L = r.sigma2 / r.L;
  r.var_x_over_L2 = r.var_x / (static_cast<double>(r.L) * r.L);
  double worst = 0.0;  // log C
  for (int n = 1; n <= r.L / 2 - 1; ++n) {
    const double lw = g.log_weight(n), lw1 = g.log_weight(n + 1);
    if (lw == kNegInf || lw1 == kNegInf) continue;
    const double log_ratio = lw - lw1;
    const double log_shape = 2.0 * std::log(static_cast<double>(n)) - 2.0 * std::log(r.L - 2.0 * n);
    worst = std::max(worst, std::abs(log_ratio - log_shape));
  }
  r.ratio_constant = std::exp(worst);
  return r;
}

inline MomentReport moment_bounds(int L, int d) { return moment_bounds(count_distribution(L, d)); }

/// Single constant C valid across an L-grid for
/// L/C <= sigma^2 <= C L,  Var(X) <= C L^2  and the gamma ratio bounds.
inline double moment_grid_constant(const std::vector<int>& Ls, int d) {
  double C = 1.0;
  for (int L : Ls) {
    const MomentReport r = moment_bounds(L, d);
    C = std::max({C, r.sigma2_over_L, 1.0 / r.sigma2_over_L, r.var_x_over_L2, r.ratio_constant});
  }
  return C;
}

/// Delta(n, L_sub) = (1/L_sub) max(1, gamma(n-1)/gamma(n)) for the law
/// gamma of a system of size L_sub.
inline double delta_factor(const CountDistribution& g, int n) {
  if (n < 1 || n > g.max_count()) throw DomainError("n outside 1..L_sub/2");
  const double log_ratio = g.log_weight(n - 1) - g.log_weight(n);
  return std::exp(std::max(0.0, log_ratio)) / g.length();
}

}  // namespace dpoly
