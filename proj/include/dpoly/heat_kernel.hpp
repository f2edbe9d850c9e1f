#pragma once

// Heat kernel p_t = e^{tL} by uniformization, total variation to the
// uniform measure, and the mixing time T_mix = inf{t : max TV <= 1/4}.
//
// With P = I + L / Lambda (a stochastic matrix when Lambda bounds every exit
// rate), e^{tL} = sum_k Pois(Lambda t; k) P^k.  Long times are split into
// substeps so that the Poisson weights never underflow.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpoly/errors.hpp"
#include "dpoly/generator.hpp"
#include "dpoly/state_space.hpp"

namespace dpoly {

struct UniformizationOptions {
  /// Bound on the total truncated Poisson mass over a whole propagation.
  double tolerance = 1e-10;
  /// Largest Poisson mean Lambda * dt in one substep.
  double max_substep_mean = 200.0;
};

namespace detail {

/// Poisson(lambda) weights up to the first k whose remaining tail is below
/// tol.  The tail after k is bounded by w_{k+1} / (1 - lambda / (k + 2)).
inline std::vector<double> poisson_weights(double lambda, double tol) {
  std::vector<double> w{std::exp(-lambda)};
  if (lambda == 0.0) return w;
  const std::size_t cap = static_cast<std::size_t>(lambda + 40.0 * std::sqrt(lambda) + 200.0);
  for (std::size_t k = 0; k < cap; ++k) {
    const double next = w.back() * lambda / static_cast<double>(k + 1);
    const double ratio = lambda / static_cast<double>(k + 2);
    if (ratio < 1.0 && next / (1.0 - ratio) < tol) return w;
    w.push_back(next);
  }
  throw NonConvergenceError("Poisson truncation budget exceeded for mean " + std::to_string(lambda));
}

}  // namespace detail

/// Columns of X are mapped to e^{tL} X.  L is symmetric, so a point mass at
/// sigma is sent to the row p_t(sigma, .).
inline Eigen::MatrixXd propagate(const GeneratorMatrix& gen, Eigen::MatrixXd X, double t,
                                 const UniformizationOptions& opt = {}) {
  if (t < 0.0) throw DomainError("time must be nonnegative");
  if (t == 0.0) return X;
  const double rate = gen.max_rate;
  const double mean = rate * t;
  const int substeps = std::max(1, static_cast<int>(std::ceil(mean / opt.max_substep_mean)));
  const double tol = std::max(opt.tolerance / substeps, 1e-15);
  const auto w = detail::poisson_weights(mean / substeps, tol);

  Eigen::MatrixXd power(X.rows(), X.cols()), acc(X.rows(), X.cols());
  for (int s = 0; s < substeps; ++s) {
    power = X;
    acc = w[0] * power;
    for (std::size_t k = 1; k < w.size(); ++k) {
      power += (gen.matrix * power) / rate;
      acc += w[k] * power;
    }
    X.swap(acc);
  }
  return X;
}

inline Eigen::VectorXd heat_kernel_row(const GeneratorMatrix& gen, std::size_t sigma, double t,
                                       const UniformizationOptions& opt = {}) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gen.dim()), 1);
  x(static_cast<Eigen::Index>(sigma), 0) = 1.0;
  return propagate(gen, std::move(x), t, opt).col(0);
}

/// ||p - uniform||_TV.
inline double tv_to_uniform(const Eigen::Ref<const Eigen::VectorXd>& p) {
  const double u = 1.0 / static_cast<double>(p.size());
  return 0.5 * (p.array() - u).abs().sum();
}

inline double tv_from(const GeneratorMatrix& gen, std::size_t sigma, double t,
                      const UniformizationOptions& opt = {}) {
  return tv_to_uniform(heat_kernel_row(gen, sigma, t, opt));
}

// ---------------------------------------------------------------------------
// Mixing time.

struct MixingTimeOptions {
  double threshold = 0.25;
  double relative_tolerance = 1e-3;
  /// Exact worst-start maximization up to this many states.
  std::size_t exact_limit = 10'000;
  UniformizationOptions uniformization{};
};

struct MixingTime {
  /// Upper end of the final bisection bracket: TV(t_mix) <= threshold.
  double t_mix = 0.0;
  /// Lower end: TV(t_lower) > threshold.
  double t_lower = 0.0;
  /// True when only a declared candidate set of starts was examined.
  bool lower_bound_only = false;
  std::size_t worst_start = 0;
  std::size_t starts_examined = 0;
};

/// Bisection on t -> max_j TV(p_t(start_j, .)), which is nonincreasing for a
/// reversible chain.  The state at the lower bracket is stored so that each
/// step only propagates over the bracket width.
inline MixingTime mixing_time_from(const GeneratorMatrix& gen, const std::vector<std::size_t>& starts,
                                   const MixingTimeOptions& opt = {}) {
  if (starts.empty()) throw DomainError("no starting states");
  const auto n = static_cast<Eigen::Index>(gen.dim());
  Eigen::MatrixXd lo = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(starts.size()));
  for (std::size_t j = 0; j < starts.size(); ++j) lo(static_cast<Eigen::Index>(starts[j]), static_cast<Eigen::Index>(j)) = 1.0;

  auto worst = [&](const Eigen::MatrixXd& P, std::size_t* arg) {
    double best = -1.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      const double tv = tv_to_uniform(P.col(j));
      if (tv > best) {
        best = tv;
        if (arg) *arg = starts[static_cast<std::size_t>(j)];
      }
    }
    return best;
  };

  MixingTime r;
  r.starts_examined = starts.size();
  worst(lo, &r.worst_start);
  double t_lo = 0.0;
  double t_hi = 0.5 / std::max(gen.max_rate, 1.0);
  Eigen::MatrixXd hi = propagate(gen, lo, t_hi, opt.uniformization);
  for (std::size_t guard = 0; worst(hi, nullptr) > opt.threshold; ++guard) {
    if (guard > 200) throw NonConvergenceError("total variation does not reach the threshold");
    worst(hi, &r.worst_start);
    lo = hi;
    const double step = t_hi - t_lo;
    t_lo = t_hi;
    t_hi += 2.0 * step + (step == 0.0 ? 1.0 : 0.0);
    hi = propagate(gen, lo, t_hi - t_lo, opt.uniformization);
  }
  while (t_hi - t_lo > opt.relative_tolerance * t_hi) {
    const double mid = 0.5 * (t_lo + t_hi);
    Eigen::MatrixXd pm = propagate(gen, lo, mid - t_lo, opt.uniformization);
    if (worst(pm, nullptr) > opt.threshold) {
      worst(pm, &r.worst_start);
      lo.swap(pm);
      t_lo = mid;
    } else {
      t_hi = mid;
    }
  }
  r.t_mix = t_hi;
  r.t_lower = t_lo;
  return r;
}

/// Worst-case mixing time.  Up to exact_limit states every symmetry orbit
/// representative is a start (TV is constant on orbits); beyond that only
/// the extremal path is used and the result is flagged lower-bound-only.
/// The images of the extremal path under axis permutations are symmetric
/// to it and share its TV curve, so one representative covers them.
inline MixingTime exact_mixing_time(const StateIndex& index, const GeneratorMatrix& gen,
                                    const MixingTimeOptions& opt = {}) {
  std::vector<std::size_t> starts;
  bool partial = false;
  if (index.size() <= opt.exact_limit) {
    starts = symmetry_orbits(index).representatives;
  } else {
    starts.push_back(index.rank(extremal_path(index.length(), index.dim())));
    partial = true;
  }
  MixingTime r = mixing_time_from(gen, starts, opt);
  r.lower_bound_only = partial;
  return r;
}

}  // namespace dpoly
