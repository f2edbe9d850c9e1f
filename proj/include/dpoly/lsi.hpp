#pragma once

// Upper estimates of the log-Sobolev constant
//   alpha = inf_f E(sqrt f, sqrt f) / Ent(f)
// of a reversible chain with uniform invariant measure.
//
// f is parametrized as e^u / mu[e^u].  The ratio is minimized by L-BFGS
// from several starts.  Any f gives an upper bound on alpha, and so does the
// small-perturbation limit f = (1 + s phi)^2, s -> 0, whose ratio is
// E(phi, phi) / (2 Var phi); with phi the gap eigenvector this is gap / 2.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <ceres/ceres.h>

#include "dpoly/errors.hpp"
#include "dpoly/generator.hpp"
#include "dpoly/parallel.hpp"
#include "dpoly/spectral.hpp"

namespace dpoly {

namespace detail {

/// e^v (v - 1) + 1 >= 0, accurate for small v.
inline double entropy_density(double v) {
  if (std::abs(v) < 1e-3) {
    const double v2 = v * v;
    return v2 * (0.5 + v * (1.0 / 3.0 + v * (0.125 + v * (1.0 / 30.0 + v / 144.0))));
  }
  const double em1 = std::expm1(v);
  return v * em1 + v - em1;
}

}  // namespace detail

/// Value and gradient of R(u) = E(sqrt f, sqrt f) / Ent(f), f = e^u / mu[e^u].
class LogSobolevRatio {
 public:
  explicit LogSobolevRatio(const GeneratorMatrix& gen) : gen_(gen) {}

  std::size_t dim() const noexcept { return gen_.dim(); }

  /// Returns +inf when Ent(f) vanishes (u constant).
  double operator()(const Eigen::VectorXd& u, Eigen::VectorXd* grad = nullptr) const {
    const Eigen::Index n = u.size();
    const double N = static_cast<double>(n);
    // shift so that mu[e^v] = 1; the ratio is invariant under u -> u + c
    const double mx = u.maxCoeff();
    const double log_z = mx + std::log((u.array() - mx).exp().mean());
    const Eigen::ArrayXd v = u.array() - log_z;
    const Eigen::VectorXd w = (0.5 * v).exp().matrix();

    // E(w, w) edge by edge, differences through expm1
    double A = 0.0;
    const auto& M = gen_.matrix;
    for (Eigen::Index i = 0; i < M.outerSize(); ++i)
      for (SparseRowMatrix::InnerIterator it(M, i); it; ++it) {
        const Eigen::Index j = it.col();
        if (j <= i) continue;
        const double diff = w[i] * std::expm1(0.5 * (v[j] - v[i]));
        A += it.value() * diff * diff;
      }
    A /= N;

    double B = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) B += detail::entropy_density(v[i]);
    B /= N;
    if (!(B > 0.0)) return std::numeric_limits<double>::infinity();
    const double R = A / B;
    if (grad) {
      const Eigen::VectorXd Lw = gen_.apply(w);
      const Eigen::ArrayXd dA = -(Lw.array() * w.array()) / N;
      const Eigen::ArrayXd dB = (v.exp() * v) / N;
      *grad = ((dA - R * dB) / B).matrix();
    }
    return R;
  }

 private:
  const GeneratorMatrix& gen_;
};

/// E(phi, phi) / (2 Var phi).
inline double linearized_ratio(const GeneratorMatrix& gen, const Eigen::VectorXd& phi) {
  const Eigen::VectorXd c = phi.array() - phi.mean();
  const double var = c.squaredNorm() / static_cast<double>(c.size());
  return dirichlet_form(gen, c, c) / (2.0 * var);
}

struct LsiOptions {
  int restarts = 12;
  int max_iterations = 3000;
  std::uint64_t seed = 1;
  /// Additional starting points for u, tried before the random ones.
  std::vector<Eigen::VectorXd> warm_starts;
  /// Gap eigenvector; computed when absent.
  std::optional<Eigen::VectorXd> gap_vector;
  std::size_t max_states = 100'000;
};

struct LsiReport {
  /// Upper bound on alpha: the smallest ratio seen.
  double alpha_est = 0.0;
  /// "optimizer" or "linearized"
  std::string witness;
  double linearized = 0.0;
  double gap = 0.0;
  int restarts = 0;
  int failed_restarts = 0;
  int best_restart = -1;
  /// u of the best optimizer run (f = e^u / mu[e^u]).
  Eigen::VectorXd minimizer;
  double optimizer_best = std::numeric_limits<double>::infinity();
};

namespace detail {

class CeresRatio : public ceres::FirstOrderFunction {
 public:
  explicit CeresRatio(const LogSobolevRatio& r) : r_(r) {}
  bool Evaluate(const double* x, double* cost, double* gradient) const override {
    const Eigen::Map<const Eigen::VectorXd> u(x, static_cast<Eigen::Index>(r_.dim()));
    Eigen::VectorXd g;
    const double val = r_(u, gradient ? &g : nullptr);
    if (!std::isfinite(val)) return false;
    cost[0] = val;
    if (gradient) std::copy(g.data(), g.data() + g.size(), gradient);
    return true;
  }
  int NumParameters() const override { return static_cast<int>(r_.dim()); }

 private:
  const LogSobolevRatio& r_;
};

/// L-BFGS from u0; returns the final ratio (inf on failure) and updates u0.
inline double minimize_ratio(const LogSobolevRatio& ratio, Eigen::VectorXd& u, int max_iterations) {
  if (!std::isfinite(ratio(u))) return std::numeric_limits<double>::infinity();
  ceres::GradientProblem problem(new CeresRatio(ratio));
  ceres::GradientProblemSolver::Options opt;
  opt.line_search_direction_type = ceres::LBFGS;
  opt.max_num_iterations = max_iterations;
  opt.function_tolerance = 1e-13;
  opt.gradient_tolerance = 1e-14;
  opt.parameter_tolerance = 1e-14;
  opt.logging_type = ceres::SILENT;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(opt, problem, u.data(), &summary);
  const double val = ratio(u);
  return std::isfinite(val) ? val : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Starts: warm starts, then random Gaussians, perturbed indicators and
/// scaled gap eigenvectors in rotation.
inline LsiReport lsi_constant_estimate(const GeneratorMatrix& gen, const LsiOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(gen.dim());
  if (gen.dim() > opt.max_states) throw CapacityError("state space too large for the log-Sobolev optimizer");
  if (n < 2) throw DomainError("log-Sobolev constant needs at least two states");
  LsiReport rep;
  Eigen::VectorXd phi;
  if (opt.gap_vector) {
    phi = *opt.gap_vector;
    rep.gap = 2.0 * linearized_ratio(gen, phi);
  } else {
    const GapResult g = spectral_gap(gen);
    phi = g.eigenvector;
    rep.gap = g.gap;
  }
  rep.linearized = linearized_ratio(gen, phi);

  std::vector<Eigen::VectorXd> starts(opt.warm_starts.begin(), opt.warm_starts.end());
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  const double phi_scale = 1.0 / std::max(phi.cwiseAbs().maxCoeff(), 1e-300);
  for (int k = 0; k < opt.restarts; ++k) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    switch (k % 4) {
      case 0:
        for (Eigen::Index i = 0; i < n; ++i) u[i] = (k % 8 == 0 ? 1.0 : 3.0) * normal(rng);
        break;
      case 1: {
        // indicator of a few states, lifted by a random height, plus noise
        const int m = 1 + static_cast<int>(rng() % 3);
        const double height = 2.0 + 8.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        for (int j = 0; j < m; ++j) u[pick(rng)] = height;
        for (Eigen::Index i = 0; i < n; ++i) u[i] += 0.05 * normal(rng);
        break;
      }
      case 2:
        u = (k % 8 == 2 ? 0.5 : 3.0) * phi_scale * phi;
        break;
      default:
        u = -(k % 8 == 3 ? 1.0 : 6.0) * phi_scale * phi;
        for (Eigen::Index i = 0; i < n; ++i) u[i] += 0.01 * normal(rng);
        break;
    }
    starts.push_back(std::move(u));
  }

  const LogSobolevRatio ratio(gen);
  std::vector<double> values(starts.size());
  parallel_for(starts.size(), [&](std::size_t k) { values[k] = detail::minimize_ratio(ratio, starts[k], opt.max_iterations); });

  rep.restarts = static_cast<int>(starts.size());
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (!std::isfinite(values[k])) {
      ++rep.failed_restarts;
      continue;
    }
    if (values[k] < rep.optimizer_best) {
      rep.optimizer_best = values[k];
      rep.best_restart = static_cast<int>(k);
      rep.minimizer = starts[k];
    }
  }
  if (rep.failed_restarts == rep.restarts) throw NonConvergenceError("every log-Sobolev restart failed");
  if (rep.optimizer_best < rep.linearized) {
    rep.alpha_est = rep.optimizer_best;
    rep.witness = "optimizer";
  } else {
    rep.alpha_est = rep.linearized;
    rep.witness = "linearized";
  }
  return rep;
}

struct MixingBoundCheck {
  double t_mix = 0.0;
  double log_inv_pi_min = 0.0;
  /// (4 + log log(1/pi_*)) / (2 alpha_est)
  double bound = 0.0;
  /// T_mix <= bound.  alpha_est is an upper bound on alpha, so the
  /// computed bound is not guaranteed to dominate; this is a soft flag.
  bool holds = false;
};

inline MixingBoundCheck mixing_bound_check(double t_mix, std::size_t states, double alpha_est) {
  MixingBoundCheck c;
  c.t_mix = t_mix;
  c.log_inv_pi_min = std::log(static_cast<double>(states));
  c.bound = (4.0 + std::log(c.log_inv_pi_min)) / (2.0 * alpha_est);
  c.holds = t_mix <= c.bound;
  return c;
}

}  // namespace dpoly
