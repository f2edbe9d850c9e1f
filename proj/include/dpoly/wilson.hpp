#pragma once

// The Wilson statistic Phi(eta) = sum_x sin(pi x / L) h_x(eta), where h_x is
// the first coordinate of eta_x.  The weights are the principal Dirichlet
// eigenfunction of the averaging Laplacian on {0..L}, so Phi is an exact
// eigenfunction of the generator with eigenvalue -kappa_L.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "dpoly/errors.hpp"
#include "dpoly/generator.hpp"
#include "dpoly/path.hpp"
#include "dpoly/state_space.hpp"

namespace dpoly {

class WilsonStatistic {
 public:
  explicit WilsonStatistic(int L) : L_(L), g_(static_cast<std::size_t>(L) + 1, 0.0) {
    require_shape(L, 1);
    kappa_ = 1.0 - std::cos(std::numbers::pi / L);
    for (int x = 1; x < L; ++x) g_[static_cast<std::size_t>(x)] = std::sin(std::numbers::pi * x / L);
  }

  int length() const noexcept { return L_; }
  double kappa() const noexcept { return kappa_; }
  /// g_0..g_L, with g_0 = g_L = 0.
  const std::vector<double>& weights() const noexcept { return g_; }

  double operator()(std::span<const Code> z, int d) const {
    if (static_cast<int>(z.size()) != L_) throw DomainError("path length does not match statistic");
    double phi = 0.0;
    int h = 0;
    for (int x = 1; x < L_; ++x) {
      const Code c = z[static_cast<std::size_t>(x - 1)];
      if (axis_of(c, d) == 0) h += sign_of(c, d);
      phi += g_[static_cast<std::size_t>(x)] * h;
    }
    return phi;
  }

  double operator()(const PolymerPath& p) const { return (*this)(p.increments(), p.dim()); }

  /// From first-coordinate heights h_0..h_L.
  double from_heights(std::span<const int> h) const {
    double phi = 0.0;
    for (int x = 1; x < L_; ++x) phi += g_[static_cast<std::size_t>(x)] * h[static_cast<std::size_t>(x)];
    return phi;
  }

  /// max_x |(Delta g)_x + kappa g_x| with (Delta g)_x = (g_{x+1} + g_{x-1})/2 - g_x.
  double laplacian_residual() const {
    double worst = 0.0;
    for (int x = 1; x < L_; ++x) {
      const auto i = static_cast<std::size_t>(x);
      const double lap = 0.5 * (g_[i + 1] + g_[i - 1]) - g_[i];
      worst = std::max(worst, std::abs(lap + kappa_ * g_[i]));
    }
    return worst;
  }

  /// Phi(eta*) for the extremal path.
  double phi_star() const { return (*this)(extremal_path(L_, 1)); }

 private:
  int L_;
  double kappa_;
  std::vector<double> g_;
};

inline StateFunction phi_vector(const StateIndex& index, const WilsonStatistic& stat) {
  StateFunction f(static_cast<Eigen::Index>(index.size()));
  std::vector<Code> z(static_cast<std::size_t>(index.length()));
  for (std::size_t i = 0; i < index.size(); ++i) {
    index.codes(i, z);
    f[static_cast<Eigen::Index>(i)] = stat(z, index.dim());
  }
  return f;
}

struct EigenfunctionReport {
  double kappa = 0.0;
  double max_residual = 0.0;
  std::size_t worst_state = 0;
};

/// max over states of |(L Phi)(eta) + kappa Phi(eta)|.
inline EigenfunctionReport eigenfunction_check(const StateIndex& index, const GeneratorMatrix& gen,
                                               const WilsonStatistic& stat) {
  const StateFunction phi = phi_vector(index, stat);
  const StateFunction r = gen.apply(phi) + stat.kappa() * phi;
  EigenfunctionReport out{stat.kappa(), 0.0, 0};
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (std::abs(r[i]) > out.max_residual) {
      out.max_residual = std::abs(r[i]);
      out.worst_state = static_cast<std::size_t>(i);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Variance control.
//
// A move at x changes only h_x, by delta_x, so
//   (L Phi^2 + 2 kappa Phi^2)(eta) = sum_x g_x^2 E_x[delta_x^2].
// E_x[delta_x^2] is at most 1 + 1/d (a (+e1, -e1) pair redrawn among 2d
// pairs), hence the right side is at most (1 + 1/d) L / 2 pointwise, and
// Var(Phi_t) <= (1 + 1/d) L / (4 kappa) for every start and time.

struct GeneratorInequalityReport {
  /// max over states of (L Phi^2 + 2 kappa Phi^2) / L
  double max_ratio = 0.0;
  /// (1 + 1/d) / 2
  double analytic_bound = 0.0;
  std::size_t worst_state = 0;
};

inline GeneratorInequalityReport generator_inequality(const StateIndex& index, const GeneratorMatrix& gen,
                                                      const WilsonStatistic& stat) {
  const StateFunction phi = phi_vector(index, stat);
  const StateFunction phi2 = phi.array().square();
  const StateFunction lhs = gen.apply(phi2) + 2.0 * stat.kappa() * phi2;
  GeneratorInequalityReport out;
  out.analytic_bound = 0.5 * (1.0 + 1.0 / index.dim());
  out.max_ratio = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < lhs.size(); ++i) {
    const double r = lhs[i] / index.length();
    if (r > out.max_ratio) {
      out.max_ratio = r;
      out.worst_state = static_cast<std::size_t>(i);
    }
  }
  return out;
}

/// C0 with Var(Phi_t) <= C0 L^3 from the pointwise bound above.
inline double analytic_variance_constant(int L, int d) {
  const WilsonStatistic stat(L);
  return (1.0 + 1.0 / d) / (4.0 * stat.kappa() * static_cast<double>(L) * L);
}

// ---------------------------------------------------------------------------
// Lower bound on the mixing time.

struct LowerBoundReport {
  int L = 0;
  int d = 0;
  double kappa = 0.0;
  double phi_star = 0.0;
  double C0 = 0.0;
  double eps = 0.0;
  /// Threshold sqrt(L^3 / eps) of the distinguishing event {Phi >= a}.
  double threshold = 0.0;
  double T_lb = 0.0;
};

/// eps = 1/(4 C0); T solves e^{-kappa T} Phi(eta*) = 2 sqrt(L^3/eps), clamped
/// at 0 when L is too small for the argument to apply.
inline LowerBoundReport lower_bound_time(int L, int d, double C0) {
  require_shape(L, d);
  if (!(C0 > 0.0)) throw DomainError("C0 must be positive");
  const WilsonStatistic stat(L);
  LowerBoundReport r;
  r.L = L;
  r.d = d;
  r.kappa = stat.kappa();
  r.phi_star = stat.phi_star();
  r.C0 = C0;
  r.eps = 1.0 / (4.0 * C0);
  const double L3 = std::pow(static_cast<double>(L), 3);
  r.threshold = std::sqrt(L3 / r.eps);
  const double log_arg = std::log(std::sqrt(r.eps) * r.phi_star / (2.0 * std::sqrt(L3)));
  r.T_lb = log_arg > 0.0 ? log_arg / r.kappa : 0.0;
  return r;
}

}  // namespace dpoly
