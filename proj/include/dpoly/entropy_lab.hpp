#pragma once

// Conditioning on particle counts and the numeric probes built on it:
// the entropy chain rule across levels, the chi normalization and Laplace
// transform bound, and empirical constants of the entropy recursion.
//
// Level k conditions on (N_1, ..., N_k); level 0 is the uniform measure
// itself.  Since sum_j N_j = L/2, level d - 1 and level d coincide.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "dpoly/errors.hpp"
#include "dpoly/generator.hpp"
#include "dpoly/numeric.hpp"
#include "dpoly/particle_law.hpp"
#include "dpoly/state_space.hpp"
#include "dpoly/wilson.hpp"

namespace dpoly {

class ConditioningLevels {
 public:
  explicit ConditioningLevels(const StateIndex& index) : d_(index.dim()) {
    const std::size_t n = index.size();
    group_.assign(static_cast<std::size_t>(d_) + 1, std::vector<std::size_t>(n, 0));
    sizes_.resize(static_cast<std::size_t>(d_) + 1);
    std::vector<Code> z(static_cast<std::size_t>(index.length()));
    for (int k = 0; k <= d_; ++k) {
      std::map<std::vector<int>, std::size_t> ids;
      auto& g = group_[static_cast<std::size_t>(k)];
      for (std::size_t s = 0; s < n; ++s) {
        index.codes(s, z);
        auto counts = particle_counts(z, d_).counts;
        counts.resize(static_cast<std::size_t>(k));
        g[s] = ids.emplace(std::move(counts), ids.size()).first->second;
      }
      auto& sz = sizes_[static_cast<std::size_t>(k)];
      sz.assign(ids.size(), 0);
      for (std::size_t s = 0; s < n; ++s) ++sz[g[s]];
    }
  }

  int dim() const noexcept { return d_; }
  std::size_t groups(int k) const { return sizes_.at(static_cast<std::size_t>(k)).size(); }

  /// mu^{(k)}(f), as a function on states.
  StateFunction mean(const StateFunction& f, int k) const {
    check(k);
    const auto& g = group_[static_cast<std::size_t>(k)];
    const auto& sz = sizes_[static_cast<std::size_t>(k)];
    std::vector<CompensatedSum> acc(sz.size());
    for (Eigen::Index s = 0; s < f.size(); ++s) acc[g[static_cast<std::size_t>(s)]].add(f[s]);
    StateFunction out(f.size());
    for (Eigen::Index s = 0; s < f.size(); ++s) {
      const std::size_t id = g[static_cast<std::size_t>(s)];
      out[s] = acc[id].value() / static_cast<double>(sz[id]);
    }
    return out;
  }

  /// Ent_k(f) = mu^{(k)}(f log f) - mu^{(k)}(f) log mu^{(k)}(f).
  StateFunction entropy(const StateFunction& f, int k) const {
    StateFunction flogf(f.size());
    for (Eigen::Index s = 0; s < f.size(); ++s) {
      if (!(f[s] >= 0.0)) throw DomainError("conditional entropy needs a nonnegative function");
      flogf[s] = f[s] > 0.0 ? f[s] * std::log(f[s]) : 0.0;
    }
    const StateFunction m = mean(f, k);
    StateFunction out = mean(flogf, k);
    for (Eigen::Index s = 0; s < f.size(); ++s)
      if (m[s] > 0.0) out[s] -= m[s] * std::log(m[s]);
    return out;
  }

 private:
  void check(int k) const {
    if (k < 0 || k > d_) throw DomainError("conditioning level out of range");
  }

  int d_;
  std::vector<std::vector<std::size_t>> group_;
  std::vector<std::vector<std::size_t>> sizes_;
};

// ---------------------------------------------------------------------------
// Chain rule Ent_i(f) = Ent_i(mu^{(i+1)} f) + mu^{(i)}[Ent_{i+1}(f)].

struct DecompositionReport {
  int i = 0;
  /// mu[Ent_i(f)]
  double entropy = 0.0;
  double coarse = 0.0;  ///< mu[Ent_i(mu^{(i+1)} f)]
  double fine = 0.0;    ///< mu[Ent_{i+1}(f)]
  /// max over states of |Ent_i(f) - Ent_i(mu^{(i+1)} f) - mu^{(i)} Ent_{i+1}(f)|
  double max_residual = 0.0;
  /// max over states of |Ent_{d-1}(mu^{(d)} f)|
  double top_level = 0.0;
};

inline DecompositionReport entropy_decomposition_check(const ConditioningLevels& levels, const StateFunction& f,
                                                       int i) {
  const int d = levels.dim();
  if (i < 0 || i > d - 1) throw DomainError("level i must lie in 0..d-1");
  DecompositionReport r;
  r.i = i;
  const StateFunction ent = levels.entropy(f, i);
  const StateFunction coarse = levels.entropy(levels.mean(f, i + 1), i);
  const StateFunction fine = levels.mean(levels.entropy(f, i + 1), i);
  r.entropy = ent.mean();
  r.coarse = coarse.mean();
  r.fine = fine.mean();
  r.max_residual = (ent - coarse - fine).cwiseAbs().maxCoeff();
  r.top_level = levels.entropy(levels.mean(f, d), d - 1).cwiseAbs().maxCoeff();
  return r;
}

// ---------------------------------------------------------------------------
// chi and the Laplace transform bound.
//
// Fix level i and write L' = L_{i+1} for the number of sites carrying types
// i+1..d once N_1..N_i are fixed.  Conditionally on level i these types
// form a uniform closed path of length L' in d - i directions, so N_{i+1}
// has law gamma = count_distribution(L', d - i).  Under
// nu = mu^{(i)}( . | N_{i+1} = n - 1) the remaining d - i - 1 types fill
// L' - 2(n - 1) sites, and
//   chi = gamma(n-1) / ((d-i-1) n^2 gamma(n)) sum_{j >= i+2} N_j^2.

struct ChiLaplaceReport {
  int L_sub = 0;  ///< L_{i+1}
  int d = 0;
  int i = 0;
  int n = 0;
  /// chi is identically 1 (i = d - 2)
  bool deterministic = false;
  double nu_chi = 0.0;            ///< nu(chi)
  double nu_n2 = 0.0;             ///< nu(N_{i+2}^2) from the reduced law
  double nu_n2_identity = 0.0;    ///< n^2 gamma(n) / gamma(n-1)
  double sigma2 = 0.0;            ///< Var_nu(N_{i+2})
  double delta = 0.0;             ///< Delta(n, L_{i+1})
  std::vector<double> t_grid;
  std::vector<double> log_laplace;  ///< log nu(e^{tY}) on the grid
  double sup_ratio = 0.0;           ///< sup_t log nu(e^{tY}) / (t^2 Delta)
};

inline ChiLaplaceReport chi_laplace_probe(int L_sub, int d, int i, int n, const std::vector<double>& t_grid) {
  require_shape(L_sub, d);
  if (i < 0 || i > d - 2) throw DomainError("level i must lie in 0..d-2");
  if (n < 1 || n > L_sub / 2) throw DomainError("n must lie in 1..L_{i+1}/2");
  ChiLaplaceReport r;
  r.L_sub = L_sub;
  r.d = d;
  r.i = i;
  r.n = n;
  r.t_grid = t_grid;
  const int types = d - i;  // types i+1..d
  const auto gamma = count_distribution(L_sub, types);
  r.delta = delta_factor(gamma, n);
  const double log_norm = gamma.log_weight(n - 1) - 2.0 * std::log(static_cast<double>(n)) - gamma.log_weight(n);
  r.nu_n2_identity = std::exp(-log_norm);

  const int rest = L_sub - 2 * (n - 1);  // sites of types i+2..d
  if (types - 1 == 1) {
    // a single remaining type: N_{i+2} = rest / 2 deterministically
    r.deterministic = true;
    const double N = rest / 2.0;
    r.nu_n2 = N * N;
    r.nu_chi = std::exp(log_norm) * r.nu_n2;
    r.log_laplace.assign(t_grid.size(), 0.0);
    return r;
  }
  const auto nu = count_distribution(rest, types - 1);
  r.nu_n2 = nu.expect([](double k) { return k * k; });
  r.nu_chi = std::exp(log_norm) * r.nu_n2;
  const double mean = nu.mean();
  r.sigma2 = nu.expect([mean](double k) { return (k - mean) * (k - mean); });

  std::vector<double> terms(static_cast<std::size_t>(nu.max_count()) + 1);
  for (double t : t_grid) {
    for (int k = 0; k <= nu.max_count(); ++k) {
      const double y = ((k - mean) * (k - mean) - r.sigma2) / r.nu_n2;
      terms[static_cast<std::size_t>(k)] = nu.log_weight(k) + t * y;
    }
    const double lap = log_sum_exp(terms);
    r.log_laplace.push_back(lap);
    if (t != 0.0) r.sup_ratio = std::max(r.sup_ratio, lap / (t * t * r.delta));
  }
  return r;
}

struct LaplaceSupReport {
  int L_sub = 0;
  int d = 0;
  int i = 0;
  /// sup over n and the grid of log nu(e^{tY}) / (t^2 Delta)
  double sup_ratio = 0.0;
  int argmax_n = 0;
  double argmax_t_delta = 0.0;  ///< t Delta at the maximum
};

/// The bound is nontrivial for |t| up to order 1/Delta, so the grid is given
/// in units of 1/Delta(n, L_sub) and rescaled for each n.
inline LaplaceSupReport laplace_sup(int L_sub, int d, int i, const std::vector<double>& t_delta_grid) {
  LaplaceSupReport r;
  r.L_sub = L_sub;
  r.d = d;
  r.i = i;
  const auto gamma = count_distribution(L_sub, d - i);
  for (int n = 1; n <= L_sub / 2; ++n) {
    const double delta = delta_factor(gamma, n);
    std::vector<double> ts;
    ts.reserve(t_delta_grid.size());
    for (double s : t_delta_grid) ts.push_back(s / delta);
    const auto p = chi_laplace_probe(L_sub, d, i, n, ts);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      if (ts[k] == 0.0 || p.deterministic) continue;
      const double v = p.log_laplace[k] / (ts[k] * ts[k] * p.delta);
      if (v > r.sup_ratio) {
        r.sup_ratio = v;
        r.argmax_n = n;
        r.argmax_t_delta = t_delta_grid[k];
      }
    }
  }
  return r;
}

/// +-s for s geometric from lo to hi with the given ratio.
inline std::vector<double> symmetric_geometric_grid(double lo, double hi, double ratio) {
  std::vector<double> g;
  for (double s = lo; s <= hi * (1 + 1e-12); s *= ratio) {
    g.push_back(s);
    g.push_back(-s);
  }
  return g;
}

/// chi evaluated literally, pair by pair, averaged over the enumerated
/// states with N_{i+1} = n - 1 and N_1..N_i equal to `fixed` (so that
/// L_{i+1} = L - 2 sum(fixed)).  Returns nu(chi).
inline double chi_by_enumeration(const StateIndex& index, int i, int n, const std::vector<int>& fixed) {
  const int d = index.dim(), L = index.length();
  if (static_cast<int>(fixed.size()) != i) throw DomainError("need N_1..N_i");
  int used = 0;
  for (int v : fixed) used += v;
  const int L_sub = L - 2 * used;
  const auto gamma = count_distribution(L_sub, d - i);
  const double c = std::exp(gamma.log_weight(n - 1) - gamma.log_weight(n)) / (2.0 * (d - i - 1) * n * n);
  std::vector<Code> z(static_cast<std::size_t>(L));
  CompensatedSum acc;
  std::size_t count = 0;
  for (std::size_t s = 0; s < index.size(); ++s) {
    index.codes(s, z);
    const auto N = particle_counts(z, d).counts;
    bool match = N[static_cast<std::size_t>(i)] == n - 1;
    for (int k = 0; k < i && match; ++k) match = N[static_cast<std::size_t>(k)] == fixed[static_cast<std::size_t>(k)];
    if (!match) continue;
    ++count;
    // ell ranges over +-e_j for j = i+2..d; count pairs u, v with
    // zeta_u = -zeta_v = e_ell
    double pairs = 0.0;
    for (int j = i + 1; j < d; ++j)
      for (Code ell : {static_cast<Code>(j), negate(static_cast<Code>(j), d)}) {
        long plus = 0, minus = 0;
        for (Code x : z) {
          plus += x == ell;
          minus += x == negate(ell, d);
        }
        pairs += static_cast<double>(plus * minus);
      }
    acc.add(c * pairs);
  }
  if (count == 0) throw DomainError("no states with the requested counts");
  return acc.value() / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Empirical constants of the entropy recursion.

struct RecursionProbeReport {
  int L = 0;
  int d = 0;
  std::size_t samples = 0;
  std::size_t skipped = 0;
  /// per level i = 0..d-1: max of mu(Ent_i(mu^{(i+1)} f)) / (L^2 E(sqrt f, sqrt f) + mu(Ent_{i+1} f))
  std::vector<double> level_ratio;
  /// max of mu(Ent_d f) / (L^2 E(sqrt f, sqrt f))
  double top_ratio = 0.0;
};

/// Random positive f from several families: iid log-normal values,
/// functions of the counts, and exponentials of height functionals.
inline RecursionProbeReport recursion_constant_probe(const StateIndex& index, const GeneratorMatrix& gen,
                                                     std::size_t samples, std::uint64_t seed) {
  const int L = index.length(), d = index.dim();
  const ConditioningLevels levels(index);
  const WilsonStatistic stat(L);
  const auto n = static_cast<Eigen::Index>(index.size());

  // per-state features
  std::vector<std::vector<int>> counts(index.size());
  StateFunction phi = phi_vector(index, stat);
  std::vector<Code> z(static_cast<std::size_t>(L));
  std::vector<std::vector<Point>> heights(index.size());
  for (std::size_t s = 0; s < index.size(); ++s) {
    index.codes(s, z);
    counts[s] = particle_counts(z, d).counts;
    heights[s] = integrate(d, z);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  RecursionProbeReport r;
  r.L = L;
  r.d = d;
  r.level_ratio.assign(static_cast<std::size_t>(d), 0.0);
  const double L2 = static_cast<double>(L) * L;
  StateFunction u(n);
  for (std::size_t k = 0; k < samples; ++k) {
    const double scale = std::exp(1.5 * normal(rng));
    switch (k % 4) {
      case 0:
        for (Eigen::Index s = 0; s < n; ++s) u[s] = normal(rng);
        break;
      case 1: {
        // smooth function of the count vector
        std::vector<double> a(static_cast<std::size_t>(d)), b(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) {
          a[static_cast<std::size_t>(j)] = normal(rng);
          b[static_cast<std::size_t>(j)] = normal(rng);
        }
        for (Eigen::Index s = 0; s < n; ++s) {
          double v = 0.0;
          for (int j = 0; j < d; ++j) {
            const double c = counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] / (L / 2.0);
            v += a[static_cast<std::size_t>(j)] * c + b[static_cast<std::size_t>(j)] * c * c;
          }
          u[s] = v;
        }
        break;
      }
      case 2:
        u = phi / std::max(phi.cwiseAbs().maxCoeff(), 1e-300) * normal(rng);
        break;
      default: {
        // random linear functional of all height coordinates
        std::vector<double> w(static_cast<std::size_t>((L + 1) * d));
        for (auto& x : w) x = normal(rng) / L;
        for (Eigen::Index s = 0; s < n; ++s) {
          double v = 0.0;
          const auto& h = heights[static_cast<std::size_t>(s)];
          for (int x = 0; x <= L; ++x)
            for (int j = 0; j < d; ++j) v += w[static_cast<std::size_t>(x * d + j)] * h[static_cast<std::size_t>(x)][static_cast<std::size_t>(j)];
          u[s] = v;
        }
        break;
      }
    }
    u *= scale;
    const StateFunction f = (u.array() - u.maxCoeff()).exp().matrix();
    const StateFunction sq = f.cwiseSqrt();
    const double energy = L2 * dirichlet_form(gen, sq, sq);
    if (!(energy > 1e-300)) {
      ++r.skipped;
      continue;
    }
    ++r.samples;
    for (int i = 0; i < d; ++i) {
      const double num = levels.entropy(levels.mean(f, i + 1), i).mean();
      const double den = energy + levels.entropy(f, i + 1).mean();
      r.level_ratio[static_cast<std::size_t>(i)] = std::max(r.level_ratio[static_cast<std::size_t>(i)], num / den);
    }
    r.top_ratio = std::max(r.top_ratio, levels.entropy(f, d).mean() / energy);
  }
  return r;
}

}  // namespace dpoly
