#pragma once

// The interchange process on a graph with n vertices: labels sit on the
// vertices and each edge swaps its two labels at rate 1.  Painting the
// labels with colors projects it onto a multi-type exclusion process.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dpoly/errors.hpp"
#include "dpoly/generator.hpp"
#include "dpoly/lsi.hpp"
#include "dpoly/spectral.hpp"

namespace dpoly {

enum class Graph { segment, complete };

inline std::vector<std::pair<int, int>> graph_edges(int n, Graph g) {
  std::vector<std::pair<int, int>> e;
  if (g == Graph::segment) {
    for (int x = 0; x + 1 < n; ++x) e.emplace_back(x, x + 1);
  } else {
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y) e.emplace_back(x, y);
  }
  return e;
}

inline std::string graph_name(Graph g) { return g == Graph::segment ? "segment" : "complete"; }

// ---------------------------------------------------------------------------
// Permutations.  sigma[x] is the label at vertex x; states are indexed by
// the Lehmer code, which orders permutations lexicographically.

using Permutation = std::vector<int>;

inline constexpr int kMaxInterchangeSize = 8;

inline std::size_t factorial(int n) {
  std::size_t f = 1;
  for (int k = 2; k <= n; ++k) f *= static_cast<std::size_t>(k);
  return f;
}

inline std::size_t permutation_rank(const Permutation& sigma) {
  const int n = static_cast<int>(sigma.size());
  std::size_t r = 0;
  for (int x = 0; x < n; ++x) {
    int smaller = 0;
    for (int y = x + 1; y < n; ++y) smaller += sigma[static_cast<std::size_t>(y)] < sigma[static_cast<std::size_t>(x)];
    r = r * static_cast<std::size_t>(n - x) + static_cast<std::size_t>(smaller);
  }
  return r;
}

inline Permutation permutation_unrank(std::size_t r, int n) {
  std::vector<int> digits(static_cast<std::size_t>(n));
  for (int x = n - 1; x >= 0; --x) {
    const auto base = static_cast<std::size_t>(n - x);
    digits[static_cast<std::size_t>(x)] = static_cast<int>(r % base);
    r /= base;
  }
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  Permutation sigma(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    const auto it = pool.begin() + digits[static_cast<std::size_t>(x)];
    sigma[static_cast<std::size_t>(x)] = *it;
    pool.erase(it);
  }
  return sigma;
}

inline void require_interchange_size(int n) {
  if (n < 1) throw DomainError("n must be positive");
  if (n > kMaxInterchangeSize) throw CapacityError("interchange state space limited to n <= 8");
}

inline GeneratorMatrix build_interchange_generator(int n, Graph g) {
  require_interchange_size(n);
  const auto edges = graph_edges(n, g);
  const std::size_t N = factorial(n);
  GeneratorBuilder b(N, N * (edges.size() + 1));
  for (std::size_t r = 0; r < N; ++r) {
    Permutation s = permutation_unrank(r, n);
    for (auto [x, y] : edges) {
      std::swap(s[static_cast<std::size_t>(x)], s[static_cast<std::size_t>(y)]);
      b.add(permutation_rank(s), 1.0);
      std::swap(s[static_cast<std::size_t>(x)], s[static_cast<std::size_t>(y)]);
    }
    b.finish_row(r);
  }
  return b.finish(static_cast<double>(edges.size()));
}

// ---------------------------------------------------------------------------
// Colored words.  With counts (n_1..n_k), labels 0..n_1-1 get color 0, the
// next n_2 labels color 1, and so on.

class ColoredSpace {
 public:
  explicit ColoredSpace(std::vector<int> counts) : counts_(std::move(counts)) {
    n_ = 0;
    for (int c : counts_) {
      if (c < 0) throw DomainError("color counts must be nonnegative");
      n_ += c;
    }
    require_interchange_size(n_);
    std::vector<int> w;
    for (std::size_t c = 0; c < counts_.size(); ++c) w.insert(w.end(), static_cast<std::size_t>(counts_[c]), static_cast<int>(c));
    do words_.push_back(w);
    while (std::next_permutation(w.begin(), w.end()));
    label_color_.reserve(static_cast<std::size_t>(n_));
    for (std::size_t c = 0; c < counts_.size(); ++c) label_color_.insert(label_color_.end(), static_cast<std::size_t>(counts_[c]), static_cast<int>(c));
  }

  int n() const noexcept { return n_; }
  const std::vector<int>& counts() const noexcept { return counts_; }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<int>& word(std::size_t i) const { return words_.at(i); }

  std::size_t find(const std::vector<int>& w) const {
    auto it = std::lower_bound(words_.begin(), words_.end(), w);
    if (it == words_.end() || *it != w) throw DomainError("word not in colored space");
    return static_cast<std::size_t>(it - words_.begin());
  }

  std::vector<int> project(const Permutation& sigma) const {
    if (static_cast<int>(sigma.size()) != n_) throw DomainError("permutation size does not match color counts");
    std::vector<int> w(sigma.size());
    for (std::size_t x = 0; x < sigma.size(); ++x) w[x] = label_color_[static_cast<std::size_t>(sigma[x])];
    return w;
  }

  /// Colored-state index of every permutation index.
  std::vector<std::size_t> projection_map() const {
    std::vector<std::size_t> m(factorial(n_));
    for (std::size_t r = 0; r < m.size(); ++r) m[r] = find(project(permutation_unrank(r, n_)));
    return m;
  }

 private:
  std::vector<int> counts_;
  int n_ = 0;
  std::vector<std::vector<int>> words_;
  std::vector<int> label_color_;
};

/// Generator on colored words built directly: each edge swaps its two
/// colors at rate 1.
inline GeneratorMatrix colored_generator(const ColoredSpace& space, Graph g) {
  const auto edges = graph_edges(space.n(), g);
  GeneratorBuilder b(space.size(), space.size() * (edges.size() + 1));
  for (std::size_t i = 0; i < space.size(); ++i) {
    std::vector<int> w = space.word(i);
    for (auto [x, y] : edges) {
      if (w[static_cast<std::size_t>(x)] == w[static_cast<std::size_t>(y)]) continue;
      std::swap(w[static_cast<std::size_t>(x)], w[static_cast<std::size_t>(y)]);
      b.add(space.find(w), 1.0);
      std::swap(w[static_cast<std::size_t>(x)], w[static_cast<std::size_t>(y)]);
    }
    b.finish_row(i);
  }
  return b.finish(static_cast<double>(edges.size()));
}

/// Lumps a permutation-space generator along the coloring: the rate from
/// word a to word b is the total rate from any preimage of a into the
/// preimages of b.  Throws ConsistencyError if preimages disagree, i.e. if
/// the chain is not lumpable.
inline GeneratorMatrix project_generator(const GeneratorMatrix& gen, const ColoredSpace& space) {
  if (gen.dim() != factorial(space.n())) throw DomainError("generator size does not match n!");
  const auto proj = space.projection_map();
  std::vector<std::map<std::size_t, double>> rows(space.size());
  std::vector<char> seen(space.size(), 0);
  for (std::size_t r = 0; r < gen.dim(); ++r) {
    std::map<std::size_t, double> row;
    for (SparseRowMatrix::InnerIterator it(gen.matrix, static_cast<Eigen::Index>(r)); it; ++it) {
      const std::size_t target = proj[static_cast<std::size_t>(it.col())];
      if (target != proj[r]) row[target] += it.value();
    }
    const std::size_t a = proj[r];
    if (!seen[a]) {
      rows[a] = std::move(row);
      seen[a] = 1;
    } else {
      bool same = rows[a].size() == row.size();
      for (auto it1 = rows[a].begin(), it2 = row.begin(); same && it1 != rows[a].end(); ++it1, ++it2)
        same = it1->first == it2->first && std::abs(it1->second - it2->second) <= 1e-12;
      if (!same) throw ConsistencyError("generator is not lumpable along the coloring");
    }
  }
  GeneratorBuilder b(space.size(), space.size() * 8);
  for (std::size_t a = 0; a < space.size(); ++a) {
    for (const auto& [c, v] : rows[a]) b.add(c, v);
    b.finish_row(a);
  }
  return b.finish(gen.max_rate);
}

// ---------------------------------------------------------------------------
// Log-Sobolev estimates on the segment.

struct SegmentLsiReport {
  int n = 0;
  std::vector<int> counts;
  double gap = 0.0;
  double alpha = 0.0;          ///< estimate for the permutation chain
  std::string witness;
  double colored_gap = 0.0;
  std::optional<double> colored_alpha;
  std::string colored_witness;
  /// alpha(segment) <= alpha(segment, counts) up to `contraction_slack`
  bool contraction_holds = true;
  double contraction_slack = 0.0;
};

/// Both chains use the shared optimizer; the permutation chain is also
/// started from the lift of the colored minimizer, which has the same
/// ratio, so the estimates inherit the contraction ordering.
inline SegmentLsiReport lsi_segment(int n, const std::optional<std::vector<int>>& counts, const LsiOptions& base = {}) {
  SegmentLsiReport r;
  r.n = n;
  const GeneratorMatrix gen = build_interchange_generator(n, Graph::segment);
  LsiOptions opt = base;
  if (counts) {
    const ColoredSpace space(*counts);
    if (space.n() != n) throw DomainError("color counts must sum to n");
    r.counts = *counts;
    const GeneratorMatrix cgen = colored_generator(space, Graph::segment);
    const LsiReport col = lsi_constant_estimate(cgen, base);
    r.colored_gap = col.gap;
    r.colored_alpha = col.alpha_est;
    r.colored_witness = col.witness;
    const auto proj = space.projection_map();
    if (col.minimizer.size() > 0) {
      Eigen::VectorXd lifted(static_cast<Eigen::Index>(proj.size()));
      for (std::size_t k = 0; k < proj.size(); ++k) lifted[static_cast<Eigen::Index>(k)] = col.minimizer[static_cast<Eigen::Index>(proj[k])];
      opt.warm_starts.push_back(std::move(lifted));
    }
  }
  const LsiReport full = lsi_constant_estimate(gen, opt);
  r.gap = full.gap;
  r.alpha = full.alpha_est;
  r.witness = full.witness;
  if (r.colored_alpha) {
    r.contraction_slack = r.alpha - *r.colored_alpha;
    r.contraction_holds = r.contraction_slack <= 1e-6;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Dirichlet form comparison and the entropy recursion.

/// sup over non-constant f of E_{K_n}(f,f) / E_{segment}(f,f): the largest
/// generalized eigenvalue of (-L_K, -L_segment) off the constants.
inline double dirichlet_comparison(int n) {
  require_interchange_size(n);
  if (n > 6) throw CapacityError("dense comparison limited to n <= 6");
  if (n == 1) return 1.0;
  const Eigen::MatrixXd A = -Eigen::MatrixXd(build_interchange_generator(n, Graph::complete).matrix);
  const Eigen::MatrixXd B = -Eigen::MatrixXd(build_interchange_generator(n, Graph::segment).matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(B);
  // the segment is connected: exactly one zero eigenvalue, the constants
  const Eigen::Index m = B.rows() - 1;
  const Eigen::MatrixXd U = eb.eigenvectors().rightCols(m);
  const Eigen::VectorXd inv_sqrt = eb.eigenvalues().tail(m).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd M = inv_sqrt.asDiagonal() * (U.transpose() * A * U) * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(M, Eigen::EigenvaluesOnly);
  return em.eigenvalues().maxCoeff();
}

struct EntropySplitReport {
  int n = 0;
  int n1 = 0;
  std::size_t samples = 0;
  /// max over samples of |Ent(f) - mu[Ent_X f] - Ent(mu[f | X])| / max(1, Ent f)
  double max_residual = 0.0;
};

/// X records which labels occupy the first n1 vertices.  Checks
///   Ent(f) = mu[Ent_{mu_X}(f)] + Ent(mu[f | X])
/// on random positive f.
inline EntropySplitReport entropy_split_check(int n, int n1, std::size_t samples, std::uint64_t seed) {
  require_interchange_size(n);
  if (n1 < 1 || n1 >= n) throw DomainError("n1 must lie in 1..n-1");
  const std::size_t N = factorial(n);
  std::vector<std::size_t> group(N);
  std::map<unsigned, std::size_t> ids;
  for (std::size_t r = 0; r < N; ++r) {
    const Permutation s = permutation_unrank(r, n);
    unsigned mask = 0;
    for (int x = 0; x < n1; ++x) mask |= 1u << s[static_cast<std::size_t>(x)];
    group[r] = ids.emplace(mask, ids.size()).first->second;
  }
  const std::size_t G = ids.size();
  const double per_group = static_cast<double>(N) / static_cast<double>(G);

  auto ent = [](const Eigen::VectorXd& f) {
    const double m = f.mean();
    return (f.array() * f.array().log()).mean() - m * std::log(m);
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  EntropySplitReport rep;
  rep.n = n;
  rep.n1 = n1;
  rep.samples = samples;
  Eigen::VectorXd f(static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < samples; ++k) {
    const double scale = 0.2 + 2.0 * static_cast<double>(k % 5);
    for (auto& v : f) v = std::exp(scale * normal(rng));
    std::vector<CompensatedSum> sf(G), sflogf(G);
    for (std::size_t r = 0; r < N; ++r) {
      const double v = f[static_cast<Eigen::Index>(r)];
      sf[group[r]].add(v);
      sflogf[group[r]].add(v * std::log(v));
    }
    double inner = 0.0;
    Eigen::VectorXd cond(static_cast<Eigen::Index>(G));
    for (std::size_t g = 0; g < G; ++g) {
      const double m = sf[g].value() / per_group;
      cond[static_cast<Eigen::Index>(g)] = m;
      inner += sflogf[g].value() / per_group - m * std::log(m);
    }
    inner /= static_cast<double>(G);
    const double total = ent(f);
    const double outer = ent(cond);  // X is uniform on its range
    rep.max_residual = std::max(rep.max_residual, std::abs(total - inner - outer) / std::max(1.0, total));
  }
  return rep;
}

struct RecursionCheckReport {
  int n = 0;
  int n1 = 0;
  double alpha_n = 0.0;
  double alpha_n1 = 0.0;
  double alpha_n2 = 0.0;
  /// 1/alpha(n) - max(1/alpha(n1), 1/alpha(n - n1))
  double excess = 0.0;
  /// excess / n^2: the constant C the recursion needs at this n
  double implied_C = 0.0;
};

/// alpha of the segment with the convention that a single vertex has no
/// entropy (alpha = +inf).
inline double segment_alpha(int n, const LsiOptions& opt = {}) {
  if (n <= 1) return std::numeric_limits<double>::infinity();
  return lsi_segment(n, std::nullopt, opt).alpha;
}

inline RecursionCheckReport recursion_check(int n, const LsiOptions& opt = {}) {
  RecursionCheckReport r;
  r.n = n;
  r.n1 = n / 2;
  r.alpha_n = segment_alpha(n, opt);
  r.alpha_n1 = segment_alpha(r.n1, opt);
  r.alpha_n2 = segment_alpha(n - r.n1, opt);
  const double worst = std::max(1.0 / r.alpha_n1, 1.0 / r.alpha_n2);
  r.excess = 1.0 / r.alpha_n - worst;
  r.implied_C = r.excess / (static_cast<double>(n) * n);
  return r;
}

}  // namespace dpoly
