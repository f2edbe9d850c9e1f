#pragma once

// Sparse generator L = sum_x (Q_x - 1) of the heat-bath dynamics on an
// enumerated state space, and the quadratic functionals built on it.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dpoly/errors.hpp"
#include "dpoly/numeric.hpp"
#include "dpoly/state_space.hpp"

namespace dpoly {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
/// Real function on an enumerated state space, indexed like the StateIndex.
using StateFunction = Eigen::VectorXd;

/// Generator of a reversible chain with uniform invariant measure.  Rows
/// sum to zero; the matrix is symmetric.
struct GeneratorMatrix {
  SparseRowMatrix matrix;
  /// Upper bound on every exit rate, used as the uniformization rate.
  double max_rate = 0.0;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix.rows()); }

  /// (L f)(i) = sum_j L(i,j) (f(j) - f(i)), evaluated without forming the
  /// diagonal so that constants map to exactly zero.
  StateFunction apply(const StateFunction& f) const {
    StateFunction out(f.size());
    for (Eigen::Index i = 0; i < matrix.outerSize(); ++i) {
      double acc = 0.0;
      for (SparseRowMatrix::InnerIterator it(matrix, i); it; ++it)
        if (it.col() != i) acc += it.value() * (f[it.col()] - f[i]);
      out[i] = acc;
    }
    return out;
  }
};

/// Helper for building a row-major generator one row at a time from
/// unsorted off-diagonal contributions.
class GeneratorBuilder {
 public:
  GeneratorBuilder(std::size_t dim, std::size_t expected_nnz) {
    m_.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m_.reserve(static_cast<Eigen::Index>(expected_nnz));
  }

  void add(std::size_t col, double rate) { row_.emplace_back(col, rate); }

  /// Finishes row i: merges duplicates and sets the diagonal so the row
  /// sums to zero.
  void finish_row(std::size_t i) {
    std::sort(row_.begin(), row_.end());
    double exit = 0.0;
    bool diag_written = false;
    const auto ii = static_cast<Eigen::Index>(i);
    m_.startVec(ii);
    // exit rate first, so the diagonal can be inserted in column order
    for (const auto& [c, r] : row_)
      if (c != i) exit += r;
    for (std::size_t k = 0; k < row_.size();) {
      const std::size_t c = row_[k].first;
      double r = 0.0;
      while (k < row_.size() && row_[k].first == c) r += row_[k++].second;
      if (c == i) continue;
      if (!diag_written && c > i) {
        m_.insertBack(ii, ii) = -exit;
        diag_written = true;
      }
      m_.insertBack(ii, static_cast<Eigen::Index>(c)) = r;
    }
    if (!diag_written) m_.insertBack(ii, ii) = -exit;
    max_rate_ = std::max(max_rate_, exit);
    row_.clear();
  }

  GeneratorMatrix finish(double rate_bound) {
    m_.finalize();
    return GeneratorMatrix{std::move(m_), std::max(rate_bound, max_rate_)};
  }

 private:
  SparseRowMatrix m_;
  std::vector<std::pair<std::size_t, double>> row_;
  double max_rate_ = 0.0;
};

/// Entry (sigma, xi), sigma != xi, is the summed heat-bath probability of
/// moving from sigma to xi over all sites x.
inline GeneratorMatrix build_generator(const StateIndex& index) {
  const int L = index.length(), d = index.dim();
  GeneratorBuilder b(index.size(), index.size() * static_cast<std::size_t>(L + 1));
  std::vector<Code> z(static_cast<std::size_t>(L));
  for (std::size_t i = 0; i < index.size(); ++i) {
    index.codes(i, z);
    for (int x = 1; x <= L - 1; ++x) {
      const Code a = z[static_cast<std::size_t>(x - 1)], c = z[static_cast<std::size_t>(x)];
      for_each_heat_bath_move(std::span<const Code>(z), d, x, [&](Code first, Code second, double p) {
        if (first == a && second == c) return;
        z[static_cast<std::size_t>(x - 1)] = first;
        z[static_cast<std::size_t>(x)] = second;
        b.add(index.find(z), p);
        z[static_cast<std::size_t>(x - 1)] = a;
        z[static_cast<std::size_t>(x)] = c;
      });
    }
    b.finish_row(i);
  }
  return b.finish(static_cast<double>(L - 1));
}

// ---------------------------------------------------------------------------
// Dirichlet form and entropy under the uniform measure.

/// E(f, g) = -mu[f L g].
inline double dirichlet_form(const GeneratorMatrix& gen, const StateFunction& f, const StateFunction& g) {
  return -f.dot(gen.apply(g)) / static_cast<double>(f.size());
}

/// Ent(f) = mu[f log f] - mu[f] log mu[f], with 0 log 0 = 0.
inline double entropy(const StateFunction& f) {
  CompensatedSum flogf, mass;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double v = f[i];
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("entropy needs a finite nonnegative function");
    mass.add(v);
    if (v > 0.0) flogf.add(v * std::log(v));
  }
  const double n = static_cast<double>(f.size());
  const double m = mass.value() / n;
  return flogf.value() / n - (m > 0.0 ? m * std::log(m) : 0.0);
}

/// Dirichlet form written as swap terms plus regeneration terms,
/// evaluated move by move from the path representation:
///   E(f,f) = 1/2 sum_x mu[c_x (grad_x f)^2]
///          + 1/2 sum_x sum_j mu[c*_x^j (grad*_x^j f)^2].
inline double dirichlet_form_split(const StateIndex& index, const StateFunction& f) {
  const int L = index.length(), d = index.dim();
  std::vector<Code> z(static_cast<std::size_t>(L));
  CompensatedSum swaps, regenerations;
  for (std::size_t i = 0; i < index.size(); ++i) {
    index.codes(i, z);
    for (int x = 1; x <= L - 1; ++x) {
      const auto lo = static_cast<std::size_t>(x - 1), hi = static_cast<std::size_t>(x);
      const Code a = z[lo], c = z[hi];
      if (c == negate(a, d)) {
        for (int j = 0; j < 2 * d; ++j) {
          z[lo] = static_cast<Code>(j);
          z[hi] = negate(static_cast<Code>(j), d);
          const double diff = f[static_cast<Eigen::Index>(index.find(z))] - f[static_cast<Eigen::Index>(i)];
          regenerations.add(diff * diff / (2.0 * d));
        }
      } else {
        z[lo] = c;
        z[hi] = a;
        const double diff = f[static_cast<Eigen::Index>(index.find(z))] - f[static_cast<Eigen::Index>(i)];
        swaps.add(0.5 * diff * diff);
      }
      z[lo] = a;
      z[hi] = c;
    }
  }
  const double n = static_cast<double>(index.size());
  return 0.5 * (swaps.value() + regenerations.value()) / n;
}

}  // namespace dpoly
