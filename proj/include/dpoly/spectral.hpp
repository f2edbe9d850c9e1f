#pragma once

// Spectral gap of -L: smallest eigenvalue on the orthogonal complement of
// the constants, by Lanczos with full reorthogonalization and explicit
// restarts from the best Ritz vector.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpoly/errors.hpp"
#include "dpoly/generator.hpp"

namespace dpoly {

struct LanczosOptions {
  int max_basis = 300;
  /// Cap on the Krylov basis storage, in doubles.
  std::size_t basis_budget = 60'000'000;
  int max_restarts = 40;
  /// Residual ||A v - lambda v|| relative to the spectral radius bound.
  double tolerance = 1e-10;
  std::uint64_t seed = 0x5eed;
};

struct GapResult {
  double gap = 0.0;
  /// Unit-norm eigenvector, orthogonal to constants.
  Eigen::VectorXd eigenvector;
  double residual = 0.0;
  int iterations = 0;
};

inline GapResult spectral_gap(const GeneratorMatrix& gen, const LanczosOptions& opt = {}) {
  const auto n = static_cast<Eigen::Index>(gen.dim());
  if (n < 2) throw DomainError("spectral gap needs at least two states");
  const double norm_bound = 2.0 * std::max(gen.max_rate, 1e-300);
  auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return -gen.apply(v); };
  auto deflate = [&](Eigen::VectorXd& v) { v.array() -= v.mean(); };

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = normal(rng);
  deflate(start);

  const auto budget = static_cast<Eigen::Index>(opt.basis_budget) / n;
  const int m_max = static_cast<int>(std::max<Eigen::Index>(2, std::min<Eigen::Index>({opt.max_basis, n - 1, budget})));
  GapResult out;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    Eigen::MatrixXd Q(n, m_max);
    std::vector<double> alpha, beta;
    Q.col(0) = start.normalized();
    int m = 0;
    for (; m < m_max; ++m) {
      Eigen::VectorXd w = apply(Q.col(m));
      alpha.push_back(Q.col(m).dot(w));
      // two passes of classical Gram-Schmidt against the basis and constants
      for (int pass = 0; pass < 2; ++pass) {
        w -= Q.leftCols(m + 1) * (Q.leftCols(m + 1).transpose() * w);
        deflate(w);
      }
      const double b = w.norm();
      ++out.iterations;
      if (m + 1 == m_max || b < 1e-12 * norm_bound) {
        ++m;
        break;
      }
      beta.push_back(b);
      Q.col(m + 1) = w / b;
    }

    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub(std::max(m - 1, 0));
    for (int k = 0; k + 1 < m; ++k) sub[k] = beta[static_cast<std::size_t>(k)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    Eigen::VectorXd v = Q.leftCols(m) * tri.eigenvectors().col(0);
    deflate(v);
    v.normalize();
    const Eigen::VectorXd Av = apply(v);
    const double lambda = v.dot(Av);
    const double res = (Av - lambda * v).norm();
    out.gap = lambda;
    out.eigenvector = v;
    out.residual = res;
    if (res <= opt.tolerance * norm_bound || m == n - 1) return out;
    start = v;
  }
  throw NonConvergenceError("Lanczos did not converge; residual " + std::to_string(out.residual));
}

/// Smallest nonzero eigenvalue from a dense eigendecomposition; for small
/// state spaces and cross-checks.
inline double spectral_gap_dense(const GeneratorMatrix& gen) {
  const Eigen::MatrixXd A = -Eigen::MatrixXd(gen.matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev.size() > 1 ? ev[1] : 0.0;
}

}  // namespace dpoly
