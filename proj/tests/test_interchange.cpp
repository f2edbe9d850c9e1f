#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "dpoly/interchange.hpp"

using namespace dpoly;

namespace {

Eigen::MatrixXd dense(const GeneratorMatrix& g) { return Eigen::MatrixXd(g.matrix); }

// Gap of the single random walk on the n-path with rate 1 per edge.
double path_walk_gap(int n) {
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x + 1 < n; ++x) {
    Q(x, x + 1) = Q(x + 1, x) = 1.0;
    Q(x, x) -= 1.0;
    Q(x + 1, x + 1) -= 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-Q);
  return es.eigenvalues()[1];
}

}  // namespace

TEST(Interchange, LehmerRankIsLexicographic) {
  for (int n = 1; n <= 6; ++n) {
    Permutation p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    std::size_t r = 0;
    do {
      EXPECT_EQ(permutation_rank(p), r);
      EXPECT_EQ(permutation_unrank(r, n), p);
      ++r;
    } while (std::next_permutation(p.begin(), p.end()));
    EXPECT_EQ(r, factorial(n));
  }
}

TEST(Interchange, TwoLabels) {
  const auto M = dense(build_interchange_generator(2, Graph::segment));
  ASSERT_EQ(M.rows(), 2);
  EXPECT_EQ(M(0, 1), 1.0);
  EXPECT_EQ(M(0, 0), -1.0);
  EXPECT_EQ(dense(build_interchange_generator(2, Graph::complete)), M);
}

TEST(Interchange, GeneratorStructure) {
  for (int n = 2; n <= 5; ++n)
    for (Graph g : {Graph::segment, Graph::complete}) {
      const auto gen = build_interchange_generator(n, g);
      const auto M = dense(gen);
      EXPECT_EQ(gen.dim(), factorial(n));
      EXPECT_EQ((M - M.transpose()).cwiseAbs().maxCoeff(), 0.0);
      EXPECT_LT(M.rowwise().sum().cwiseAbs().maxCoeff(), 1e-14);
      const double edges = g == Graph::segment ? n - 1 : n * (n - 1) / 2.0;
      EXPECT_EQ(M.diagonal().maxCoeff(), -edges);
      EXPECT_EQ(M.diagonal().minCoeff(), -edges);
    }
  EXPECT_THROW(build_interchange_generator(9, Graph::segment), CapacityError);
}

TEST(Interchange, GapMatchesRandomWalkAndDomination) {
  for (int n = 2; n <= 6; ++n) {
    const double seg = spectral_gap_dense(build_interchange_generator(n, Graph::segment));
    EXPECT_NEAR(seg, path_walk_gap(n), 1e-9) << n;
    EXPECT_NEAR(seg, 2.0 * (1.0 - std::cos(std::numbers::pi / n)), 1e-9);
    EXPECT_GE(spectral_gap_dense(build_interchange_generator(n, Graph::complete)), seg - 1e-12);
  }
}

TEST(Coloring, FourLabelsTwoColors) {
  const ColoredSpace space({2, 2});
  EXPECT_EQ(space.size(), 6u);
  const auto proj = space.projection_map();
  std::vector<int> pre(space.size(), 0);
  for (auto a : proj) ++pre[a];
  for (int c : pre) EXPECT_EQ(c, 4);
  EXPECT_EQ(space.project({0, 2, 1, 3}), (std::vector<int>{0, 1, 0, 1}));
  EXPECT_THROW(space.project({0, 1, 2}), DomainError);
  EXPECT_THROW(ColoredSpace({-1, 3}), DomainError);
}

TEST(Coloring, PushforwardOfUniformIsUniform) {
  // chi-square on five independent streams of 10^6 shuffles, combined by
  // Fisher's method
  const ColoredSpace space({2, 2, 2});
  ASSERT_EQ(space.size(), 90u);
  const boost::math::chi_squared per_stream(89.0);
  double fisher = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    Permutation p(6);
    std::iota(p.begin(), p.end(), 0);
    std::vector<double> freq(space.size(), 0.0);
    const int n = 1'000'000;
    for (int k = 0; k < n; ++k) {
      std::shuffle(p.begin(), p.end(), rng);
      freq[space.find(space.project(p))] += 1.0;
    }
    const double e = static_cast<double>(n) / 90.0;
    double x2 = 0.0;
    for (double f : freq) x2 += (f - e) * (f - e) / e;
    fisher += -2.0 * std::log(boost::math::cdf(boost::math::complement(per_stream, x2)));
  }
  const boost::math::chi_squared combined(10.0);
  EXPECT_GT(boost::math::cdf(boost::math::complement(combined, fisher)), 0.01);
}

TEST(Coloring, ProjectedGeneratorMatchesDirectConstruction) {
  for (const auto& counts : std::vector<std::vector<int>>{{1, 1}, {2, 2}, {1, 3}, {2, 1, 2}, {2, 2, 2}, {1, 1, 1, 1, 1}, {3, 3}})
    for (Graph g : {Graph::segment, Graph::complete}) {
      const ColoredSpace space(counts);
      const auto projected = dense(project_generator(build_interchange_generator(space.n(), g), space));
      const auto direct = dense(colored_generator(space, g));
      EXPECT_EQ((projected - direct).cwiseAbs().maxCoeff(), 0.0) << graph_name(g);
    }
}

TEST(Coloring, NonLumpableChainIsRejected) {
  // one extra rate out of a single permutation breaks lumpability
  auto gen = build_interchange_generator(3, Graph::segment);
  Eigen::MatrixXd M = dense(gen);
  M(0, 2) += 0.5;
  M(0, 0) -= 0.5;
  gen.matrix = M.sparseView();
  EXPECT_THROW(project_generator(gen, ColoredSpace({1, 2})), ConsistencyError);
}

TEST(Coloring, ProjectionKeepsTheGap) {
  for (int n = 3; n <= 6; ++n) {
    const double full = spectral_gap_dense(build_interchange_generator(n, Graph::segment));
    for (int n1 = 1; n1 < n; ++n1) {
      const ColoredSpace space({n1, n - n1});
      EXPECT_NEAR(spectral_gap_dense(colored_generator(space, Graph::segment)), full, 1e-8) << n << " " << n1;
    }
  }
  const ColoredSpace space({2, 2, 2});
  EXPECT_NEAR(spectral_gap_dense(colored_generator(space, Graph::segment)),
              spectral_gap_dense(build_interchange_generator(6, Graph::segment)), 1e-8);
}

TEST(Coloring, TwoColorsOnSegmentIsOneDimensionalPolymer) {
  // the d = 1 polymer swaps (+e1, -e1) pairs at rate 1/2
  for (int L : {4, 6, 8}) {
    const auto index = StateIndex::enumerate(L, 1);
    const auto poly = dense(build_generator(index));
    const ColoredSpace space({L / 2, L / 2});
    const auto col = dense(colored_generator(space, Graph::segment));
    ASSERT_EQ(space.size(), index.size());
    std::vector<std::size_t> map(index.size());
    std::vector<Code> z(static_cast<std::size_t>(L));
    for (std::size_t s = 0; s < index.size(); ++s) {
      index.codes(s, z);
      map[s] = space.find(std::vector<int>(z.begin(), z.end()));
    }
    for (std::size_t a = 0; a < index.size(); ++a)
      for (std::size_t b = 0; b < index.size(); ++b)
        EXPECT_EQ(2.0 * poly(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)),
                  col(static_cast<Eigen::Index>(map[a]), static_cast<Eigen::Index>(map[b])));
  }
}

TEST(SegmentLsi, ContractionUnderColoring) {
  const auto r = lsi_segment(5, std::vector<int>{2, 3});
  ASSERT_TRUE(r.colored_alpha.has_value());
  EXPECT_TRUE(r.contraction_holds);
  EXPECT_LE(r.alpha, *r.colored_alpha + 1e-6);
  EXPECT_LE(r.alpha, r.gap / 2 + 1e-8);
  EXPECT_THROW(lsi_segment(5, std::vector<int>{2, 2}), DomainError);
}

TEST(SegmentLsi, QuadraticScaling) {
  double lo = 1e300, hi = 0.0;
  for (int n = 4; n <= 7; ++n) {
    const double a = lsi_segment(n, std::nullopt).alpha * n * n;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  EXPECT_LT(hi / lo, 2.0);
}

TEST(SegmentLsi, ColoredConstantUniformInSplit) {
  double lo = 1e300, hi = 0.0;
  for (int n1 = 1; n1 <= 5; ++n1) {
    const double a = *lsi_segment(6, std::vector<int>{n1, 6 - n1}).colored_alpha * 36.0;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  EXPECT_LT(hi / lo, 2.0);
}

TEST(Comparison, CompleteAgainstSegment) {
  EXPECT_NEAR(dirichlet_comparison(2), 1.0, 1e-12);
  double lo = 1e300, hi = 0.0;
  for (int n = 3; n <= 5; ++n) {
    const double r = dirichlet_comparison(n) / (n * n * n);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  EXPECT_LT(hi / lo, 2.0);
  EXPECT_THROW(dirichlet_comparison(7), CapacityError);
}

TEST(Comparison, SupremumDominatesRandomRatios) {
  const int n = 4;
  const double sup = dirichlet_comparison(n);
  const auto K = build_interchange_generator(n, Graph::complete);
  const auto G = build_interchange_generator(n, Graph::segment);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  double best = 0.0;
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(K.dim()));
    for (auto& v : f) v = normal(rng);
    const double r = dirichlet_form(K, f, f) / dirichlet_form(G, f, f);
    EXPECT_LE(r, sup * (1 + 1e-10));
    best = std::max(best, r);
  }
  EXPECT_GT(best, 1.0);
}

TEST(Recursion, EntropySplitIdentity) {
  const auto r = entropy_split_check(5, 2, 100, 77);
  EXPECT_LT(r.max_residual, 1e-12);
  EXPECT_THROW(entropy_split_check(5, 0, 1, 1), DomainError);
}

TEST(Recursion, ImpliedConstantIsFinite) {
  const auto r = recursion_check(5);
  EXPECT_EQ(r.n1, 2);
  EXPECT_TRUE(std::isfinite(r.implied_C));
  EXPECT_GT(r.alpha_n1, r.alpha_n);
}
