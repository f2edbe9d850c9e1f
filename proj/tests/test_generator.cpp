#include <gtest/gtest.h>

#include <random>

#include "dpoly/generator.hpp"

using namespace dpoly;

namespace {

Eigen::MatrixXd dense(const GeneratorMatrix& g) { return Eigen::MatrixXd(g.matrix); }

// Generator assembled entry by entry from heat_bath_candidates on decoded
// paths, without the packed-key fast path.
Eigen::MatrixXd reference_generator(const StateIndex& index) {
  const auto n = static_cast<Eigen::Index>(index.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const PolymerPath p = index.unrank(i);
    for (int x = 1; x < p.length(); ++x)
      for (const auto& c : heat_bath_candidates(p, x))
        M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index.rank(c.path))) += c.probability;
    M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -= p.length() - 1;
  }
  return M;
}

}  // namespace

TEST(Generator, TwoStateChain) {
  const auto index = StateIndex::enumerate(2, 1);
  const auto M = dense(build_generator(index));
  ASSERT_EQ(M.rows(), 2);
  EXPECT_DOUBLE_EQ(M(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(M(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(M(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(M(1, 1), -0.5);
}

TEST(Generator, StructuralInvariants) {
  for (int d = 1; d <= 3; ++d)
    for (int L = 2; L <= 8; L += 2) {
      if (d == 3 && L == 8) continue;
      const auto index = StateIndex::enumerate(L, d);
      const auto gen = build_generator(index);
      const auto M = dense(gen);
      EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_LT(M.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
      for (Eigen::Index i = 0; i < M.rows(); ++i) {
        EXPECT_LE(M(i, i), 0.0);
        EXPECT_GE(M(i, i), -(L - 1.0));
        for (Eigen::Index j = 0; j < M.cols(); ++j)
          if (i != j) EXPECT_GE(M(i, j), 0.0);
      }
      const auto ones = StateFunction::Ones(static_cast<Eigen::Index>(index.size()));
      EXPECT_LT(gen.apply(ones).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_LT((M * ones).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Generator, MatchesCandidateDefinition) {
  const auto index = StateIndex::enumerate(4, 2);
  EXPECT_LT((dense(build_generator(index)) - reference_generator(index)).cwiseAbs().maxCoeff(), 1e-14);
  const auto index3 = StateIndex::enumerate(4, 3);
  EXPECT_LT((dense(build_generator(index3)) - reference_generator(index3)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Generator, ApplyMatchesMatrixProduct) {
  const auto index = StateIndex::enumerate(6, 2);
  const auto gen = build_generator(index);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  StateFunction f(static_cast<Eigen::Index>(index.size()));
  for (auto& v : f) v = nd(rng);
  EXPECT_LT((gen.apply(f) - gen.matrix * f).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DirichletForm, ConstantsAndTwoPoint) {
  const auto index = StateIndex::enumerate(2, 1);
  const auto gen = build_generator(index);
  const StateFunction c = StateFunction::Constant(2, 3.0);
  EXPECT_DOUBLE_EQ(dirichlet_form(gen, c, c), 0.0);
  EXPECT_DOUBLE_EQ(entropy(c), 0.0);
  StateFunction f(2);
  f << 1.0, 0.0;
  EXPECT_DOUBLE_EQ(dirichlet_form(gen, f, f), 0.25);
  EXPECT_NEAR(entropy(f), 0.5 * std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(dirichlet_form_split(index, f), 0.25);
}

TEST(DirichletForm, SplitMatchesQuadraticForm) {
  const auto index = StateIndex::enumerate(6, 2);
  const auto gen = build_generator(index);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  StateFunction f(static_cast<Eigen::Index>(index.size()));
  for (int trial = 0; trial < 100; ++trial) {
    for (auto& v : f) v = nd(rng);
    const double q = dirichlet_form(gen, f, f);
    EXPECT_NEAR(dirichlet_form_split(index, f), q, 1e-12 * std::max(1.0, q));
  }
}

TEST(DirichletForm, Symmetric) {
  const auto index = StateIndex::enumerate(6, 2);
  const auto gen = build_generator(index);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  StateFunction f(static_cast<Eigen::Index>(index.size())), g(f.size());
  for (auto& v : f) v = nd(rng);
  for (auto& v : g) v = nd(rng);
  EXPECT_NEAR(dirichlet_form(gen, f, g), dirichlet_form(gen, g, f), 1e-12);
}

TEST(Entropy, RejectsNegative) {
  StateFunction f(2);
  f << 1.0, -0.1;
  EXPECT_THROW(entropy(f), DomainError);
}

TEST(Generator, SimpleExclusionInOneDimension) {
  // d = 1: every site either swaps distinct neighbours at rate 1/2 (the
  // pair (+,-) is regenerated among {(+,-),(-,+)}, each with 1/2) or is
  // frozen.  That is the symmetric simple exclusion process on L sites
  // with swap rate 1/2 per bond.
  for (int L = 2; L <= 8; L += 2) {
    const auto index = StateIndex::enumerate(L, 1);
    const auto M = dense(build_generator(index));
    for (std::size_t i = 0; i < index.size(); ++i) {
      const auto p = index.unrank(i);
      std::vector<Code> z(p.increments().begin(), p.increments().end());
      double exit = 0.0;
      for (int x = 0; x + 1 < L; ++x) {
        if (z[x] == z[x + 1]) continue;
        std::swap(z[x], z[x + 1]);
        EXPECT_DOUBLE_EQ(M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index.find(z))), 0.5);
        std::swap(z[x], z[x + 1]);
        exit += 0.5;
      }
      EXPECT_DOUBLE_EQ(M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)), -exit);
    }
  }
}
