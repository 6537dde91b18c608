#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symbreak/codes.hpp"
#include "symbreak/gf2.hpp"

using namespace symbreak;

namespace {

CssCode bb72() {
  return make_bb_code(MonomialSum(6, 6, {{3, 0}, {0, 1}, {0, 2}}), MonomialSum(6, 6, {{0, 3}, {1, 0}, {2, 0}}),
                      "bb72");
}

}  // namespace

TEST(BinVector, RejectsOutOfRangeAndNormalizes) {
  EXPECT_THROW(BinVector(3, {3}), Error);
  const BinVector v(5, {4, 1, 2});
  EXPECT_EQ(v.support(), (std::vector<Index>{1, 2, 4}));
  EXPECT_EQ(v.to_string(), "01101");
}

TEST(BinVector, XorAndDot) {
  const BinVector a(6, {0, 2, 3}), b(6, {2, 3, 5});
  EXPECT_EQ((a ^ b).support(), (std::vector<Index>{0, 5}));
  EXPECT_FALSE(a.dot(b));
  EXPECT_TRUE(a.dot(BinVector(6, {0})));
  EXPECT_THROW(a ^ BinVector(5), DimensionError);
}

TEST(BinMatrix, RowAndColumnSupportsAgree) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const BinMatrix m = oracle::random_matrix(7, 11, 0.3, rng);
    std::size_t from_cols = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      for (Index r : m.col(c)) EXPECT_TRUE(m.test(r, c));
      EXPECT_TRUE(std::is_sorted(m.col(c).begin(), m.col(c).end()));
      from_cols += m.col(c).size();
    }
    EXPECT_EQ(from_cols, m.nnz());
  }
}

TEST(Matvec, ZeroVectorGivesZero) {
  const CssCode c = bb72();
  EXPECT_TRUE(matvec(c.hz, BinVector(72)).is_zero());
}

TEST(Matvec, SingleQubitOnBbHasWeightThreeSyndrome) {
  const CssCode c = bb72();
  for (Index q = 0; q < 72; ++q) EXPECT_EQ(matvec(c.hz, BinVector(72, {q})).weight(), 3u);
}

TEST(Matvec, MatchesDenseReference) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const BinMatrix m = oracle::random_matrix(20, 30, 0.2, rng);
    const BinVector v = oracle::random_vector(30, 0.4, rng);
    EXPECT_EQ(oracle::to_dense(matvec(m, v)), oracle::apply(oracle::to_dense(m), oracle::to_dense(v)));
  }
}

TEST(Matvec, DimensionMismatchThrows) {
  EXPECT_THROW(matvec(BinMatrix::identity(3), BinVector(4)), DimensionError);
}

TEST(Matvec, IsLinear) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const BinMatrix m = oracle::random_matrix(15, 25, 0.2, rng);
    const BinVector a = oracle::random_vector(25, 0.3, rng), b = oracle::random_vector(25, 0.3, rng);
    EXPECT_EQ(matvec(m, a ^ b), matvec(m, a) ^ matvec(m, b));
  }
}

TEST(MulTranspose, MatchesDenseReference) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    const BinMatrix a = oracle::random_matrix(9, 14, 0.3, rng), b = oracle::random_matrix(6, 14, 0.3, rng);
    EXPECT_EQ(oracle::to_dense(mul_transpose(a, b)),
              oracle::multiply(oracle::to_dense(a), oracle::transpose(oracle::to_dense(b))));
  }
}

TEST(Rank, SmallCases) {
  EXPECT_EQ(rank(BinMatrix::identity(5)), 5u);
  EXPECT_EQ(rank(BinMatrix(2, 6, {{0, 3, 5}, {0, 3, 5}})), 1u);
  EXPECT_EQ(rank(BinMatrix(0, 4)), 0u);
}

TEST(Rank, BbHxIsThirty) {
  const CssCode c = bb72();
  EXPECT_EQ(oracle::rank(oracle::to_dense(c.hx)), 30u);  // independent elimination
  EXPECT_EQ(rank(c.hx), 30u);
  EXPECT_EQ(rank(c.hz), 30u);
}

TEST(Rank, MatchesDenseReferenceAndTranspose) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 40; ++t) {
    const BinMatrix m = oracle::random_matrix(12, 18, 0.15, rng);
    EXPECT_EQ(rank(m), oracle::rank(oracle::to_dense(m)));
    EXPECT_EQ(rank(m), rank(m.transpose()));
  }
}

TEST(Kernel, SmallCases) {
  EXPECT_TRUE(kernel_basis(BinMatrix::identity(4)).empty());
  const auto k = kernel_basis(BinMatrix(1, 2, {{0, 1}}));
  ASSERT_EQ(k.size(), 1u);
  EXPECT_EQ(k[0].support(), (std::vector<Index>{0, 1}));
}

TEST(Kernel, BbHzHasFortyTwo) { EXPECT_EQ(kernel_basis(bb72().hz).size(), 42u); }

TEST(Kernel, VectorsAreAnnihilatedAndIndependent) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 30; ++t) {
    const BinMatrix m = oracle::random_matrix(8, 16, 0.25, rng);
    const auto basis = kernel_basis(m);
    EXPECT_EQ(basis.size(), m.cols() - rank(m));
    std::vector<std::vector<Index>> rows;
    for (const auto& v : basis) {
      EXPECT_TRUE(matvec(m, v).is_zero());
      rows.push_back(v.support());
    }
    EXPECT_EQ(rank(BinMatrix(rows.size(), m.cols(), rows)), basis.size());
  }
}

TEST(SolveConstrained, ZeroSyndromeAndIdentity) {
  std::vector<Index> order{3, 1, 0, 2};
  const auto z = solve_constrained(BinMatrix::identity(4), BinVector(4), order);
  ASSERT_TRUE(z);
  EXPECT_TRUE(z->is_zero());
  const BinVector s(4, {0, 2});
  EXPECT_EQ(*solve_constrained(BinMatrix::identity(4), s, order), s);
}

TEST(SolveConstrained, RandomFullRankSystems) {
  std::mt19937_64 rng(31);
  int solved = 0;
  for (int t = 0; t < 100; ++t) {
    const BinMatrix m = oracle::random_matrix(8, 16, 0.35, rng);
    if (rank(m) != 8) continue;
    std::vector<Index> order(16);
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    const BinVector s = oracle::random_vector(8, 0.5, rng);
    const auto e = solve_constrained(m, s, order);
    ASSERT_TRUE(e);
    EXPECT_EQ(matvec(m, *e), s);
    // Support only on greedy pivots.
    const auto piv = oracle::pivots_in_order(oracle::to_dense(m), order);
    for (Index q : e->support()) EXPECT_NE(std::find(piv.begin(), piv.end(), q), piv.end());
    ++solved;
  }
  EXPECT_GT(solved, 20);
}

TEST(SolveConstrained, InfeasibleIsSignalled) {
  const BinMatrix m(2, 2, {{0, 1}, {0, 1}});
  std::vector<Index> order{0, 1};
  EXPECT_FALSE(solve_constrained(m, BinVector(2, {0}), order).has_value());
}

TEST(SolveConstrained, RejectsNonPermutation) {
  std::vector<Index> order{0, 0, 1};
  EXPECT_THROW(solve_constrained(BinMatrix::identity(3), BinVector(3), order), Error);
}

TEST(Alist, RoundTrip) {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 10; ++t) {
    const BinMatrix m = oracle::random_matrix(9, 13, 0.3, rng);
    std::istringstream in(to_alist(m));
    EXPECT_EQ(read_alist(in), m);
  }
  const CssCode c = bb72();
  std::istringstream in(to_alist(c.hz));
  EXPECT_EQ(read_alist(in), c.hz);
}

TEST(Alist, RejectsInconsistentLists) {
  std::istringstream in("2 1\n1 2\n1 1\n2\n1\n0\n1 2\n");
  EXPECT_THROW(read_alist(in), Error);
  std::istringstream truncated("3 2\n");
  EXPECT_THROW(read_alist(truncated), Error);
}
