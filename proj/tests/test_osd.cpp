#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symbreak/bp.hpp"
#include "symbreak/codes.hpp"
#include "symbreak/osd.hpp"

using namespace symbreak;

namespace {

std::vector<double> random_llrs(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(2.0, 3.0);
  std::vector<double> l(n);
  for (auto& x : l) x = d(rng);
  return l;
}

double weight_of(const BinVector& e, const std::vector<double>& llrs) {
  const auto d = e.dense();
  return soft_weight(d, llrs);
}

// OSD-0 reference: non-pivots keep the hard decision, pivots are chosen by
// trying every assignment and keeping the one that matches the syndrome.
std::vector<int> osd0_reference(const oracle::Dense& h, const std::vector<int>& s,
                                const std::vector<double>& llrs) {
  const std::size_t n = llrs.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return std::abs(llrs[a]) < std::abs(llrs[b]); });
  const auto piv = oracle::pivots_in_order(h, order);
  std::vector<int> e(n);
  for (std::size_t q = 0; q < n; ++q) e[q] = llrs[q] < 0 ? 1 : 0;
  std::vector<std::vector<int>> hits;
  for (std::uint32_t m = 0; m < (1U << piv.size()); ++m) {
    for (std::size_t i = 0; i < piv.size(); ++i) e[piv[i]] = (m >> i) & 1U;
    if (oracle::apply(h, e) == s) hits.push_back(e);
  }
  if (hits.size() != 1) throw std::logic_error("pivot assignment not unique");
  return hits.front();
}

}  // namespace

TEST(Osd, ReliabilityOrderIsStable) {
  const std::vector<double> l{3.0, -1.0, 1.0, 0.0, -3.0};
  EXPECT_EQ(reliability_order(l), (std::vector<Index>{3, 1, 2, 0, 4}));
}

TEST(Osd, ConsistentHardDecisionIsUnchanged) {
  const BinMatrix h(2, 4, {{0, 1}, {1, 2, 3}});
  const std::vector<double> l{-2.0, 3.0, 1.0, -0.5};
  const BinVector hard(4, {0, 3});
  const BinVector s = matvec(h, hard);
  EXPECT_EQ(osd_postprocess(h, s, l, {}), hard);
  EXPECT_EQ(osd_postprocess(h, s, l, {OsdMode::osd_cs, 60}), hard);
}

TEST(Osd, GadgetGivesWeightOne) {
  const BinMatrix h(1, 2, {{0, 1}});
  const std::vector<double> l{1e-9, 1e-9};
  const auto e = osd_postprocess(h, BinVector(1, {0}), l, {});
  EXPECT_EQ(e.weight(), 1u);
  EXPECT_EQ(matvec(h, e), BinVector(1, {0}));
}

TEST(Osd, InfeasibleSyndromeThrows) {
  const BinMatrix h(2, 2, {{0, 1}, {0, 1}});
  const std::vector<double> l{1.0, 1.0};
  EXPECT_THROW(osd_postprocess(h, BinVector(2, {0}), l, {}), InfeasibleError);
  EXPECT_THROW(osd_postprocess(h, BinVector(3), l, {}), DimensionError);
}

TEST(Osd, MatchesPivotReferenceOnRandomSystems) {
  std::mt19937_64 rng(73);
  for (int t = 0; t < 200; ++t) {
    const BinMatrix h = oracle::random_matrix(10, 20, 0.3, rng);
    const BinVector s = matvec(h, oracle::random_vector(20, 0.3, rng));
    const auto l = random_llrs(20, rng);
    const BinVector e = osd_postprocess(h, s, l, {});
    EXPECT_EQ(matvec(h, e), s);
    EXPECT_EQ(oracle::to_dense(e), osd0_reference(oracle::to_dense(h), oracle::to_dense(s), l));
  }
}

TEST(Osd, CombinationSweepIsBestSingleOrPair) {
  std::mt19937_64 rng(79);
  for (int t = 0; t < 100; ++t) {
    const BinMatrix h = oracle::random_matrix(8, 16, 0.3, rng);
    const BinVector s = matvec(h, oracle::random_vector(16, 0.3, rng));
    const auto l = random_llrs(16, rng);
    const BinVector e0 = osd_postprocess(h, s, l, {});
    const BinVector cs = osd_postprocess(h, s, l, {OsdMode::osd_cs, 60});
    EXPECT_EQ(matvec(h, cs), s);
    EXPECT_LE(weight_of(cs, l), weight_of(e0, l) + 1e-12);
    // Reference: every single or pair flip of non-pivots, pivots re-solved.
    const auto dh = oracle::to_dense(h);
    std::vector<std::uint32_t> order(16);
    std::iota(order.begin(), order.end(), 0U);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return std::abs(l[a]) < std::abs(l[b]); });
    const auto piv = oracle::pivots_in_order(dh, order);
    std::vector<std::size_t> free;
    for (std::size_t q = 0; q < 16; ++q) {
      if (std::find(piv.begin(), piv.end(), q) == piv.end()) free.push_back(q);
    }
    double best = weight_of(e0, l);
    auto consider = [&](std::vector<std::size_t> flips) {
      auto fixed = l;
      for (auto q : flips) fixed[q] = -fixed[q];
      const auto e = osd0_reference(dh, oracle::to_dense(s), fixed);
      double w = 0;
      for (std::size_t q = 0; q < 16; ++q) w += e[q] ? l[q] : 0.0;
      best = std::min(best, w);
    };
    for (std::size_t a = 0; a < free.size(); ++a) {
      consider({free[a]});
      for (std::size_t b = a + 1; b < free.size(); ++b) consider({free[a], free[b]});
    }
    EXPECT_NEAR(weight_of(cs, l), best, 1e-9);
  }
}

TEST(Osd, Deterministic) {
  std::mt19937_64 rng(83);
  const BinMatrix h = oracle::random_matrix(12, 24, 0.25, rng);
  const BinVector s = matvec(h, oracle::random_vector(24, 0.2, rng));
  std::vector<double> l(24, 1.5);  // all ties
  EXPECT_EQ(osd_postprocess(h, s, l, {OsdMode::osd_cs, 60}), osd_postprocess(h, s, l, {OsdMode::osd_cs, 60}));
}

TEST(Osd, BbCodeOutputsSatisfySyndrome) {
  const CssCode c = make_bb_code(MonomialSum(6, 6, {{3, 0}, {0, 1}, {0, 2}}),
                                 MonomialSum(6, 6, {{0, 3}, {1, 0}, {2, 0}}));
  std::mt19937_64 rng(89);
  for (int t = 0; t < 50; ++t) {
    const BinVector s = matvec(c.hz, oracle::random_vector(72, 0.05, rng));
    const auto l = random_llrs(72, rng);
    EXPECT_EQ(matvec(c.hz, osd_postprocess(c.hz, s, l, {})), s);
    EXPECT_EQ(matvec(c.hz, osd_postprocess(c.hz, s, l, {OsdMode::osd_cs, 60})), s);
  }
}
