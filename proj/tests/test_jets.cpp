#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <set>

#include "skewlin/errors.hpp"
#include "skewlin/jets.hpp"
#include "skewlin/multi_index.hpp"
#include "skewlin/sampling.hpp"

using namespace skewlin;

namespace {

JetMap<double> quad1d(double lin, double mono2, int r) {
  JetMap<double> j(1, r);
  j.set_monomial(0, MultiIndex{1}, lin);
  if (r >= 2) j.set_monomial(0, MultiIndex{2}, mono2);
  return j;
}

template <class S>
JetMap<S> random_jet(std::size_t n, int r, UniformStream& rng, bool unit_linear) {
  JetMap<S> j(n, r);
  const auto& set = j.index_set();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t rk = 1; rk < set.size(); ++rk) {
      const auto& k = set.at(rk);
      double v = rng.uniform(-1.0, 1.0);
      if (k.order() == 1) v = unit_linear ? (k[i] == 1 ? 1.0 : 0.0) : (k[i] == 1 ? 1.0 + 0.3 * v : 0.2 * v);
      j.taylor(i, rk) = S(v);
    }
  return j;
}

}  // namespace

TEST(MultiIndex, OrderAndFactorial) {
  MultiIndex k{2, 0, 3};
  EXPECT_EQ(k.order(), 5);
  EXPECT_EQ(k.factorial(), 12u);
}

TEST(MultiIndexSet, GradedOrderFirstEntryLargestFirst) {
  const auto set = MultiIndexSet::get(2, 2);
  ASSERT_EQ(set->size(), 6u);
  EXPECT_EQ(set->at(3), (MultiIndex{2, 0}));
  EXPECT_EQ(set->at(4), (MultiIndex{1, 1}));
  EXPECT_EQ(set->at(5), (MultiIndex{0, 2}));
}

TEST(MultiIndexSet, IterationIsTotalAndDuplicateFree) {
  for (std::size_t n = 1; n <= 3; ++n)
    for (int j = 0; j <= 5; ++j) {
      std::set<std::vector<int>> seen;
      std::size_t count = 0;
      for_each_of_order(n, j, [&](const MultiIndex& k) {
        EXPECT_EQ(k.order(), j);
        seen.insert(k.entries());
        ++count;
      });
      // binom(n + j - 1, j)
      double expect = 1.0;
      for (int t = 1; t <= j; ++t) expect = expect * static_cast<double>(n - 1 + t) / t;
      EXPECT_EQ(count, static_cast<std::size_t>(std::llround(expect)));
      EXPECT_EQ(seen.size(), count);
    }
}

TEST(JetCompose, IdentityIsNeutral) {
  const auto f = quad1d(1.0, 1.0, 2);
  EXPECT_EQ(jet_compose(f, JetMap<double>::identity(1, 2)), f);
  EXPECT_EQ(jet_compose(JetMap<double>::identity(1, 2), f), f);
}

TEST(JetCompose, SquareOfXPlusXSquared) {
  const auto f = quad1d(1.0, 1.0, 3);
  const auto g = jet_compose(f, f);
  EXPECT_DOUBLE_EQ(g.monomial(0, MultiIndex{1}), 1.0);
  EXPECT_DOUBLE_EQ(g.monomial(0, MultiIndex{2}), 2.0);
  EXPECT_DOUBLE_EQ(g.monomial(0, MultiIndex{3}), 2.0);
}

TEST(JetCompose, DiagonalLinear) {
  const auto a = JetMap<double>::diagonal({2.0, 3.0}, 3);
  const auto b = JetMap<double>::diagonal({5.0, 7.0}, 3);
  EXPECT_EQ(jet_compose(a, b), JetMap<double>::diagonal({10.0, 21.0}, 3));
}

TEST(JetCompose, ShapeMismatchThrows) {
  EXPECT_THROW(jet_compose(JetMap<double>::identity(1, 2), JetMap<double>::identity(1, 3)), InvalidArgument);
  EXPECT_THROW(jet_compose(JetMap<double>::identity(1, 2), JetMap<double>::identity(2, 2)), InvalidArgument);
}

TEST(JetCompose, AssociativeOnRandomTriples) {
  UniformStream rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_jet<double>(2, 4, rng, false);
    const auto b = random_jet<double>(2, 4, rng, false);
    const auto c = random_jet<double>(2, 4, rng, false);
    EXPECT_LE(jet_distance(jet_compose(a, jet_compose(b, c)), jet_compose(jet_compose(a, b), c)), 1e-12);
  }
}

TEST(JetInvert, Identity) {
  EXPECT_EQ(jet_invert(JetMap<double>::identity(2, 4)), JetMap<double>::identity(2, 4));
}

TEST(JetInvert, XPlusXSquared) {
  const auto g = jet_invert(quad1d(1.0, 1.0, 3));
  EXPECT_DOUBLE_EQ(g.monomial(0, MultiIndex{1}), 1.0);
  EXPECT_DOUBLE_EQ(g.monomial(0, MultiIndex{2}), -1.0);
  EXPECT_DOUBLE_EQ(g.monomial(0, MultiIndex{3}), 2.0);
}

TEST(JetInvert, SingularThrows) {
  EXPECT_THROW(jet_invert(JetMap<double>::diagonal({1.0, 0.0}, 2)), InvalidArgument);
}

TEST(JetInvert, TwoSidedOnRandomUnitJets) {
  UniformStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto j = random_jet<double>(2, 4, rng, true);
    const auto g = jet_invert(j);
    const auto id = JetMap<double>::identity(2, 4);
    EXPECT_LE(jet_distance(jet_compose(j, g), id), 1e-12);
    EXPECT_LE(jet_distance(jet_compose(g, j), id), 1e-12);
  }
}

TEST(JetInvert, ExactInRationals) {
  UniformStream rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto jd = random_jet<double>(2, 4, rng, false);
    const auto j = jd.transform<mpq_class>([](double v) { return mpq_class(v); });
    const auto g = jet_invert(j);
    const auto id = JetMap<mpq_class>::identity(2, 4);
    EXPECT_EQ(jet_compose(j, g), id);
    EXPECT_EQ(jet_compose(g, j), id);
  }
}

TEST(JetEvaluate, IdentityAndQuadratic) {
  const auto id = JetMap<double>::identity(2, 3);
  const auto y = jet_evaluate(id, {0.3, -0.1});
  EXPECT_DOUBLE_EQ(y[0], 0.3);
  EXPECT_DOUBLE_EQ(y[1], -0.1);
  EXPECT_NEAR(jet_evaluate(quad1d(1.0, 4.0, 2), {0.1})[0], 0.14, 1e-15);
}

TEST(JetEvaluate, CompositionTruncationScalesLikeEpsToRPlusOne) {
  UniformStream rng(5);
  const int r = 3;
  const auto a = random_jet<double>(2, r, rng, false);
  const auto b = random_jet<double>(2, r, rng, false);
  const auto ab = jet_compose(a, b);
  double ratio_max = 0.0;
  for (double eps : {1e-2, 1e-3}) {
    double err = 0.0;
    for (const auto& p : ball_samples(2, 50, eps)) {
      const auto lhs = jet_evaluate(ab, p);
      const auto rhs = jet_evaluate(a, jet_evaluate(b, p));
      err = std::max(err, std::max(std::abs(lhs[0] - rhs[0]), std::abs(lhs[1] - rhs[1])));
    }
    ratio_max = std::max(ratio_max, err / std::pow(eps, r + 1));
  }
  EXPECT_LT(ratio_max, 1e3);
}

TEST(JetConvention, TaylorCoefficientOfSquare) {
  PolyMap<double> f(1, 2);
  f.set_monomial(0, MultiIndex{1}, 0.5);
  f.set_monomial(0, MultiIndex{2}, 1.0);
  const auto j = JetMap<double>::from_poly(f, 2);
  EXPECT_DOUBLE_EQ(j.taylor(0, MultiIndex{1}), 0.5);
  EXPECT_DOUBLE_EQ(j.taylor(0, MultiIndex{2}), 2.0);
  const auto j1 = JetMap<double>::from_poly(f, 1);
  EXPECT_TRUE(j1.is_flat());
  EXPECT_EQ(j1.degree(), 1);
}

TEST(JetConvention, CrossTermHasUnitFactorial) {
  PolyMap<double> f(2, 2);
  f.set_monomial(0, MultiIndex{1, 1}, 0.7);
  const auto j = JetMap<double>::from_poly(f, 2);
  EXPECT_DOUBLE_EQ(j.taylor(0, MultiIndex{1, 1}), 0.7);
}

TEST(JetPredicates, LinearDiagonalAndFlat) {
  auto j = JetMap<double>::diagonal({0.5, 0.4}, 3);
  EXPECT_TRUE(j.is_linear_diagonal());
  EXPECT_TRUE(j.is_flat());
  j.set_monomial(0, MultiIndex{0, 1}, 0.1);
  EXPECT_FALSE(j.is_linear_diagonal());
  j.set_monomial(1, MultiIndex{2, 0}, 0.1);
  EXPECT_FALSE(j.is_flat());
}

TEST(JetField, RealInputsStayRealInComplexArithmetic) {
  UniformStream rng(9);
  const auto a = random_jet<double>(2, 3, rng, false).transform<std::complex<double>>([](double v) { return std::complex<double>(v); });
  const auto b = random_jet<double>(2, 3, rng, false).transform<std::complex<double>>([](double v) { return std::complex<double>(v); });
  const auto c = jet_invert(jet_compose(a, b));
  for (const auto& z : c.raw()) EXPECT_EQ(z.imag(), 0.0);
}
