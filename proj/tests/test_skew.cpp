#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "skewlin/skew.hpp"

using namespace skewlin;
using fixtures::fiber;
using fixtures::system;

TEST(CheckHypotheses, SingleContraction) {
  const auto rep = check_hypotheses(fixtures::koenigs<double>(0.5, 0.0), 20, 200);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.h4_minimal_r, 2);
}

TEST(CheckHypotheses, EqualityResonance) {
  const auto sys = system<double>(SymbolicBase::finite({0}), {fiber<double>({0.25, 0.5}, {}, 1)});
  const auto rep = check_hypotheses(sys, 20, 200);
  EXPECT_FALSE(rep.h3.pass);
  ASSERT_TRUE(rep.h3.witness);
  EXPECT_EQ(rep.h3.witness->component, 0u);
  EXPECT_EQ(rep.h3.witness->k, (MultiIndex{0, 2}));
  EXPECT_TRUE(rep.h3.witness->equality);
}

TEST(CheckHypotheses, EqualityResonanceIsExactInRationals) {
  const auto sys = system<mpq_class>(SymbolicBase::finite({0}), {fiber<mpq_class>({mpq_class(1, 4), mpq_class(1, 2)}, {}, 1)});
  const auto rep = check_hypotheses(sys, 20, 50);
  ASSERT_TRUE(rep.h3.witness);
  EXPECT_EQ(rep.h3.witness->k, (MultiIndex{0, 2}));
}

TEST(CheckHypotheses, SignFlipAcrossBase) {
  const auto sys = system<double>(SymbolicBase::finite({1, 0}, {"a", "b"}),
                                  {fiber<double>({0.5, 0.3}, {}, 1), fiber<double>({0.5, 0.8}, {}, 1)});
  const auto rep = check_hypotheses(sys, 20, 100);
  EXPECT_FALSE(rep.h3.pass);
  ASSERT_TRUE(rep.h3.witness);
  EXPECT_EQ(rep.h3.witness->component, 0u);
  EXPECT_EQ(rep.h3.witness->k, (MultiIndex{0, 2}));
  EXPECT_FALSE(rep.h3.witness->equality);
  EXPECT_EQ(rep.h3.witness->window_a, "a");
  EXPECT_EQ(rep.h3.witness->window_b, "b");
  EXPECT_GT(rep.h3.witness->difference_a, 0.0);
  EXPECT_LT(rep.h3.witness->difference_b, 0.0);
}

TEST(CheckHypotheses, OffDiagonalLinearPartFailsH2) {
  auto f = fiber<double>({0.5, 0.4}, {{0, MultiIndex{0, 1}, 0.1}}, 1);
  const auto rep = check_hypotheses(system<double>(SymbolicBase::finite({0}), {f}), 20, 50);
  EXPECT_FALSE(rep.h2.pass);
  EXPECT_EQ(rep.h2.row, 0u);
  EXPECT_EQ(rep.h2.col, 1u);
}

TEST(CheckHypotheses, ExpansionFailsH1) {
  const auto rep = check_hypotheses(fixtures::koenigs<double>(0.9, 0.5), 20, 200);
  EXPECT_FALSE(rep.h1.pass);
}

TEST(CheckHypotheses, ZeroSamplesThrows) {
  EXPECT_THROW(check_hypotheses(fixtures::koenigs<double>(), 20, 0), InvalidArgument);
}

TEST(CheckHypotheses, MinimalRBracketsOnEveryWindowInOneDimension) {
  // with a single multiplier per window, Lambda = mu, so the property
  // Lambda^r < mu <= Lambda^{r-1} holds exactly at r = 2
  const auto rep = check_hypotheses(fixtures::two_symbol_cubic<double>(), 20, 100);
  ASSERT_TRUE(rep.h4_minimal_r);
  const int r = *rep.h4_minimal_r;
  EXPECT_EQ(r, 2);  // 0.5^2 = 0.25 < 0.4 <= 0.5
  EXPECT_LT(std::pow(rep.Lambda, r), rep.mu);
  EXPECT_LE(rep.mu, std::pow(rep.Lambda, r - 1));
}

TEST(CheckHypotheses, InvariantUnderRelabelling) {
  const auto f0 = fiber<double>({0.5, 0.3}, {}, 1);
  const auto f1 = fiber<double>({0.6, 0.35}, {}, 1);
  const auto a = check_hypotheses(system<double>(SymbolicBase::finite({1, 0}), {f0, f1}), 20, 50);
  const auto b = check_hypotheses(system<double>(SymbolicBase::finite({1, 0}), {f1, f0}), 20, 50);
  EXPECT_EQ(a.passed(), b.passed());
  EXPECT_EQ(a.h4_minimal_r, b.h4_minimal_r);
  ASSERT_EQ(a.h3.signs.size(), b.h3.signs.size());
  for (std::size_t i = 0; i < a.h3.signs.size(); ++i) EXPECT_EQ(a.h3.signs[i].sign, b.h3.signs[i].sign);
}

TEST(ConjugateByJet, IdentityLeavesSystemUnchanged) {
  const auto sys = fixtures::period_two<double>(1.0, 0.5);
  const auto h = CylinderFunction<JetMap<double>>::constant(sys.base(), JetMap<double>::identity(1, 2));
  const auto out = conjugate_by_jet(sys, h);
  for (std::size_t w = 0; w < sys.fibers().size(); ++w) EXPECT_EQ(out.fibers()[w], sys.fibers()[w]);
}

TEST(ConjugateByJet, KoenigsQuadraticIsRemoved) {
  const auto sys = fixtures::koenigs<double>();
  JetMap<double> h(1, 2);
  h.set_monomial(0, MultiIndex{1}, 1.0);
  h.set_monomial(0, MultiIndex{2}, 4.0);
  const auto out = conjugate_by_jet(sys, CylinderFunction<JetMap<double>>::constant(sys.base(), h));
  EXPECT_LE(std::abs(out.fibers()[0].monomial(0, MultiIndex{2})), 1e-12);
}

TEST(ConjugateByJet, InverseFamilyRecoversJets) {
  const auto sys = fixtures::two_symbol_cubic<double>();
  const auto h = CylinderFunction<JetMap<double>>::tabulate(sys.base(), 0, [](std::span<const int> w) {
    JetMap<double> j = JetMap<double>::identity(2, 3);
    j.set_monomial(0, MultiIndex{1, 1}, 0.2 + 0.1 * w[0]);
    j.set_monomial(1, MultiIndex{0, 3}, -0.3 * w[0]);
    return j;
  });
  const auto hinv = h.map<JetMap<double>>([](const JetMap<double>& j) { return jet_invert(j); });
  const auto there = conjugate_by_jet(sys, h);
  EXPECT_EQ(there.depth(), 1);
  const auto back = conjugate_by_jet(there, hinv.refined(1));
  const auto orig = sys.jets(3).refined(back.depth());
  for (std::size_t w = 0; w < orig.size(); ++w)
    EXPECT_LE(jet_distance(jet_of_map(back.fibers()[w], 3), orig[w]), 1e-12);
}

TEST(ContractionRates, LinearDiagonal) {
  const auto sys = system<double>(SymbolicBase::finite({0}), {fiber<double>({0.5, 0.4}, {}, 1)});
  for (double delta : {0.5, 0.1}) {
    const auto rates = contraction_rates(sys, 2, delta);
    EXPECT_NEAR(rates.C, 0.625, 1e-12);
    EXPECT_DOUBLE_EQ(rates.mu[0], 0.4);
    EXPECT_DOUBLE_EQ(rates.Lambda[0], 0.5);
    EXPECT_EQ(rates.M, 0.0);
  }
}

TEST(ContractionRates, MonotoneInDelta) {
  const auto sys = fixtures::two_symbol_cubic<double>();
  double prev = 1e300;
  for (double delta : {0.2, 0.1, 0.05}) {
    const auto rates = contraction_rates(sys, 2, delta);
    EXPECT_LE(rates.C, prev + 1e-12);
    EXPECT_LE(rates.mu[0], rates.Lambda[0]);
    prev = rates.C;
  }
  EXPECT_GE(prev, 0.5 * 0.5 / 0.4 - 1e-12);
}

TEST(SelectDelta, KoenigsExample) {
  // C(d) = (0.5 + 2d)^2 / 0.5, M = 2 / 0.5: rate < 1 first at d = 1/32
  const auto rates = select_delta(fixtures::koenigs<double>(), 2);
  EXPECT_DOUBLE_EQ(rates.delta, 1.0 / 32);
  EXPECT_NEAR(rates.C, 0.5625 * 0.5625 / 0.5, 1e-12);
  EXPECT_NEAR(rates.M, 4.0, 1e-12);
  EXPECT_LT(rates.rate(), 1.0);
  EXPECT_THROW(select_delta(fixtures::koenigs<double>(), 2, 64, 0.25), ConvergenceError);
}
