#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "fixtures.hpp"
#include "skewlin/flat.hpp"
#include "skewlin/sampling.hpp"

using namespace skewlin;
using fixtures::fiber;
using fixtures::system;

namespace {

// Direct Koenigs limit 2^m f^m(x) for f(x) = 0.5 x + x^2 in long double.
long double koenigs_oracle(long double x) {
  long double scale = 1.0L;
  for (int m = 0; m < 64; ++m) {
    x = 0.5L * x + x * x;
    scale *= 2.0L;
  }
  return scale * x;
}

const BasePoint kOrigin{{0}, 0};

}  // namespace

TEST(Linearize, KoenigsMatchesDirectLimit) {
  const auto res = linearize(fixtures::koenigs<double>());
  EXPECT_EQ(res.degree, 2);
  EXPECT_LT(res.rate, 1.0);
  const auto ev = evaluate_linearization(res, kOrigin, {0.1}, 1e-12);
  EXPECT_NEAR(ev.value[0], static_cast<double>(koenigs_oracle(0.1L)), 1e-10);
  EXPECT_NEAR(ev.value[0], 0.15423, 5e-6);
}

TEST(Linearize, KoenigsOutsideDeltaBall) {
  const auto res = linearize(fixtures::koenigs<double>());
  for (double x : {-0.3, 0.2, 0.35}) {
    const auto ev = evaluate_linearization(res, kOrigin, {x}, 1e-12);
    EXPECT_NEAR(ev.value[0], static_cast<double>(koenigs_oracle(x)), 1e-10) << x;
  }
}

TEST(Linearize, FixesOriginWithIdentityDerivative) {
  const auto res = linearize(fixtures::two_symbol_cubic<double>());
  const BasePoint a{std::vector<int>(301, 1), 150};
  EXPECT_EQ(evaluate_linearization(res, a, {0.0, 0.0}, 1e-12).value, (std::vector<double>{0.0, 0.0}));
  const double h = 1e-5;
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> xp(2, 0.0), xm(2, 0.0);
    xp[j] = h;
    xm[j] = -h;
    const auto fp = evaluate_linearization(res, a, xp, 1e-14).value;
    const auto fm = evaluate_linearization(res, a, xm, 1e-14).value;
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR((fp[i] - fm[i]) / (2 * h), i == j ? 1.0 : 0.0, 1e-6);
  }
}

TEST(Linearize, LinearSystemIsIdentity) {
  auto res = linearize(system<double>(SymbolicBase::full_shift(2),
                                      {fiber<double>({0.5, 0.4}, {}, 1), fiber<double>({0.45, 0.3}, {}, 1)}));
  const BasePoint a{{0, 1, 1, 0, 1}, 2};
  const std::vector<double> x{0.3, -0.2};
  EXPECT_EQ(evaluate_linearization(res, a, x, 1e-12).value, x);
  EXPECT_EQ(invert_linearization(res, a, x, 1e-12), x);
  EXPECT_EQ(defect_report(res, {20, 3}).sup_defect, 0.0);
}

TEST(Linearize, PeriodTwoConjugacy) {
  auto res = linearize(fixtures::period_two<double>());
  const auto rep = defect_report(res, {50, 7, 0.3});
  EXPECT_LE(rep.sup_defect, 2e-12);
  EXPECT_EQ(rep.rows.size(), 50u);
}

TEST(Linearize, SubshiftConjugacyDefect) {
  auto res = linearize(fixtures::two_symbol_cubic<double>());
  const auto rep = defect_report(res, {100, 11});
  EXPECT_LE(rep.sup_defect, 1e-8);
  EXPECT_LE(rep.empirical_rate, rep.certified_rate + 0.05);
  EXPECT_DOUBLE_EQ(res.diagnostics, rep.sup_defect);
}

TEST(Linearize, IncrementsDecayWithinCertifiedRate) {
  const auto res = linearize(fixtures::koenigs<double>());
  const auto ev = evaluate_linearization(res, kOrigin, {res.delta}, 1e-15);
  const double ratio = fitted_ratio(ev.increments, 1e-15);
  EXPECT_GT(ratio, 0.0);
  EXPECT_LE(ratio, res.rate);
}

TEST(Linearize, UniqueAcrossIterationCaps) {
  const auto res = linearize(fixtures::two_symbol_cubic<double>());
  const BasePoint a{{0, 1, 1, 0, 1, 0, 0, 0, 1}, 4};
  const double tol = 1e-12;
  const auto v1 = evaluate_linearization(res, a, {0.01, -0.02}, tol);
  const auto v2 = evaluate_linearization(res, a, {0.01, -0.02}, tol * 1e-3);
  EXPECT_GT(v2.iterations, v1.iterations);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(v1.value[i], v2.value[i], 2 * tol);
}

TEST(Linearize, ShortItineraryReportsSensitivity) {
  const auto res = linearize(fixtures::two_symbol_cubic<double>());
  const auto ev = evaluate_linearization(res, BasePoint{{0, 1, 0}, 1}, {0.05, 0.05}, 1e-12);
  EXPECT_GT(ev.sensitivity, 0.0);
  EXPECT_LT(ev.sensitivity, 1e-2);
}

TEST(Linearize, SubshiftValueIndependentOfApproximant) {
  // h at sigma(a) through a's orbit segment and through its own segment
  const auto res = linearize(fixtures::two_symbol_cubic<double>());
  BasePoint a{{}, 200};
  UniformStream rng(5);
  for (int i = 0; i < 401; ++i) a.symbols.push_back(rng.next() < 0.5 ? 0 : 1);
  const std::vector<double> x{0.02, -0.01};
  const auto orbit = orbit_data(res, a, 64);
  const auto via_a = evaluate_on_orbit(res, orbit, x, 1e-13, 1);
  const auto direct = evaluate_linearization(res, res.system.base()->shift(a, 1), x, 1e-13);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(via_a.value[i], direct.value[i], 1e-12);
}

TEST(InvertLinearization, KoenigsOracle) {
  const auto res = linearize(fixtures::koenigs<double>());
  const double y = static_cast<double>(koenigs_oracle(0.1L));
  EXPECT_NEAR(invert_linearization(res, kOrigin, {y}, 1e-13)[0], 0.1, 1e-11);
}

TEST(InvertLinearization, RoundTrip) {
  const auto res = linearize(fixtures::two_symbol_cubic<double>());
  UniformStream rng(17);
  for (int k = 0; k < 100; ++k) {
    BasePoint a{{}, 40};
    for (int i = 0; i < 81; ++i) a.symbols.push_back(rng.next() < 0.5 ? 0 : 1);
    const std::vector<double> x{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    const auto y = evaluate_linearization(res, a, x, 1e-13).value;
    const auto back = invert_linearization(res, a, y, 1e-12);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(back[i], x[i], 1e-9);
  }
}

TEST(InvertLinearization, RejectsPointsOutsideTheImage) {
  const auto res = linearize(fixtures::koenigs<double>(0.5, 0.1));
  EXPECT_THROW(invert_linearization(res, kOrigin, {50.0}, 1e-12), InvalidArgument);
}

TEST(Linearize, ComplexFieldWithRealInputsStaysReal) {
  using C = std::complex<double>;
  const auto sys = fixtures::two_symbol_cubic<double>();
  const auto rr = linearize(sys);
  const auto rc = linearize(sys.transform<C>([](double v) { return C(v, 0.0); }));
  const BasePoint a{{1, 0, 0, 1, 1, 0, 1}, 3};
  const auto vr = evaluate_linearization(rr, a, {0.03, -0.04}, 1e-13).value;
  const auto vc = evaluate_linearization(rc, a, {C(0.03), C(-0.04)}, 1e-13).value;
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LE(std::abs(vc[i].imag()), 1e-12);
    EXPECT_NEAR(vc[i].real(), vr[i], 1e-12);
  }
}

TEST(Linearize, GenuinelyComplexMultiplier) {
  using C = std::complex<double>;
  const C l(0.3, 0.2);
  auto res = linearize(system<C>(SymbolicBase::full_shift(2),
                                 {fiber<C>({l}, {{0, MultiIndex{2}, C(0.1)}}, 2),
                                  fiber<C>({l}, {{0, MultiIndex{2}, C(-0.1)}}, 2)}));
  EXPECT_LE(defect_report(res, {100, 2}).sup_defect, 1e-8);
}

TEST(Linearize, RejectsResonance) {
  EXPECT_THROW(linearize(system<double>(SymbolicBase::finite({0}), {fiber<double>({0.25, 0.5}, {}, 2)})),
               HypothesisError);
}

TEST(Linearize, RejectsDegreeBelowMinimal) {
  FlatOptions opt;
  opt.degree = 1;
  EXPECT_THROW(linearize(fixtures::koenigs<double>(), opt), HypothesisError);
}

TEST(FittedRatio, GeometricSequence) {
  std::vector<double> inc;
  for (int m = 0; m < 20; ++m) inc.push_back(std::pow(0.3, m));
  EXPECT_NEAR(fitted_ratio(inc, 0.0), 0.3, 1e-12);
  EXPECT_EQ(fitted_ratio({1.0, 0.5}, 0.0), 0.0);
}
