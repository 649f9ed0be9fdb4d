#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "skewlin/variation.hpp"

using namespace skewlin;
using fixtures::fiber;
using fixtures::system;

TEST(FixedPointDerivative, AffineFamily) {
  VariationProblem p;
  p.rho = [](const Vec& u, const Vec& v) { return Vec{0.5 * v[0] + u[0]}; };
  p.k = 0.5;
  p.u = {3.0};
  p.phi = {0.0};
  EXPECT_NEAR(fixed_point_derivative(p, {1.0}, 1e-13).value[0], 2.0, 1e-8);  // difference surrogates
  p.d1 = [](const Vec& h) { return h; };
  p.d2 = [](const Vec& w) { return Vec{0.5 * w[0]}; };
  const auto d = fixed_point_derivative(p, {1.0}, 1e-13);
  EXPECT_NEAR(d.value[0], 2.0, 1e-12);
  EXPECT_LE(d.truncation_bound, 1e-12);
}

TEST(FixedPointDerivative, NoParameterDependence) {
  VariationProblem p;
  p.rho = [](const Vec&, const Vec& v) { return Vec{0.3 * v[0] + 2.0}; };
  p.k = 0.3;
  p.u = {1.0};
  p.phi = {0.0};
  EXPECT_NEAR(fixed_point_derivative(p, {1.0}, 1e-13).value[0], 0.0, 1e-9);
}

TEST(FixedPointDerivative, QuadraticParameterMatchesFiniteDifference) {
  const auto rho = [](const Vec& u, const Vec& v) { return Vec{0.5 * v[0] + u[0] * u[0]}; };
  VariationProblem p;
  p.rho = rho;
  p.d1 = [](const Vec& h) { return Vec{2.0 * h[0]}; };
  p.d2 = [](const Vec& w) { return Vec{0.5 * w[0]}; };
  p.k = 0.5;
  p.u = {1.0};
  p.phi = {0.0};
  const double analytic = fixed_point_derivative(p, {1.0}, 1e-13).value[0];
  const double step = 1e-5;
  const double fp = iterate_fixed_point(rho, {1.0 + step}, {0.0}, 0.5, 1e-15)[0];
  const double fm = iterate_fixed_point(rho, {1.0 - step}, {0.0}, 0.5, 1e-15)[0];
  EXPECT_NEAR(analytic, 4.0, 1e-12);
  EXPECT_NEAR(analytic, (fp - fm) / (2 * step), 1e-6);
}

TEST(FixedPointDerivative, TwoDimensionalStateWithSurrogates) {
  // rho(u, v) = A v + (u, u^2) with A = [[0.3, 0.1], [0, 0.2]]: dphi = (I - A)^{-1} (1, 2u)
  VariationProblem p;
  p.rho = [](const Vec& u, const Vec& v) { return Vec{0.3 * v[0] + 0.1 * v[1] + u[0], 0.2 * v[1] + u[0] * u[0]}; };
  p.k = 0.4;
  p.u = {0.7};
  p.phi = {0.0, 0.0};
  const auto d = fixed_point_derivative(p, {1.0}, 1e-12);
  const double b0 = 1.0;
  const double b1 = 1.4;
  const double y1 = b1 / 0.8;
  const double y0 = (b0 + 0.1 * y1) / 0.7;
  EXPECT_NEAR(d.value[0], y0, 1e-8);
  EXPECT_NEAR(d.value[1], y1, 1e-8);
}

TEST(FixedPointDerivative, RejectsUnderstatedContraction) {
  VariationProblem p;
  p.rho = [](const Vec& u, const Vec& v) { return Vec{0.8 * v[0] + u[0]}; };
  p.k = 0.5;
  p.u = {0.0};
  p.phi = {0.0};
  EXPECT_THROW(fixed_point_derivative(p, {1.0}, 1e-12), InvalidArgument);
}

namespace {

SkewSystem<double> quadratic_direction(const BasePtr& base, std::vector<double> c) {
  std::vector<FiberMap<double>> fibers;
  for (double v : c) fibers.push_back(fiber<double>({0.0}, {{0, MultiIndex{2}, v}}, 2));
  return system<double>(base, fibers);
}

}  // namespace

TEST(CoefficientDerivative, KoenigsInC) {
  const auto sys = fixtures::koenigs<double>();
  const auto d = coefficient_derivative(sys, quadratic_direction(sys.base(), {1.0}), 2);
  EXPECT_NEAR(d.families[0][0], 8.0, 1e-11);
  EXPECT_NEAR(d.jets[0].monomial(0, MultiIndex{2}), 4.0, 1e-11);
  EXPECT_NEAR(d.value.jets[0].monomial(0, MultiIndex{2}), 4.0, 1e-12);
}

TEST(CoefficientDerivative, PeriodTwoPerturbingOneSymbol) {
  // q_a = 0.5 q_b + 4 c_a, q_b = 0.5 q_a + 4 c_b; d/dc_a: (4 / 0.75, 2 / 0.75)
  const auto sys = fixtures::period_two<double>();
  const auto d = coefficient_derivative(sys, quadratic_direction(sys.base(), {1.0, 0.0}), 2);
  EXPECT_NEAR(d.families[0][0], 16.0 / 3, 1e-11);
  EXPECT_NEAR(d.families[0][1], 8.0 / 3, 1e-11);
}

TEST(CoefficientDerivative, ZeroDirection) {
  const auto sys = fixtures::two_symbol_cubic<double>();
  const auto zero = system<double>(sys.base(), {fiber<double>({0.0, 0.0}, {}, 3), fiber<double>({0.0, 0.0}, {}, 3)});
  const auto d = coefficient_derivative(sys, zero, 3);
  for (const auto& j : d.jets.values()) EXPECT_EQ(jet_norm(j), 0.0);
}

TEST(CoefficientDerivative, AgreesWithCentralDifferences) {
  const auto sys = fixtures::two_symbol_cubic<double>();
  const auto dir = system<double>(
      sys.base(), {fiber<double>({0.05, -0.02}, {{0, MultiIndex{2, 0}, 0.3}, {1, MultiIndex{1, 2}, -0.2}}, 3),
                   fiber<double>({0.01, 0.03}, {{1, MultiIndex{0, 2}, 0.1}, {0, MultiIndex{1, 1}, 0.4}}, 3)});
  FormalOptions opt;
  opt.window_budget = 256;
  const auto d = coefficient_derivative(sys, dir, 3, opt);
  const auto fd = coefficient_finite_difference(sys, dir, 3, 1e-4, opt);
  const auto values = d.value.jets.refined(d.jets.depth());
  ASSERT_EQ(fd.depth(), d.jets.depth());
  for (std::size_t w = 0; w < d.jets.size(); ++w)
    for (std::size_t t = 0; t < d.jets[w].raw().size(); ++t)
      EXPECT_NEAR(d.jets[w].raw()[t], fd[w].raw()[t], 1e-5 * (1.0 + std::abs(values[w].raw()[t])));
}

TEST(CoefficientDerivative, LinearInTheDirection) {
  const auto sys = fixtures::period_two<double>(1.0, 0.5);
  const auto dir = quadratic_direction(sys.base(), {0.7, -0.3});
  const auto dir2 = quadratic_direction(sys.base(), {1.4, -0.6});
  const auto d1 = coefficient_derivative(sys, dir, 2);
  const auto d2 = coefficient_derivative(sys, dir2, 2);
  for (std::size_t w = 0; w < 2; ++w)
    for (std::size_t t = 0; t < d1.jets[w].raw().size(); ++t)
      EXPECT_NEAR(d2.jets[w].raw()[t], 2.0 * d1.jets[w].raw()[t], 1e-10);
}

TEST(CoefficientDerivative, RejectsNonDiagonalDirection) {
  const auto sys = system<double>(SymbolicBase::finite({0}), {fiber<double>({0.5, 0.4}, {}, 2)});
  const auto dir = system<double>(sys.base(), {fiber<double>({0.0, 0.0}, {{0, MultiIndex{0, 1}, 1.0}}, 2)});
  EXPECT_THROW(coefficient_derivative(sys, dir, 2), InvalidArgument);
}
