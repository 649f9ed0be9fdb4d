#pragma once

#include <complex>
#include <tuple>
#include <vector>

#include "skewlin/cantor.hpp"
#include "skewlin/skew.hpp"

namespace fixtures {

using skewlin::BasePtr;
using skewlin::CylinderFunction;
using skewlin::FiberMap;
using skewlin::MultiIndex;
using skewlin::SkewSystem;
using skewlin::SymbolicBase;

/// (component, multiindex, monomial coefficient)
template <class S>
using Term = std::tuple<std::size_t, MultiIndex, S>;

template <class S>
FiberMap<S> fiber(const std::vector<S>& lambda, const std::vector<Term<S>>& terms, int degree) {
  const std::size_t n = lambda.size();
  FiberMap<S> f(n, degree);
  for (std::size_t i = 0; i < n; ++i) f.set_monomial(i, MultiIndex::unit(n, i), lambda[i]);
  for (const auto& [i, k, c] : terms) f.set_monomial(i, k, c);
  return f;
}

template <class S>
SkewSystem<S> system(BasePtr base, std::vector<FiberMap<S>> fibers) {
  return SkewSystem<S>(CylinderFunction<FiberMap<S>>(std::move(base), 0, std::move(fibers)));
}

/// f(x) = 0.5 x + c x^2 on a one-point base.
template <class S>
SkewSystem<S> koenigs(S lambda = S(0.5), S c = S(1)) {
  return system<S>(SymbolicBase::finite({0}), {fiber<S>({lambda}, {{0, MultiIndex{2}, c}}, 2)});
}

/// Swap base, lambda 1/2 on both points, x^2 coefficients c_a, c_b.
template <class S>
SkewSystem<S> period_two(S ca = S(1), S cb = S(0)) {
  const S half = S(1) / S(2);
  return system<S>(SymbolicBase::finite({1, 0}, {"a", "b"}),
                   {fiber<S>({half}, {{0, MultiIndex{2}, ca}}, 2), fiber<S>({half}, {{0, MultiIndex{2}, cb}}, 2)});
}

/// Full 2-shift, n = 2, lambda = (0.5, 0.4) with degree 2 and 3 terms of size <= 0.1.
template <class S>
SkewSystem<S> two_symbol_cubic() {
  const S l1 = S(0.5);
  const S l2 = S(0.4);
  auto f0 = fiber<S>({l1, l2},
                     {{0, MultiIndex{2, 0}, S(0.1)},
                      {0, MultiIndex{0, 2}, S(-0.05)},
                      {1, MultiIndex{1, 1}, S(0.08)},
                      {0, MultiIndex{1, 2}, S(0.03)},
                      {1, MultiIndex{3, 0}, S(-0.07)}},
                     3);
  auto f1 = fiber<S>({l1, l2},
                     {{0, MultiIndex{1, 1}, S(-0.09)},
                      {1, MultiIndex{2, 0}, S(0.06)},
                      {1, MultiIndex{0, 2}, S(0.1)},
                      {0, MultiIndex{3, 0}, S(0.04)},
                      {1, MultiIndex{0, 3}, S(-0.02)}},
                     3);
  return system<S>(SymbolicBase::full_shift(2), {f0, f1});
}

/// Inverse branch x -> A x + c plus extra monomials, A row-major.
inline skewlin::PolyMap<double> branch(const std::vector<double>& a, const std::vector<double>& c,
                                       const std::vector<Term<double>>& terms = {}, int degree = 1) {
  const std::size_t n = c.size();
  skewlin::PolyMap<double> b(n, degree);
  for (std::size_t i = 0; i < n; ++i) {
    b.set_monomial(i, MultiIndex::zero(n), c[i]);
    for (std::size_t j = 0; j < n; ++j) b.set_monomial(i, MultiIndex::unit(n, j), a[i * n + j]);
  }
  for (const auto& [i, k, v] : terms) b.set_monomial(i, k, v);
  return b;
}

inline skewlin::ExpandingModel model(std::vector<skewlin::PolyMap<double>> branches,
                                     std::vector<std::vector<int>> allowed = {}) {
  skewlin::ExpandingModel m;
  m.dimension = branches.front().dimension();
  m.branches = std::move(branches);
  m.allowed = std::move(allowed);
  m.validate();
  return m;
}

/// Middle-thirds Cantor set: g(x) = 3x mod the gaps, branches x/3 and (x + 2)/3.
inline skewlin::ExpandingModel cantor_thirds() {
  return model({branch({1.0 / 3.0}, {0.0}), branch({1.0 / 3.0}, {2.0 / 3.0})});
}

/// Branches x/3 + x^2/20 and (x + 2)/3 - x^2/30.
inline skewlin::ExpandingModel cantor_nonlinear() {
  return model({branch({1.0 / 3.0}, {0.0}, {{0, MultiIndex{2}, 1.0 / 20.0}}, 2),
                branch({1.0 / 3.0}, {2.0 / 3.0}, {{0, MultiIndex{2}, -1.0 / 30.0}}, 2)});
}

/// Two affine inverse branches of g(x) = A x + t in the plane, given A^{-1}.
inline skewlin::ExpandingModel planar(const std::vector<double>& a_inv, double shift = 0.44,
                                      const std::vector<Term<double>>& terms = {}) {
  const int degree = terms.empty() ? 1 : 2;
  return model({branch(a_inv, {-shift, 0.0}, terms, degree), branch(a_inv, {shift, 0.0}, terms, degree)});
}

/// g = diag(2, 3).
inline skewlin::ExpandingModel planar_diagonal() { return planar({0.5, 0.0, 0.0, 1.0 / 3.0}); }

/// g = [[2, 1], [0, 3]].
inline skewlin::ExpandingModel planar_triangular() { return planar({0.5, -1.0 / 6.0, 0.0, 1.0 / 3.0}); }

/// diag(2, 3) with quadratic terms in the inverse branches.
inline skewlin::ExpandingModel planar_nonlinear() {
  return planar({0.5, 0.0, 0.0, 1.0 / 3.0}, 0.4,
                {{0, MultiIndex{0, 2}, 0.03}, {1, MultiIndex{1, 1}, 0.02}, {0, MultiIndex{2, 0}, -0.02}});
}

/// Branches shifted by eps.
inline std::vector<skewlin::PolyMap<double>> shifted(const skewlin::ExpandingModel& m, double eps) {
  auto out = m.branches;
  for (auto& b : out)
    for (std::size_t i = 0; i < b.dimension(); ++i) b.coeff(i, 0) += eps;
  return out;
}

}  // namespace fixtures
