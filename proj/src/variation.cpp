#include "skewlin/variation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "skewlin/linalg.hpp"
#include "skewlin/neumann.hpp"

namespace skewlin {

namespace {

Vec axpy(double a, const Vec& x, const Vec& y) {
  Vec out(y);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * x[i];
  return out;
}

/// Central difference of g at `at` along dir, taken on the unit direction and rescaled.
Vec central_difference(const std::function<Vec(const Vec&)>& g, const Vec& at, const Vec& dir) {
  const double len = max_norm(dir);
  if (len == 0.0) return Vec(g(at).size(), 0.0);
  const double step = 1e-6 * std::max(1.0, max_norm(at)) / len;
  const Vec plus = g(axpy(step, dir, at));
  const Vec minus = g(axpy(-step, dir, at));
  Vec out(plus.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (plus[i] - minus[i]) / (2.0 * step);
  return out;
}

template <class S>
FiberMap<Dual<S>> dual_fiber(const FiberMap<S>& f, const FiberMap<S>& g) {
  const int r = std::max(f.degree(), g.degree());
  const auto ff = f.with_degree(r);
  const auto gg = g.with_degree(r);
  FiberMap<Dual<S>> out(ff.dimension(), r);
  for (std::size_t i = 0; i < ff.dimension(); ++i)
    for (std::size_t k = 0; k < ff.index_set().size(); ++k) out.coeff(i, k) = Dual<S>(ff.coeff(i, k), gg.coeff(i, k));
  return out;
}

template <class S>
S eps_part(const Dual<S>& d) {
  return d.eps;
}

}  // namespace

Vec iterate_fixed_point(const std::function<Vec(const Vec&, const Vec&)>& rho, const Vec& u, Vec v0, double k,
                        double tol, int max_iterations) {
  if (!(k < 1.0)) throw InvalidArgument("fixed-point iteration needs k < 1");
  Vec v = std::move(v0);
  double inc = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vec next = rho(u, v);
    inc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) inc = std::max(inc, std::abs(next[i] - v[i]));
    v = std::move(next);
    if (inc <= tol * (1.0 - k)) return v;
  }
  throw ConvergenceError("fixed-point iteration did not converge", inc);
}

FixedPointDerivative fixed_point_derivative(VariationProblem p, const Vec& h, double tol) {
  if (!p.rho) throw InvalidArgument("variation problem without rho");
  if (!(p.k >= 0.0 && p.k < 1.0)) throw InvalidArgument("contraction bound must lie in [0, 1)");
  if (h.size() != p.u.size()) throw InvalidArgument("direction does not match the parameter dimension");
  if (p.phi.empty()) throw InvalidArgument("variation problem needs a state dimension: set phi");
  p.phi = iterate_fixed_point(p.rho, p.u, p.phi, p.k, 1e-3 * tol);

  const auto d1 = p.d1 ? p.d1 : [&](const Vec& dir) {
    return central_difference([&](const Vec& uu) { return p.rho(uu, p.phi); }, p.u, dir);
  };
  const auto d2 = p.d2 ? p.d2 : [&](const Vec& dir) {
    return central_difference([&](const Vec& vv) { return p.rho(p.u, vv); }, p.phi, dir);
  };

  const std::size_t m = p.phi.size();
  for (std::size_t j = 0; j < m; ++j) {
    Vec e(m, 0.0);
    e[j] = 1.0;
    const double norm = max_norm(d2(e));
    if (norm > p.k * (1.0 + 1e-9) + 1e-12)
      throw InvalidArgument("sampled |D2 rho| = " + format_real(norm) + " exceeds the contraction bound " +
                            format_real(p.k));
  }

  const auto add = [](const Vec& a, const Vec& b) { return axpy(1.0, b, a); };
  const auto norm = [](const Vec& x) { return max_norm(x); };
  const auto series = neumann_series(d2, d1(h), p.k, tol, add, norm);
  return {series.value, series.terms, series.last_increment, series.truncation_bound};
}

template <class S>
SkewSystem<Dual<S>> perturbation_system(const SkewSystem<S>& sys, const SkewSystem<S>& direction) {
  if (sys.base() != direction.base()) throw InvalidArgument("direction lives on a different base");
  if (sys.dimension() != direction.dimension()) throw InvalidArgument("direction has a different fiber dimension");
  if (!direction.is_diagonal())
    throw InvalidArgument("direction must have diagonal linear parts");
  return SkewSystem<Dual<S>>(zip_with<FiberMap<Dual<S>>>(
      sys.fibers(), direction.fibers(), [](const FiberMap<S>& f, const FiberMap<S>& g) { return dual_fiber(f, g); }));
}

template <class S>
CoefficientDerivative<S> coefficient_derivative(const SkewSystem<S>& sys, const SkewSystem<S>& direction, int r,
                                                const FormalOptions& options) {
  const auto dual = solve_formal(perturbation_system(sys, direction), r, options);
  CoefficientDerivative<S> out;
  out.value = solve_formal(sys, r, options);
  out.jets = dual.jets.template map<JetMap<S>>([](const JetMap<Dual<S>>& j) {
    return j.template transform<S>(eps_part<S>);
  });
  for (const auto& fam : dual.coefficients) out.families.push_back(fam.q.template map<S>(eps_part<S>));
  return out;
}

template <class S>
CylinderFunction<JetMap<S>> coefficient_finite_difference(const SkewSystem<S>& sys, const SkewSystem<S>& direction,
                                                          int r, double step, const FormalOptions& options) {
  const auto shifted = [&](double t) {
    return SkewSystem<S>(zip_with<FiberMap<S>>(sys.fibers(), direction.fibers(),
                                               [&](const FiberMap<S>& f, const FiberMap<S>& g) {
                                                 const int d = std::max(f.degree(), g.degree());
                                                 auto out = f.with_degree(d);
                                                 const auto gg = g.with_degree(d);
                                                 for (std::size_t i = 0; i < out.dimension(); ++i)
                                                   for (std::size_t k = 0; k < out.index_set().size(); ++k)
                                                     out.coeff(i, k) = out.coeff(i, k) + S(t) * gg.coeff(i, k);
                                                 return out;
                                               }));
  };
  const auto plus = solve_formal(shifted(step), r, options).jets;
  const auto minus = solve_formal(shifted(-step), r, options).jets;
  return zip_with<JetMap<S>>(plus, minus, [&](const JetMap<S>& a, const JetMap<S>& b) {
    return (a - b).template transform<S>([&](const S& v) { return v / S(2.0 * step); });
  });
}

#define SKEWLIN_INSTANTIATE_VARIATION(S)                                                                   \
  template SkewSystem<Dual<S>> perturbation_system(const SkewSystem<S>&, const SkewSystem<S>&);            \
  template CoefficientDerivative<S> coefficient_derivative(const SkewSystem<S>&, const SkewSystem<S>&, int, \
                                                           const FormalOptions&);                           \
  template CylinderFunction<JetMap<S>> coefficient_finite_difference(const SkewSystem<S>&,                  \
                                                                     const SkewSystem<S>&, int, double,     \
                                                                     const FormalOptions&);

SKEWLIN_INSTANTIATE_VARIATION(double)
SKEWLIN_INSTANTIATE_VARIATION(std::complex<double>)

}  // namespace skewlin
