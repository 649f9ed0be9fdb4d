#include "skewlin/formal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "skewlin/neumann.hpp"

namespace skewlin {

namespace {

template <class S>
S power_of_multipliers(const std::vector<S>& lambda, const MultiIndex& k) {
  return k.power_of(lambda);
}

template <class S>
struct OpSolution {
  CylinderFunction<S> q;
  int iterations = 0;
  double bound = 0.0;
  double truncation_bound = 0.0;
  bool exact = false;
  bool converged = true;
};

template <class S>
OpSolution<S> solve_op(const ShiftAffineOp<S>& op, double k, const FixedPointOptions& fpo) {
  auto res = solve_affine_fixed_point(op, k, fpo);
  return {std::move(res.value), res.iterations, res.achieved_bound, res.truncation_bound, res.exact, res.converged};
}

/// Value part by the affine solver; tangent part as the derivative of the
/// fixed point, sum_m (D2 rho)^m D1 rho with D2 rho = coefficient * pullback.
template <class T>
OpSolution<Dual<T>> solve_op(const ShiftAffineOp<Dual<T>>& op, double k, const FixedPointOptions& fpo) {
  const auto val = [](const Dual<T>& d) { return d.val; };
  const auto eps = [](const Dual<T>& d) { return d.eps; };
  const ShiftAffineOp<T> vop{op.direction, op.coefficient.template map<T>(val), op.offset.template map<T>(val)};
  auto base_res = solve_affine_fixed_point(vop, k, fpo);
  const auto& q0 = base_res.value;

  const ShiftAffineOp<T> dop{op.direction, op.coefficient.template map<T>(eps), op.offset.template map<T>(eps)};
  const int cap = vop.offset.base()->is_finite() ? 0 : std::max(fpo.max_depth, q0.depth());
  auto rhs = restrict_depth(dop(q0), cap);
  const auto apply = [&](const CylinderFunction<T>& x) { return restrict_depth(vop.linear_part(x), cap); };
  const auto add = [](const CylinderFunction<T>& a, const CylinderFunction<T>& b) {
    return zip_with<T>(a, b, [](const T& u, const T& v) { return u + v; });
  };
  const auto norm = [](const CylinderFunction<T>& x) { return sup_magnitude(x); };
  const auto tangent = neumann_series(apply, std::move(rhs), k, fpo.tol, add, norm);

  OpSolution<Dual<T>> out;
  out.q = zip_with<Dual<T>>(q0, tangent.value, [](const T& v, const T& e) { return Dual<T>(v, e); });
  out.iterations = base_res.iterations + tangent.terms;
  out.bound = std::max(base_res.achieved_bound, tangent.truncation_bound);
  out.truncation_bound = base_res.truncation_bound;
  out.exact = base_res.exact;
  out.converged = base_res.converged;
  return out;
}

std::string describe_index(std::size_t i, const MultiIndex& k) {
  std::ostringstream os;
  os << "i=" << i + 1 << ", k=" << k.to_string();
  return os.str();
}

}  // namespace

template <class S>
const CoefficientFamily<S>& FormalSolution<S>::coefficient(std::size_t i, const MultiIndex& k) const {
  for (const auto& c : coefficients)
    if (c.component == i && c.k == k) return c;
  throw InvalidArgument("no coefficient family for " + describe_index(i, k));
}

template <class S>
double operator_contraction(const SkewSystem<S>& sys, int r) {
  const auto lambda = sys.multipliers();
  const std::size_t n = sys.dimension();
  double worst = 0.0;
  if (r < 2) return worst;
  const auto set = MultiIndexSet::get(n, r);
  for (const auto& l : lambda.values())
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t rk = set->order_begin(2); rk < set->size(); ++rk) {
        const double li = magnitude(l[i]);
        const double lk = magnitude(power_of_multipliers(l, set->at(rk)));
        worst = std::max(worst, std::min(lk / li, li / lk));
      }
  return worst;
}

template <class S>
FormalSolution<S> solve_formal(const SkewSystem<S>& sys, int r, const FormalOptions& options) {
  if (r < 1) throw InvalidArgument("formal degree must be at least 1");
  if (!sys.is_diagonal()) throw HypothesisError("(H2) fails: linear part is not diagonal");
  const std::size_t n = sys.dimension();
  const auto& base = sys.base();
  const auto lambda_f = sys.multipliers();
  for (const auto& l : lambda_f.values())
    for (const auto& v : l)
      if (v == S(0)) throw HypothesisError("(H1) fails: zero multiplier");

  int cap = options.max_depth;
  if (!base->is_finite()) {
    while (cap > 0 && base->window_count(cap + 1) > options.window_budget) --cap;
    cap = std::max(cap, sys.depth());
  }

  FormalSolution<S> sol;
  sol.degree = r;
  CylinderFunction<JetMap<S>> h = CylinderFunction<JetMap<S>>::constant(base, JetMap<S>::identity(n, r));
  const auto set = MultiIndexSet::get(n, r);

  for (int j = 2; j <= r; ++j) {
    const SkewSystem<S> g = conjugate_by_jet(sys, h);
    const auto gjets = g.jets(r);
    const auto lam = g.multipliers();
    std::vector<const CoefficientFamily<S>*> stage;
    const std::size_t first = sol.coefficients.size();

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t rk = set->order_begin(j); rk < set->order_end(j); ++rk) {
        const MultiIndex& k = set->at(rk);
        const int sign = resonance_sign(lambda_f, i, k);
        if (sign == 0)
          throw HypothesisError("(H3) fails: resonance at " + describe_index(i, k) +
                                " (|lambda_i| - |lambda^k| vanishes or changes sign)");
        const bool forward = sign > 0;

        std::vector<S> coef(lam.size());
        std::vector<S> off(lam.size());
        for (std::size_t w = 0; w < lam.size(); ++w) {
          const S li = lam[w][i];
          const S lk = power_of_multipliers(lam[w], k);
          const S b = gjets[w].taylor(i, rk);
          if (forward) {
            coef[w] = lk / li;
            off[w] = b / li;
          } else {
            coef[w] = li / lk;
            off[w] = S(0) - b / lk;
          }
        }
        CylinderFunction<S> c(base, g.depth(), std::move(coef));
        CylinderFunction<S> b(base, g.depth(), std::move(off));
        if (!forward) {
          c = shift_pullback(c, ShiftDirection::backward);
          b = shift_pullback(b, ShiftDirection::backward);
        }
        const double k_op = sup_magnitude(c);
        if (!(k_op < 1.0))
          throw HypothesisError("operator for " + describe_index(i, k) + " is not a contraction (k = " +
                                format_real(k_op) + ")");

        FixedPointOptions fpo;
        fpo.tol = options.tol;
        fpo.max_depth = cap;
        fpo.allow_truncation = !options.strict;
        const double bnorm = sup_magnitude(b);
        if (k_op > 0.0 && bnorm > 0.0)
          fpo.max_iterations =
              std::max(10, static_cast<int>(std::ceil(std::log(options.tol * (1.0 - k_op) / bnorm) / std::log(k_op))) + 10);
        else
          fpo.max_iterations = 10;

        const ShiftAffineOp<S> op{forward ? ShiftDirection::forward : ShiftDirection::backward, c, b};
        auto res = solve_op(op, k_op, fpo);
        CoefficientFamily<S> fam;
        fam.component = i;
        fam.k = k;
        fam.q = std::move(res.q);
        fam.forward = forward;
        fam.contraction = k_op;
        fam.iterations = res.iterations;
        fam.bound = res.bound;
        fam.truncation_bound = res.truncation_bound;
        fam.exact = res.exact;
        sol.truncation_bound = std::max(sol.truncation_bound, res.truncation_bound);
        sol.converged = sol.converged && res.converged;
        sol.coefficients.push_back(std::move(fam));
      }
    }

    int dq = 0;
    for (std::size_t c = first; c < sol.coefficients.size(); ++c) dq = std::max(dq, sol.coefficients[c].q.depth());
    const auto Q = CylinderFunction<JetMap<S>>::tabulate(base, dq, [&](std::span<const int> w) {
      JetMap<S> jet = JetMap<S>::identity(n, r);
      for (std::size_t c = first; c < sol.coefficients.size(); ++c) {
        const auto& fam = sol.coefficients[c];
        jet.set_taylor(fam.component, fam.k, fam.q.at_window(w));
      }
      return jet;
    });
    h = zip_with<JetMap<S>>(Q, h, [](const JetMap<S>& a, const JetMap<S>& b) { return jet_compose(a, b); });
  }

  sol.jets = std::move(h);
  double res = 0.0;
  const auto residual = residual_jet(sys, sol);
  for (const auto& j : residual.values()) res = std::max(res, jet_norm(j));
  sol.residual = res;
  return sol;
}

template <class S>
CylinderFunction<JetMap<S>> residual_jet(const SkewSystem<S>& sys, const FormalSolution<S>& sol) {
  const auto& base = sys.base();
  const auto& h = sol.jets;
  const int r = sol.degree;
  const int depth = std::max(sys.depth(), h.depth() + 1);
  return CylinderFunction<JetMap<S>>::tabulate(base, depth, [&](std::span<const int> w) {
    const auto& fpoly = sys.fiber_at_window(w);
    const JetMap<S> f = jet_of_map(fpoly, r);
    const auto next = shifted_word(*base, w, ShiftDirection::forward);
    std::vector<S> lambda(sys.dimension());
    for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] = f.taylor(i, MultiIndex::unit(sys.dimension(), i));
    const JetMap<S> lhs = jet_compose(h.at_window(next), f);
    const JetMap<S> rhs = jet_compose(JetMap<S>::diagonal(lambda, r), h.at_window(w));
    return lhs - rhs;
  });
}

#define SKEWLIN_INSTANTIATE_FORMAL(S)                                                              \
  template struct FormalSolution<S>;                                                               \
  template FormalSolution<S> solve_formal(const SkewSystem<S>&, int, const FormalOptions&);        \
  template CylinderFunction<JetMap<S>> residual_jet(const SkewSystem<S>&, const FormalSolution<S>&); \
  template double operator_contraction(const SkewSystem<S>&, int);

SKEWLIN_INSTANTIATE_FORMAL(double)
SKEWLIN_INSTANTIATE_FORMAL(std::complex<double>)
SKEWLIN_INSTANTIATE_FORMAL(mpq_class)
SKEWLIN_INSTANTIATE_FORMAL(Dual<double>)
SKEWLIN_INSTANTIATE_FORMAL(Dual<std::complex<double>>)

}  // namespace skewlin
