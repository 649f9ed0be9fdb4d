#include "skewlin/flat.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <sstream>

#include "skewlin/linalg.hpp"
#include "skewlin/sampling.hpp"

namespace skewlin {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <class S>
std::vector<S> linear_multipliers(const FiberMap<S>& f) {
  std::vector<S> l(f.dimension());
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = f.monomial(i, MultiIndex::unit(l.size(), i));
  return l;
}

template <class S>
std::vector<S> difference(const std::vector<S>& a, const std::vector<S>& b) {
  std::vector<S> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

/// Shortest word c_1..c_k with from -> c_1 -> ... -> c_k -> to admissible.
template <class S>
void bound_remainders(OrbitData<S>& orbit, int r) {
  const std::size_t len = orbit.fibers.size();
  for (std::size_t t = 0; t < len; ++t) {
    const auto& f = orbit.fibers[t];
    const auto next = orbit.jets[(t + 1) % len].to_poly();
    const auto lhs = poly_compose(next.with_degree(next.degree() * f.degree()), f);
    const auto here = orbit.jets[t].to_poly();
    const auto& set = lhs.index_set();
    for (std::size_t i = 0; i < lhs.dimension(); ++i) {
      double low = 0.0;
      double high = 0.0;
      for (std::size_t rk = set.order_begin(2); rk < set.size(); ++rk) {
        const MultiIndex& k = set.at(rk);
        S c = lhs.coeff(i, rk);
        if (k.order() <= here.degree()) c = c - orbit.multipliers[t][i] * here.monomial(i, k);
        (static_cast<int>(k.order()) <= r ? low : high) += magnitude(c);
      }
      orbit.remainder_low = std::max(orbit.remainder_low, low);
      orbit.remainder_high = std::max(orbit.remainder_high, high);
    }
  }
}

enum class LimitStatus { converged, exhausted };

template <class S>
LimitStatus run_limit(const LinearizationResult<S>& res, const OrbitData<S>& orbit, const std::vector<S>& x,
                      double tol, std::size_t offset, Evaluation<S>& out) {
  const std::size_t n = x.size();
  std::vector<S> scale(n, S(1));
  std::vector<S> y = x;
  out = Evaluation<S>{};
  out.value = jet_evaluate(orbit.jets[orbit.site(offset)], x);
  for (std::size_t m = offset;; ++m) {
    if (out.iterations >= res.options.max_iterations)
      throw ConvergenceError("flat-stage limit did not converge within " + std::to_string(out.iterations) +
                                 " iterations (last increment " + format_real(out.last_increment) + ")",
                             out.last_increment);
    if (m + 1 > orbit.reach) return LimitStatus::exhausted;
    const std::size_t s = orbit.site(m);
    y = orbit.fibers[s].evaluate(y);
    for (std::size_t i = 0; i < n; ++i) scale[i] = scale[i] / orbit.multipliers[s][i];
    auto next = jet_evaluate(orbit.jets[orbit.site(m + 1)], y);
    for (std::size_t i = 0; i < n; ++i) next[i] = next[i] * scale[i];
    ++out.iterations;
    out.last_increment = euclidean_norm(difference(next, out.value));
    if (!std::isfinite(out.last_increment))
      throw ConvergenceError("flat-stage limit left the floating range", out.last_increment);
    out.increments.push_back(out.last_increment);
    out.value = std::move(next);
    const double floor = 16.0 * kEps * euclidean_norm(out.value);
    if (out.last_increment <= tol || out.last_increment <= floor) {
      // Next increment is at most |scale| / mu * (K_low |y|^2 + K_high |y|^{r+1}) in the max norm
      // while |y| <= 1; inside the delta-ball later terms shrink by the certified rate.
      const double ny = max_norm(y);
      if (ny <= res.delta) {
        double next_scale = 0.0;
        const std::size_t s1 = orbit.site(m + 1);
        for (std::size_t i = 0; i < n; ++i)
          next_scale = std::max(next_scale, magnitude(scale[i] / orbit.multipliers[s1][i]));
        const double tail = std::sqrt(static_cast<double>(n)) * next_scale *
                            (orbit.remainder_low * ny * ny + orbit.remainder_high * std::pow(ny, res.degree + 1)) /
                            (1.0 - res.rate);
        if (tail <= std::max(tol, floor)) return LimitStatus::converged;
      }
    }
  }
}

/// Orbit data that grows its subshift segment on demand.
template <class S>
class PointEvaluator {
 public:
  PointEvaluator(const LinearizationResult<S>& res, BasePoint a) : res_(res), a_(std::move(a)) {
    steps_ = res.system.base()->is_finite() ? 0 : 64;
    orbit_ = orbit_data(res_, a_, steps_);
  }

  const OrbitData<S>& orbit() const { return orbit_; }

  Evaluation<S> operator()(const std::vector<S>& x, double tol, std::size_t offset = 0) {
    Evaluation<S> ev;
    if (res_.system.is_linear()) {
      ev.value = x;
      return ev;
    }
    while (run_limit(res_, orbit_, x, tol, offset, ev) == LimitStatus::exhausted) {
      if (steps_ > static_cast<std::size_t>(res_.options.max_iterations) + offset)
        throw ConvergenceError("flat-stage limit did not converge within the iteration cap", ev.last_increment);
      steps_ *= 2;
      orbit_ = orbit_data(res_, a_, steps_);
    }
    return ev;
  }

 private:
  const LinearizationResult<S>& res_;
  BasePoint a_;
  std::size_t steps_ = 0;
  OrbitData<S> orbit_;
};

template <class S>
std::vector<S> finite_difference_jacobian(PointEvaluator<S>& eval, const std::vector<S>& x, double tol) {
  const std::size_t n = x.size();
  std::vector<S> jac(n * n);
  const double h = 1e-6 * std::max(1.0, euclidean_norm(x));
  for (std::size_t j = 0; j < n; ++j) {
    auto xp = x;
    auto xm = x;
    xp[j] = xp[j] + S(h);
    xm[j] = xm[j] - S(h);
    const auto fp = eval(xp, tol).value;
    const auto fm = eval(xm, tol).value;
    for (std::size_t i = 0; i < n; ++i) jac[i * n + j] = (fp[i] - fm[i]) / S(2.0 * h);
  }
  return jac;
}

template <class S>
std::vector<S> random_ball_point(UniformStream& rng, std::size_t n, double radius) {
  const std::size_t dim = real_dimension<S>(n);
  std::vector<double> u(dim);
  for (;;) {
    double s = 0.0;
    for (auto& c : u) {
      c = rng.uniform(-1.0, 1.0);
      s += c * c;
    }
    if (s <= 1.0) break;
  }
  for (auto& c : u) c *= radius;
  return point_from_real<S>(u);
}

BasePoint random_point(const SymbolicBase& base, UniformStream& rng, int half_width) {
  const auto pick = [&](std::size_t count) {
    return std::min(count - 1, static_cast<std::size_t>(rng.next() * static_cast<double>(count)));
  };
  BasePoint p;
  if (base.is_finite()) {
    p.symbols = {static_cast<int>(pick(base.size()))};
    return p;
  }
  std::vector<int> start;
  for (std::size_t s = 0; s < base.size(); ++s)
    for (std::size_t t = 0; t < base.size(); ++t)
      if (base.admissible(static_cast<int>(s), static_cast<int>(t))) {
        start.push_back(static_cast<int>(s));
        break;
      }
  p.symbols = {start[pick(start.size())]};
  const std::size_t len = 2 * static_cast<std::size_t>(half_width) + 1;
  while (p.symbols.size() < len) {
    std::vector<int> next;
    for (std::size_t t = 0; t < base.size(); ++t)
      if (base.admissible(p.symbols.back(), static_cast<int>(t))) next.push_back(static_cast<int>(t));
    if (next.empty()) break;
    p.symbols.push_back(next[pick(next.size())]);
  }
  p.origin = static_cast<std::ptrdiff_t>(p.symbols.size() / 2);
  return p;
}

std::string point_label(const SymbolicBase& base, const BasePoint& a, int depth) {
  if (base.is_finite()) return base.window_label(base.window_of(a, 0));
  return base.window_label(base.window_of(a, std::min<int>(depth, static_cast<int>(std::min(a.past(), a.future())))));
}

}  // namespace

double fitted_ratio(const std::vector<double>& increments, double floor) {
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  int count = 0;
  for (std::size_t m = 1; m < increments.size(); ++m) {
    const double v = increments[m];
    if (!(v > floor)) continue;
    const double t = static_cast<double>(m);
    const double l = std::log(v);
    sx += t;
    sy += l;
    sxx += t * t;
    sxy += t * l;
    ++count;
  }
  if (count < 3) return 0.0;
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return std::exp(slope);
}

template <class S>
LinearizationResult<S> linearize(const SkewSystem<S>& sys, const FlatOptions& options) {
  LinearizationResult<S> res;
  res.system = sys;
  res.options = options;
  res.hypotheses = check_hypotheses(sys, options.max_degree, options.samples);
  const auto& h = res.hypotheses;
  if (!h.h2.pass || !h.h3.pass || !h.h4_minimal_r || (options.enforce_h1 && !h.h1.pass))
    throw HypothesisError(h.describe());
  const int minimal = *res.hypotheses.h4_minimal_r;
  const int r = options.degree.value_or(minimal);
  if (r < minimal)
    throw HypothesisError("(H^r_4) fails at degree " + std::to_string(r) + " (minimal degree is " +
                          std::to_string(minimal) + ")");
  res.degree = r;
  res.formal = solve_formal(sys, r, options.formal);
  res.rates = select_delta(sys, r, options.samples, options.delta);
  res.delta = res.rates.delta;
  res.rate = res.rates.rate();
  res.operator_rate = operator_contraction(sys, r);
  if (!sys.base()->is_finite()) {
    const int d = sys.depth();
    int pad = (r + 1) * (d + 1);
    const double k = res.operator_rate;
    if (k > 0.0) pad += static_cast<int>(std::ceil(std::log(1e-3 * options.tol) / std::log(k)));
    res.padding = std::clamp(pad, 8, 4000);
  }
  return res;
}

template <class S>
OrbitData<S> orbit_data(const LinearizationResult<S>& res, const BasePoint& a, std::size_t steps) {
  const auto& sys = res.system;
  const auto& base = *sys.base();
  OrbitData<S> out;
  if (base.is_finite()) {
    const int start = a.symbols.at(0);
    int p = start;
    do {
      const BasePoint q{{p}, 0};
      out.fibers.push_back(sys.fiber(q));
      out.jets.push_back(res.formal.jets.at(q));
      out.multipliers.push_back(linear_multipliers(out.fibers.back()));
      p = base.permutation()[static_cast<std::size_t>(p)];
    } while (p != start);
    bound_remainders(out, res.degree);
    return out;
  }

  const int d = sys.depth();
  const std::ptrdiff_t pad = res.padding + d;
  const auto ext = base.extend(a, pad, static_cast<std::ptrdiff_t>(steps) + pad);
  std::vector<int> word(ext.symbols.begin() + (ext.origin - pad),
                        ext.symbols.begin() + (ext.origin + static_cast<std::ptrdiff_t>(steps) + pad + 1));
  const auto bridge = connecting_word(base, word.back(), word.front());
  word.insert(word.end(), bridge.begin(), bridge.end());
  const std::size_t len = word.size();

  std::vector<FiberMap<S>> table(len);
  std::vector<int> window(2 * static_cast<std::size_t>(d) + 1);
  for (std::size_t t = 0; t < len; ++t) {
    for (int j = -d; j <= d; ++j) {
      const auto site = static_cast<std::ptrdiff_t>(t + len) + j;
      window[static_cast<std::size_t>(j + d)] = word[static_cast<std::size_t>(site) % len];
    }
    table[t] = sys.fiber_at_window(window);
  }
  const SkewSystem<S> cyc(CylinderFunction<FiberMap<S>>(SymbolicBase::cycle(len), 0, table));
  const auto sol = solve_formal(cyc, res.degree, res.options.formal);

  out.fibers = std::move(table);
  out.jets = sol.jets.values();
  for (const auto& f : out.fibers) out.multipliers.push_back(linear_multipliers(f));
  out.start = static_cast<std::size_t>(pad);
  out.reach = steps;
  bound_remainders(out, res.degree);
  return out;
}

template <class S>
Evaluation<S> evaluate_on_orbit(const LinearizationResult<S>& res, const OrbitData<S>& orbit,
                                const std::vector<S>& x, double tol, std::size_t offset) {
  Evaluation<S> ev;
  if (res.system.is_linear()) {
    ev.value = x;
    return ev;
  }
  if (run_limit(res, orbit, x, tol, offset, ev) == LimitStatus::exhausted)
    throw ConvergenceError("orbit segment too short for the flat-stage limit", ev.last_increment);
  return ev;
}

template <class S>
Evaluation<S> evaluate_linearization(const LinearizationResult<S>& res, const BasePoint& a, const std::vector<S>& x,
                                     double tol) {
  if (x.size() != res.system.dimension()) throw InvalidArgument("point dimension does not match the system");
  PointEvaluator<S> eval(res, a);
  auto ev = eval(x, tol);
  const auto& base = *res.system.base();
  if (base.is_finite() || !res.options.sensitivity || res.system.is_linear()) return ev;

  const std::ptrdiff_t pad = res.padding + res.system.depth();
  const auto need_future = static_cast<std::ptrdiff_t>(ev.iterations) + pad;
  std::vector<BasePoint> alternatives;
  if (a.future() < need_future)
    for (auto& p : base.future_alternatives(a, 0)) alternatives.push_back(std::move(p));
  if (a.past() < pad)
    for (auto& p : base.past_alternatives(a, 0)) alternatives.push_back(std::move(p));
  for (const auto& p : alternatives) {
    PointEvaluator<S> alt(res, p);
    ev.sensitivity = std::max(ev.sensitivity, euclidean_norm(difference(alt(x, tol).value, ev.value)));
  }
  return ev;
}

template <class S>
std::vector<S> invert_linearization(const LinearizationResult<S>& res, const BasePoint& a, const std::vector<S>& y,
                                    double tol) {
  if (y.size() != res.system.dimension()) throw InvalidArgument("point dimension does not match the system");
  if (res.system.is_linear()) return y;
  PointEvaluator<S> eval(res, a);
  const double inner_tol = 0.1 * std::min(tol, res.options.tol);
  const auto& hhat = eval.orbit().jets[eval.orbit().site(0)];
  std::vector<S> x = jet_evaluate(jet_invert(hhat), y);
  bool finite_differences = false;
  double previous = std::numeric_limits<double>::infinity();
  const auto outside = [] { return InvalidArgument("point lies outside the image of the unit ball"); };
  for (int step = 0; step < 100; ++step) {
    std::vector<S> hx;
    try {
      hx = eval(x, inner_tol).value;
    } catch (const ConvergenceError&) {
      if (euclidean_norm(x) > 1.0) throw outside();
      throw;
    }
    const auto residual = difference(hx, y);
    const double norm = euclidean_norm(residual);
    if (norm <= tol) {
      if (euclidean_norm(x) > 1.0 + 1e-9) throw outside();
      return x;
    }
    if (!(norm < previous)) finite_differences = true;
    previous = std::min(previous, norm);
    const auto jac = finite_differences ? finite_difference_jacobian(eval, x, inner_tol) : jet_jacobian(hhat, x);
    const auto dx = mat_vec(invert_matrix(jac, x.size()), residual);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x[i] - dx[i];
    if (!std::isfinite(euclidean_norm(x)) || euclidean_norm(x) > 10.0) throw outside();
  }
  throw ConvergenceError("Newton iteration for the inverse chart did not converge", previous);
}

template <class S>
DefectReport<S> defect_report(LinearizationResult<S>& res, const DefectGrid& grid) {
  DefectReport<S> rep;
  rep.certified_rate = res.rate;
  const auto& sys = res.system;
  const auto& base = *sys.base();
  const double radius = grid.radius > 0.0 ? grid.radius : res.delta;
  const int half = grid.itinerary > 0 ? grid.itinerary : 2 * res.padding + sys.depth() + 32;
  UniformStream rng(grid.seed);
  for (std::size_t k = 0; k < grid.points; ++k) {
    const BasePoint a = random_point(base, rng, half);
    const auto x = random_ball_point<S>(rng, sys.dimension(), radius);
    PointEvaluator<S> eval(res, a);
    const auto ha = eval(x, res.options.tol);
    const auto& f = eval.orbit().fibers[eval.orbit().site(0)];
    const auto& lambda = eval.orbit().multipliers[eval.orbit().site(0)];
    const auto hs = eval(f.evaluate(x), res.options.tol, 1);
    std::vector<S> rhs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) rhs[i] = lambda[i] * ha.value[i];
    DefectRow<S> row;
    row.window = point_label(base, a, std::max(1, sys.depth()));
    row.x = x;
    row.h = ha.value;
    row.defect = euclidean_norm(difference(hs.value, rhs));
    row.iterations = ha.iterations;
    row.observed_rate = fitted_ratio(ha.increments, 1e3 * kEps * std::max(euclidean_norm(ha.value), 1e-300));
    rep.sup_defect = std::max(rep.sup_defect, row.defect);
    rep.empirical_rate = std::max(rep.empirical_rate, row.observed_rate);
    rep.rows.push_back(std::move(row));
  }
  res.diagnostics = rep.sup_defect;
  return rep;
}

#define SKEWLIN_INSTANTIATE_FLAT(S)                                                                         \
  template LinearizationResult<S> linearize(const SkewSystem<S>&, const FlatOptions&);                      \
  template OrbitData<S> orbit_data(const LinearizationResult<S>&, const BasePoint&, std::size_t);            \
  template Evaluation<S> evaluate_on_orbit(const LinearizationResult<S>&, const OrbitData<S>&,               \
                                           const std::vector<S>&, double, std::size_t);                      \
  template Evaluation<S> evaluate_linearization(const LinearizationResult<S>&, const BasePoint&,             \
                                                const std::vector<S>&, double);                              \
  template std::vector<S> invert_linearization(const LinearizationResult<S>&, const BasePoint&,              \
                                               const std::vector<S>&, double);                               \
  template DefectReport<S> defect_report(LinearizationResult<S>&, const DefectGrid&);

SKEWLIN_INSTANTIATE_FLAT(double)
SKEWLIN_INSTANTIATE_FLAT(std::complex<double>)

}  // namespace skewlin
