#include "skewlin/skew.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Dense>

#include "skewlin/sampling.hpp"

namespace skewlin {

namespace {

template <class S>
bool is_zero_scalar(const S& x) {
  return x == S(0);
}

using Cplx = std::complex<double>;

template <class S>
PolyMap<Cplx> to_complex_poly(const PolyMap<S>& p) {
  return p.template transform<Cplx>([](const S& v) { return ScalarTraits<S>::to_complex(v); });
}

double operator_norm(const std::vector<Cplx>& jac, std::size_t n) {
  if (n == 1) return std::abs(jac[0]);
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = jac[i * n + j];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

/// Sample coordinates as a point of C^n: pairs for complex fields, real otherwise.
template <class S>
std::vector<Cplx> sample_point(const std::vector<double>& coords) {
  if constexpr (ScalarTraits<S>::complex) return point_from_real<Cplx>(coords);
  std::vector<Cplx> x;
  for (double c : coords) x.emplace_back(c, 0.0);
  return x;
}

double vector_norm(const std::vector<Cplx>& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

/// sign(a - b), with a relative tolerance of 1e-12 for floating moduli.
int compare_moduli(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (std::abs(a - b) <= 1e-12 * scale) return 0;
  return a > b ? 1 : -1;
}

int compare_moduli(const mpq_class& a, const mpq_class& b) { return cmp(a, b) > 0 ? 1 : (cmp(a, b) < 0 ? -1 : 0); }

template <class M>
M modulus_power(const std::vector<M>& mods, const MultiIndex& k) {
  M out(1);
  for (std::size_t j = 0; j < k.size(); ++j)
    for (int e = 0; e < k[j]; ++e) out *= mods[j];
  return out;
}

template <class S>
using ModulusOf = typename ScalarTraits<S>::Modulus;

template <class S>
std::vector<ModulusOf<S>> moduli(const std::vector<S>& lambda) {
  std::vector<ModulusOf<S>> out;
  out.reserve(lambda.size());
  for (const auto& l : lambda) out.push_back(modulus(l));
  return out;
}

std::uint64_t binomial(int n, int k) {
  std::uint64_t out = 1;
  for (int i = 1; i <= k; ++i) out = out * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return out;
}

}  // namespace

// -------------------------------------------------------------- SkewSystem

template <class S>
SkewSystem<S>::SkewSystem(CylinderFunction<FiberMap<S>> fibers) : fibers_(std::move(fibers)) {
  if (fibers_.size() == 0) throw InvalidArgument("skew system without fibers");
  n_ = fibers_[0].dimension();
  r_ = 0;
  for (const auto& f : fibers_.values()) {
    if (f.dimension() != n_) throw InvalidArgument("fiber maps have different dimensions");
    r_ = std::max(r_, f.degree());
    for (std::size_t i = 0; i < n_; ++i)
      if (!is_zero_scalar(f.coeff(i, 0))) throw InvalidArgument("fiber map does not fix the origin");
  }
  if (r_ < 1) throw InvalidArgument("fiber maps need a linear part");
  // bring every fiber to the common degree
  std::vector<FiberMap<S>> table;
  table.reserve(fibers_.size());
  for (const auto& f : fibers_.values()) table.push_back(f.degree() == r_ ? f : f.with_degree(r_));
  fibers_ = CylinderFunction<FiberMap<S>>(fibers_.base(), fibers_.depth(), std::move(table));
}

template <class S>
CylinderFunction<std::vector<S>> SkewSystem<S>::multipliers() const {
  return fibers_.template map<std::vector<S>>([&](const FiberMap<S>& f) {
    std::vector<S> lambda(n_);
    for (std::size_t i = 0; i < n_; ++i) lambda[i] = f.monomial(i, MultiIndex::unit(n_, i));
    return lambda;
  });
}

template <class S>
CylinderFunction<JetMap<S>> SkewSystem<S>::jets(int r) const {
  return fibers_.template map<JetMap<S>>([&](const FiberMap<S>& f) { return jet_of_map(f, r); });
}

template <class S>
bool SkewSystem<S>::is_linear() const {
  for (const auto& f : fibers_.values()) {
    const auto& set = f.index_set();
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t rk = set.order_end(1); rk < set.size(); ++rk)
        if (!is_zero_scalar(f.coeff(i, rk))) return false;
  }
  return true;
}

template <class S>
bool SkewSystem<S>::is_diagonal() const {
  for (const auto& f : fibers_.values())
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j && !is_zero_scalar(f.monomial(i, MultiIndex::unit(n_, j)))) return false;
  return true;
}

// -------------------------------------------------------------- hypotheses

std::string HypothesisReport::describe() const {
  std::ostringstream os;
  os << "H1 " << (h1.pass ? "pass" : "FAIL") << ": sup |Df| = " << format_real(h1.sup_derivative)
     << ", containment margin = " << format_real(h1.containment_margin) << " (" << h1.samples << " samples/window)";
  if (!h1.message.empty()) os << " - " << h1.message;
  os << "\n";
  os << "H2 " << (h2.pass ? "pass" : "FAIL");
  if (!h2.pass)
    os << ": off-diagonal coefficient (" << h2.row + 1 << "," << h2.col + 1 << ") of magnitude "
       << format_real(h2.magnitude) << " at window " << h2.window;
  os << "\n";
  os << "H3 " << (h3.pass ? "pass" : "FAIL");
  if (h3.witness) {
    const auto& w = *h3.witness;
    os << ": i=" << w.component + 1 << ", k=" << w.k.to_string();
    if (w.equality)
      os << " has |lambda_i| = |lambda^k| at window " << w.window_a;
    else
      os << " changes sign between windows " << w.window_a << " (" << format_real(w.difference_a) << ") and "
         << w.window_b << " (" << format_real(w.difference_b) << ")";
  }
  os << "\n";
  os << "H4 minimal r: " << (h4_minimal_r ? std::to_string(*h4_minimal_r) : std::string("none")) << " (mu = "
     << format_real(mu) << ", Lambda = " << format_real(Lambda) << ")\n";
  return os.str();
}

template <class S>
int resonance_sign(const CylinderFunction<std::vector<S>>& lambda, std::size_t i, const MultiIndex& k) {
  int sign = 2;
  for (const auto& l : lambda.values()) {
    const auto mods = moduli(l);
    const int s = compare_moduli(mods[i], modulus_power(mods, k));
    if (s == 0) return 0;
    if (sign == 2) sign = s;
    else if (s != sign) return 0;
  }
  return sign == 2 ? 0 : sign;
}

template <class S>
HypothesisReport check_hypotheses(const SkewSystem<S>& sys, int r_max, int samples) {
  if (samples <= 0) throw InvalidArgument("sampling budget must be positive");
  HypothesisReport rep;
  const auto& fibers = sys.fibers();
  const auto& base = sys.base();
  const std::size_t n = sys.dimension();
  const auto lambda = sys.multipliers();

  // (H2)
  for (std::size_t w = 0; w < fibers.size() && rep.h2.pass; ++w)
    for (std::size_t i = 0; i < n && rep.h2.pass; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const S c = fibers[w].monomial(i, MultiIndex::unit(n, j));
        if (!is_zero_scalar(c)) {
          rep.h2 = {false, base->window_label(fibers.window(w)), i, j, magnitude(c)};
          break;
        }
      }

  // (H1)
  const auto pts = ball_samples(real_dimension<S>(n), static_cast<std::size_t>(samples), 1.0);
  rep.h1.samples = samples;
  double worst_image = 0.0;
  bool singular = false;
  for (std::size_t w = 0; w < fibers.size(); ++w) {
    const auto f = to_complex_poly(fibers[w]);
    for (const auto& l : lambda[w])
      if (magnitude(l) == 0.0) singular = true;
    for (const auto& p : pts) {
      const auto x = sample_point<S>(p);
      const double dn = operator_norm(f.jacobian(x), n);
      const double im = vector_norm(f.evaluate(x));
      if (dn > rep.h1.sup_derivative) {
        rep.h1.sup_derivative = dn;
        rep.h1.worst_window = base->window_label(fibers.window(w));
      }
      worst_image = std::max(worst_image, im);
    }
  }
  rep.h1.containment_margin = 1.0 - worst_image;
  rep.h1.pass = !singular && rep.h1.sup_derivative < 1.0 && rep.h1.containment_margin > 0.0;
  if (singular) rep.h1.message = "linear part has a zero multiplier";
  else if (rep.h1.sup_derivative >= 1.0) rep.h1.message = "fiber map is not a contraction on the unit ball";
  else if (rep.h1.containment_margin <= 0.0) rep.h1.message = "fiber map does not send the unit ball into itself";

  // (H^r_4): smallest r with Lambda_a^r < mu_a everywhere
  using M = ModulusOf<S>;
  std::vector<M> mu_a;
  std::vector<M> Lam_a;
  rep.mu = 1e300;
  for (const auto& l : lambda.values()) {
    const auto mods = moduli(l);
    M mu = mods[0];
    M Lam = mods[0];
    for (const auto& m : mods) {
      if (m < mu) mu = m;
      if (m > Lam) Lam = m;
    }
    mu_a.push_back(mu);
    Lam_a.push_back(Lam);
    rep.mu = std::min(rep.mu, modulus_to_double(mu));
    rep.Lambda = std::max(rep.Lambda, modulus_to_double(Lam));
  }
  if (!singular && rep.Lambda < 1.0) {
    for (int r = 2; r <= r_max && !rep.h4_minimal_r; ++r) {
      bool ok = true;
      for (std::size_t w = 0; w < mu_a.size() && ok; ++w) {
        M p(1);
        for (int e = 0; e < r; ++e) p *= Lam_a[w];
        ok = compare_moduli(mu_a[w], p) > 0;
      }
      if (ok) rep.h4_minimal_r = r;
    }
  }

  // (H3) for 2 <= |k| <= h4 - 1
  const int top = rep.h4_minimal_r ? *rep.h4_minimal_r - 1 : r_max - 1;
  if (top >= 2 && !singular) {
    const auto set = MultiIndexSet::get(n, top);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t rk = set->order_begin(2); rk < set->size(); ++rk) {
        const MultiIndex& k = set->at(rk);
        int sign = 2;
        std::size_t first_w = 0;
        double first_diff = 0.0;
        std::optional<ResonanceWitness> witness;
        for (std::size_t w = 0; w < lambda.size() && !witness; ++w) {
          const auto mods = moduli(lambda[w]);
          const M mk = modulus_power(mods, k);
          const int s = compare_moduli(mods[i], mk);
          const double diff = modulus_to_double(mods[i]) - modulus_to_double(mk);
          const std::string label = base->window_label(lambda.window(w));
          if (s == 0) {
            witness = ResonanceWitness{i, k, label, label, diff, diff, true};
          } else if (sign == 2) {
            sign = s;
            first_w = w;
            first_diff = diff;
          } else if (s != sign) {
            witness = ResonanceWitness{i, k, base->window_label(lambda.window(first_w)), label, first_diff, diff, false};
          }
        }
        rep.h3.signs.push_back({i, k, witness ? 0 : (sign == 2 ? 0 : sign)});
        if (witness && rep.h3.pass) {
          rep.h3.pass = false;
          rep.h3.witness = witness;
        }
      }
    }
  }
  if (singular) rep.h3.pass = false;
  return rep;
}

// ------------------------------------------------------------- conjugation

template <class S>
SkewSystem<S> conjugate_by_jet(const SkewSystem<S>& sys, const CylinderFunction<JetMap<S>>& h) {
  const auto& base = sys.base();
  if (h.base() != base) throw InvalidArgument("conjugating family lives on another base");
  if (h.size() == 0) throw InvalidArgument("empty conjugating family");
  const int r = h[0].degree();
  const std::size_t n = sys.dimension();
  if (h[0].dimension() != n) throw InvalidArgument("conjugating family has the wrong dimension");

  // invert each h_a once
  std::vector<JetMap<S>> inv;
  inv.reserve(h.size());
  for (const auto& j : h.values()) inv.push_back(jet_invert(j));
  const CylinderFunction<JetMap<S>> h_inv(base, h.depth(), std::move(inv));

  const int depth = std::max(sys.depth(), h.depth() + 1);
  auto fibers = CylinderFunction<FiberMap<S>>::tabulate(base, depth, [&](std::span<const int> w) {
    const JetMap<S> f = jet_of_map(sys.fiber_at_window(w), r);
    const auto next = shifted_word(*base, w, ShiftDirection::forward);
    const JetMap<S> g = jet_compose(h.at_window(next), jet_compose(f, h_inv.at_window(w)));
    return g.to_poly();
  });
  return SkewSystem<S>(std::move(fibers));
}

// ------------------------------------------------------- contraction rates

template <class S>
ContractionRates contraction_rates(const SkewSystem<S>& sys, int r, double delta, int samples) {
  if (!(delta > 0.0) || delta > 1.0) throw InvalidArgument("delta must lie in (0, 1]");
  if (r < 2) throw InvalidArgument("flattening degree must be at least 2");
  const std::size_t n = sys.dimension();
  const auto& fibers = sys.fibers();
  const auto lambda = sys.multipliers();
  const auto pts = ball_samples(real_dimension<S>(n), static_cast<std::size_t>(std::max(samples, 1)), delta);

  ContractionRates out;
  out.r = r;
  out.delta = delta;
  for (std::size_t w = 0; w < fibers.size(); ++w) {
    double mu = 1e300;
    double Lam = 0.0;
    for (const auto& l : lambda[w]) {
      mu = std::min(mu, magnitude(l));
      Lam = std::max(Lam, magnitude(l));
    }
    out.mu.push_back(mu);
    out.Lambda.push_back(Lam);
    const auto f = to_complex_poly(fibers[w]);
    const auto& set = f.index_set();
    double c_w = 0.0;
    double m_w = 0.0;
    for (const auto& p : pts) {
      const auto x = sample_point<S>(p);
      c_w = std::max(c_w, std::pow(operator_norm(f.jacobian(x), n), r));
      const auto g = f.expanded_at(x);
      double sum = 0.0;
      for (int j = 2; j <= std::min(r, f.degree()); ++j) {
        double jfact = 1.0;
        for (int t = 2; t <= j; ++t) jfact *= t;
        double norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double b = 0.0;
          for (std::size_t rk = set.order_begin(j); rk < set.order_end(j); ++rk) b += jfact * std::abs(g.coeff(i, rk));
          norm2 += b * b;
        }
        sum += static_cast<double>(binomial(r, j)) * std::sqrt(norm2);
      }
      m_w = std::max(m_w, sum);
    }
    out.C = std::max(out.C, c_w / mu);
    out.M = std::max(out.M, m_w / mu);
  }
  return out;
}

template <class S>
ContractionRates select_delta(const SkewSystem<S>& sys, int r, int samples, std::optional<double> delta_override) {
  if (delta_override) {
    auto rates = contraction_rates(sys, r, *delta_override, samples);
    if (!(rates.rate() < 1.0))
      throw ConvergenceError("flat-stage rate C + r delta M = " + format_real(rates.rate()) +
                                 " is not below 1 at the requested delta",
                             rates.rate());
    return rates;
  }
  double best = std::numeric_limits<double>::infinity();
  for (int e = 1; e <= 20; ++e) {
    const double delta = std::ldexp(1.0, -e);
    auto rates = contraction_rates(sys, r, delta, samples);
    if (rates.rate() < 1.0) return rates;
    best = std::min(best, rates.rate());
  }
  throw ConvergenceError("no delta >= 2^-20 certifies the flat stage (best rate " + format_real(best) + ")", best);
}

#define SKEWLIN_INSTANTIATE_SKEW(S)                                                                       \
  template class SkewSystem<S>;                                                                           \
  template HypothesisReport check_hypotheses(const SkewSystem<S>&, int, int);                             \
  template int resonance_sign(const CylinderFunction<std::vector<S>>&, std::size_t, const MultiIndex&);   \
  template SkewSystem<S> conjugate_by_jet(const SkewSystem<S>&, const CylinderFunction<JetMap<S>>&);      \
  template ContractionRates contraction_rates(const SkewSystem<S>&, int, double, int);                    \
  template ContractionRates select_delta(const SkewSystem<S>&, int, int, std::optional<double>);

SKEWLIN_INSTANTIATE_SKEW(double)
SKEWLIN_INSTANTIATE_SKEW(std::complex<double>)
SKEWLIN_INSTANTIATE_SKEW(mpq_class)
SKEWLIN_INSTANTIATE_SKEW(Dual<double>)
SKEWLIN_INSTANTIATE_SKEW(Dual<std::complex<double>>)

}  // namespace skewlin
