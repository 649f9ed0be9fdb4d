#include "skewlin/jets.hpp"

#include <algorithm>
#include <complex>

#include "skewlin/errors.hpp"
#include "skewlin/linalg.hpp"

namespace skewlin {

namespace {

template <class S>
bool is_zero(const S& x) {
  return x == S(0);
}

// c = a * b truncated at the set's max order. Scalar polynomials in the
// monomial basis of `set`.
template <class S>
void mul_truncated(const MultiIndexSet& set, const std::vector<S>& a, const std::vector<S>& b,
                   std::vector<S>& c) {
  const int r = set.max_order();
  std::fill(c.begin(), c.end(), S(0));
  for (std::size_t ra = 0; ra < set.size(); ++ra) {
    if (is_zero(a[ra])) continue;
    const int oa = set.at(ra).order();
    const std::size_t rb_end = set.order_end(r - oa);
    for (std::size_t rb = 0; rb < rb_end; ++rb) {
      if (is_zero(b[rb])) continue;
      c[set.sum_rank(ra, rb)] += a[ra] * b[rb];
    }
  }
}

// Value of every monomial x^k, k in `set`, built incrementally.
template <class S>
std::vector<S> monomial_values(const MultiIndexSet& set, const std::vector<S>& x) {
  std::vector<S> m(set.size(), S(0));
  m[0] = S(1);
  for (std::size_t rk = 1; rk < set.size(); ++rk)
    m[rk] = m[set.predecessor(rk)] * x[set.predecessor_variable(rk)];
  return m;
}

template <class S>
S factorial_scalar(const MultiIndex& k) {
  return S(static_cast<double>(k.factorial()));
}

template <>
mpq_class factorial_scalar<mpq_class>(const MultiIndex& k) {
  mpz_class f(1);
  for (int e : k.entries())
    for (int t = 2; t <= e; ++t) f *= t;
  return mpq_class(f);
}

}  // namespace

// ---------------------------------------------------------------- PolyMap

template <class S>
PolyMap<S>::PolyMap(std::size_t n, int r)
    : n_(n), r_(r), set_(MultiIndexSet::get(n, r)), c_(n * set_->size(), S(0)) {}

template <class S>
S PolyMap<S>::monomial(std::size_t i, const MultiIndex& k) const {
  const std::size_t rk = set_->find(k.entries());
  if (rk == MultiIndexSet::npos) return S(0);
  return coeff(i, rk);
}

template <class S>
void PolyMap<S>::set_monomial(std::size_t i, const MultiIndex& k, const S& v) {
  if (i >= n_) throw InvalidArgument("component out of range");
  coeff(i, set_->rank(k)) = v;
}

template <class S>
std::vector<S> PolyMap<S>::evaluate(const std::vector<S>& x) const {
  if (x.size() != n_) throw InvalidArgument("evaluate: dimension mismatch");
  const auto m = monomial_values(*set_, x);
  std::vector<S> y(n_, S(0));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t rk = 0; rk < set_->size(); ++rk)
      if (!is_zero(coeff(i, rk))) y[i] += coeff(i, rk) * m[rk];
  return y;
}

template <class S>
std::vector<S> PolyMap<S>::jacobian(const std::vector<S>& x) const {
  if (x.size() != n_) throw InvalidArgument("jacobian: dimension mismatch");
  const auto m = monomial_values(*set_, x);
  std::vector<S> jac(n_ * n_, S(0));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t rk = 1; rk < set_->size(); ++rk) {
      const S& c = coeff(i, rk);
      if (is_zero(c)) continue;
      const auto& k = set_->at(rk);
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t low = set_->lower(rk, j);
        if (low == MultiIndexSet::npos) continue;
        jac[i * n_ + j] += c * S(k[j]) * m[low];
      }
    }
  }
  return jac;
}

template <class S>
PolyMap<S> PolyMap<S>::expanded_at(const std::vector<S>& p) const {
  if (p.size() != n_) throw InvalidArgument("expanded_at: dimension mismatch");
  PolyMap shift(n_, r_);
  for (std::size_t j = 0; j < n_; ++j) {
    shift.coeff(j, 0) = p[j];
    if (r_ >= 1) shift.coeff(j, set_->rank(MultiIndex::unit(n_, j))) = S(1);
  }
  return poly_compose(*this, shift);
}

template <class S>
PolyMap<S> PolyMap<S>::with_degree(int r) const {
  PolyMap out(n_, r);
  const std::size_t common = std::min(set_->size(), out.set_->size());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t rk = 0; rk < common; ++rk) out.coeff(i, rk) = coeff(i, rk);
  return out;
}

template <class S>
PolyMap<S> poly_compose(const PolyMap<S>& outer, const PolyMap<S>& inner) {
  const std::size_t n = outer.dimension();
  if (inner.dimension() != n) throw InvalidArgument("poly_compose: dimension mismatch");
  const int r = outer.degree();
  const auto set = MultiIndexSet::get(n, r);
  const std::size_t sz = set->size();

  // Inner components re-expressed at the outer truncation degree.
  const PolyMap<S> in = inner.with_degree(r);
  std::vector<std::vector<S>> comp(n, std::vector<S>(sz));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t rk = 0; rk < sz; ++rk) comp[j][rk] = in.coeff(j, rk);

  PolyMap<S> out(n, r);
  std::vector<S> mono(sz, S(0));
  mono[0] = S(1);
  std::vector<std::vector<S>> powers(sz);
  powers[0] = mono;
  for (std::size_t rk = 0; rk < sz; ++rk) {
    if (rk > 0) {
      powers[rk].assign(sz, S(0));
      mul_truncated(*set, powers[set->predecessor(rk)], comp[set->predecessor_variable(rk)], powers[rk]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const S& c = outer.coeff(i, rk);
      if (is_zero(c)) continue;
      for (std::size_t t = 0; t < sz; ++t)
        if (!is_zero(powers[rk][t])) out.coeff(i, t) += c * powers[rk][t];
    }
  }
  return out;
}

// ----------------------------------------------------------------- JetMap

template <class S>
JetMap<S>::JetMap(std::size_t n, int r) : n_(n), r_(r), set_(MultiIndexSet::get(n, r)) {
  if (r < 1) throw InvalidArgument("jet degree must be at least 1");
  c_.assign(n * terms(), S(0));
}

template <class S>
JetMap<S> JetMap<S>::identity(std::size_t n, int r) {
  return diagonal(std::vector<S>(n, S(1)), r);
}

template <class S>
JetMap<S> JetMap<S>::diagonal(const std::vector<S>& lambda, int r) {
  JetMap j(lambda.size(), r);
  for (std::size_t i = 0; i < lambda.size(); ++i)
    j.taylor(i, j.set_->rank(MultiIndex::unit(lambda.size(), i))) = lambda[i];
  return j;
}

template <class S>
JetMap<S> JetMap<S>::linear(const std::vector<S>& matrix, std::size_t n, int r) {
  if (matrix.size() != n * n) throw InvalidArgument("linear: matrix size mismatch");
  JetMap j(n, r);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < n; ++c) j.taylor(i, j.set_->rank(MultiIndex::unit(n, c))) = matrix[i * n + c];
  return j;
}

template <class S>
JetMap<S> JetMap<S>::from_poly(const PolyMap<S>& p, int r) {
  const std::size_t n = p.dimension();
  JetMap j(n, r);
  const auto& pset = p.index_set();
  const std::size_t common = std::min(pset.size(), j.set_->size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t rk = 1; rk < common; ++rk)
      j.taylor(i, rk) = p.coeff(i, rk) * factorial_scalar<S>(pset.at(rk));
  return j;
}

template <class S>
PolyMap<S> JetMap<S>::to_poly() const {
  PolyMap<S> p(n_, r_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t rk = 1; rk < set_->size(); ++rk)
      p.coeff(i, rk) = taylor(i, rk) / factorial_scalar<S>(set_->at(rk));
  return p;
}

template <class S>
const S& JetMap<S>::taylor(std::size_t i, const MultiIndex& k) const {
  if (k.order() < 1) throw InvalidArgument("jets store no constant term");
  return taylor(i, set_->rank(k));
}

template <class S>
void JetMap<S>::set_taylor(std::size_t i, const MultiIndex& k, const S& v) {
  if (i >= n_) throw InvalidArgument("component out of range");
  if (k.order() < 1) throw InvalidArgument("jets store no constant term");
  taylor(i, set_->rank(k)) = v;
}

template <class S>
S JetMap<S>::monomial(std::size_t i, const MultiIndex& k) const {
  return taylor(i, k) / factorial_scalar<S>(k);
}

template <class S>
void JetMap<S>::set_monomial(std::size_t i, const MultiIndex& k, const S& v) {
  set_taylor(i, k, v * factorial_scalar<S>(k));
}

template <class S>
std::vector<S> JetMap<S>::linear_part() const {
  std::vector<S> m(n_ * n_, S(0));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t c = 0; c < n_; ++c) m[i * n_ + c] = taylor(i, set_->rank(MultiIndex::unit(n_, c)));
  return m;
}

template <class S>
std::vector<S> JetMap<S>::diagonal_part() const {
  std::vector<S> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = taylor(i, set_->rank(MultiIndex::unit(n_, i)));
  return d;
}

template <class S>
bool JetMap<S>::is_linear_diagonal() const {
  const auto m = linear_part();
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t c = 0; c < n_; ++c)
      if (i != c && !is_zero(m[i * n_ + c])) return false;
  return true;
}

template <class S>
bool JetMap<S>::is_flat() const {
  if (r_ < 2) return true;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t rk = set_->order_begin(2); rk < set_->size(); ++rk)
      if (!is_zero(taylor(i, rk))) return false;
  return true;
}

template <class S>
JetMap<S> JetMap<S>::with_degree(int r) const {
  JetMap out(n_, r);
  const std::size_t common = std::min(terms(), out.terms());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t rk = 1; rk <= common; ++rk) out.taylor(i, rk) = taylor(i, rk);
  return out;
}

template <class S>
JetMap<S> JetMap<S>::band(int lo, int hi) const {
  JetMap out(n_, r_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t rk = 1; rk < set_->size(); ++rk) {
      const int o = set_->at(rk).order();
      if (o >= lo && o <= hi) out.taylor(i, rk) = taylor(i, rk);
    }
  return out;
}

template <class S>
JetMap<S>& JetMap<S>::operator+=(const JetMap& o) {
  if (o.n_ != n_ || o.r_ != r_) throw InvalidArgument("jet sum: shape mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

template <class S>
JetMap<S>& JetMap<S>::operator-=(const JetMap& o) {
  if (o.n_ != n_ || o.r_ != r_) throw InvalidArgument("jet difference: shape mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

template <class S>
JetMap<S>& JetMap<S>::operator*=(const S& s) {
  for (auto& c : c_) c *= s;
  return *this;
}

// ------------------------------------------------------------- operations

template <class S>
JetMap<S> jet_compose(const JetMap<S>& outer, const JetMap<S>& inner) {
  if (outer.dimension() != inner.dimension() || outer.degree() != inner.degree())
    throw InvalidArgument("jet_compose: dimension/degree mismatch");
  const PolyMap<S> composed = poly_compose(outer.to_poly(), inner.to_poly());
  return JetMap<S>::from_poly(composed, outer.degree());
}

template <class S>
JetMap<S> jet_invert(const JetMap<S>& j) {
  const std::size_t n = j.dimension();
  const int r = j.degree();
  const auto linv = invert_matrix(j.linear_part(), n);
  const JetMap<S> linv_jet = JetMap<S>::linear(linv, n, r);
  const JetMap<S> nonlinear = j.band(2, r);
  const JetMap<S> id = JetMap<S>::identity(n, r);

  // g = L^{-1} o (id - N o g); each pass fixes one more degree.
  JetMap<S> g = linv_jet;
  for (int pass = 2; pass <= r; ++pass) g = jet_compose(linv_jet, id - jet_compose(nonlinear, g));
  return g;
}

template <class S>
std::vector<S> jet_evaluate(const JetMap<S>& j, const std::vector<S>& x) {
  if (x.size() != j.dimension()) throw InvalidArgument("jet_evaluate: dimension mismatch");
  const auto& set = j.index_set();
  const auto m = monomial_values(set, x);
  std::vector<S> y(j.dimension(), S(0));
  for (std::size_t i = 0; i < j.dimension(); ++i)
    for (std::size_t rk = 1; rk < set.size(); ++rk) {
      const S& c = j.taylor(i, rk);
      if (!is_zero(c)) y[i] += c * m[rk] / factorial_scalar<S>(set.at(rk));
    }
  return y;
}

template <class S>
std::vector<S> jet_jacobian(const JetMap<S>& j, const std::vector<S>& x) {
  return j.to_poly().jacobian(x);
}

template <class S>
double jet_distance(const JetMap<S>& a, const JetMap<S>& b) {
  if (a.dimension() != b.dimension() || a.degree() != b.degree())
    throw InvalidArgument("jet_distance: shape mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) d = std::max(d, magnitude(S(a.raw()[i] - b.raw()[i])));
  return d;
}

template <class S>
double jet_norm(const JetMap<S>& a) {
  return max_norm(a.raw());
}

#define SKEWLIN_INSTANTIATE_JETS(S)                                                  \
  template class PolyMap<S>;                                                         \
  template class JetMap<S>;                                                          \
  template PolyMap<S> poly_compose(const PolyMap<S>&, const PolyMap<S>&);            \
  template JetMap<S> jet_compose(const JetMap<S>&, const JetMap<S>&);                \
  template JetMap<S> jet_invert(const JetMap<S>&);                                   \
  template std::vector<S> jet_evaluate(const JetMap<S>&, const std::vector<S>&);     \
  template std::vector<S> jet_jacobian(const JetMap<S>&, const std::vector<S>&);     \
  template double jet_distance(const JetMap<S>&, const JetMap<S>&);                  \
  template double jet_norm(const JetMap<S>&);

SKEWLIN_INSTANTIATE_JETS(double)
SKEWLIN_INSTANTIATE_JETS(std::complex<double>)
SKEWLIN_INSTANTIATE_JETS(mpq_class)
SKEWLIN_INSTANTIATE_JETS(Dual<double>)
SKEWLIN_INSTANTIATE_JETS(Dual<std::complex<double>>)

#undef SKEWLIN_INSTANTIATE_JETS

}  // namespace skewlin
