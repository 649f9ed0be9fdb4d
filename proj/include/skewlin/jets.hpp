#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "skewlin/multi_index.hpp"
#include "skewlin/scalar.hpp"

namespace skewlin {

/// Polynomial self-map of n-space in the monomial basis, orders 0..r.
///
/// Component i is sum_k c_{i,k} x^k. Unlike JetMap this carries constant
/// terms, so it also represents maps that do not fix the origin (IFS branches,
/// chart translations).
template <class S>
class PolyMap {
 public:
  PolyMap() = default;
  PolyMap(std::size_t n, int r);

  std::size_t dimension() const { return n_; }
  int degree() const { return r_; }
  const MultiIndexSet& index_set() const { return *set_; }

  S& coeff(std::size_t i, std::size_t rank) { return c_[i * set_->size() + rank]; }
  const S& coeff(std::size_t i, std::size_t rank) const { return c_[i * set_->size() + rank]; }
  S monomial(std::size_t i, const MultiIndex& k) const;
  void set_monomial(std::size_t i, const MultiIndex& k, const S& v);

  std::vector<S> evaluate(const std::vector<S>& x) const;
  /// Row-major n x n Jacobian at x.
  std::vector<S> jacobian(const std::vector<S>& x) const;
  /// Taylor re-expansion: the polynomial y -> P(p + y).
  PolyMap expanded_at(const std::vector<S>& p) const;
  /// Same polynomial at another truncation degree (drops or zero-pads terms).
  PolyMap with_degree(int r) const;

  template <class U, class Fn>
  PolyMap<U> transform(Fn&& fn) const {
    PolyMap<U> out(n_, r_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = 0; k < set_->size(); ++k) out.coeff(i, k) = fn(coeff(i, k));
    return out;
  }

  friend bool operator==(const PolyMap& a, const PolyMap& b) {
    return a.n_ == b.n_ && a.r_ == b.r_ && a.c_ == b.c_;
  }

 private:
  std::size_t n_ = 0;
  int r_ = 0;
  std::shared_ptr<const MultiIndexSet> set_;
  std::vector<S> c_;
};

/// Truncated composition outer(inner(x)) keeping orders <= r of outer.
template <class S>
PolyMap<S> poly_compose(const PolyMap<S>& outer, const PolyMap<S>& inner);

/// r-jet of a self-map of n-space fixing the origin.
///
/// Coefficients follow the Taylor convention: component i is
/// sum_{1 <= |k| <= r} c_{i,k} x^k / k!, so c_{i,k} = d^k f_i(0).
/// Storage is dense in graded rank order; no constant term is stored.
template <class S>
class JetMap {
 public:
  JetMap() = default;
  JetMap(std::size_t n, int r);

  static JetMap identity(std::size_t n, int r);
  static JetMap diagonal(const std::vector<S>& lambda, int r);
  /// Linear jet from a row-major n x n matrix.
  static JetMap linear(const std::vector<S>& matrix, std::size_t n, int r);
  /// Drops the constant term and truncates (or zero-extends) to degree r.
  static JetMap from_poly(const PolyMap<S>& p, int r);

  std::size_t dimension() const { return n_; }
  int degree() const { return r_; }
  const MultiIndexSet& index_set() const { return *set_; }
  /// Number of stored coefficients per component (= index_set().size() - 1).
  std::size_t terms() const { return set_ ? set_->size() - 1 : 0; }

  const S& taylor(std::size_t i, std::size_t rank) const { return c_[i * terms() + rank - 1]; }
  S& taylor(std::size_t i, std::size_t rank) { return c_[i * terms() + rank - 1]; }
  const S& taylor(std::size_t i, const MultiIndex& k) const;
  void set_taylor(std::size_t i, const MultiIndex& k, const S& v);
  /// Coefficient of x^k (not x^k / k!).
  S monomial(std::size_t i, const MultiIndex& k) const;
  void set_monomial(std::size_t i, const MultiIndex& k, const S& v);

  /// Row-major n x n linear part.
  std::vector<S> linear_part() const;
  std::vector<S> diagonal_part() const;

  /// Only the n diagonal degree-one coefficients may be nonzero at degree one.
  bool is_linear_diagonal() const;
  /// All coefficients with 2 <= |k| <= r vanish.
  bool is_flat() const;

  JetMap with_degree(int r) const;
  /// Jet keeping only coefficients with |k| in [lo, hi].
  JetMap band(int lo, int hi) const;
  PolyMap<S> to_poly() const;

  const std::vector<S>& raw() const { return c_; }
  std::vector<S>& raw() { return c_; }

  template <class U, class Fn>
  JetMap<U> transform(Fn&& fn) const {
    JetMap<U> out(n_, r_);
    for (std::size_t i = 0; i < c_.size(); ++i) out.raw()[i] = fn(c_[i]);
    return out;
  }

  JetMap& operator+=(const JetMap& o);
  JetMap& operator-=(const JetMap& o);
  JetMap& operator*=(const S& s);
  friend JetMap operator+(JetMap a, const JetMap& b) { return a += b; }
  friend JetMap operator-(JetMap a, const JetMap& b) { return a -= b; }
  friend JetMap operator*(JetMap a, const S& s) { return a *= s; }
  friend bool operator==(const JetMap& a, const JetMap& b) {
    return a.n_ == b.n_ && a.r_ == b.r_ && a.c_ == b.c_;
  }

 private:
  std::size_t n_ = 0;
  int r_ = 0;
  std::shared_ptr<const MultiIndexSet> set_;
  std::vector<S> c_;
};

/// Degree-r truncation of outer o inner. Throws InvalidArgument on shape mismatch.
template <class S>
JetMap<S> jet_compose(const JetMap<S>& outer, const JetMap<S>& inner);

/// Two-sided inverse in the jet semigroup. Throws InvalidArgument if the
/// linear part is singular.
template <class S>
JetMap<S> jet_invert(const JetMap<S>& j);

template <class S>
std::vector<S> jet_evaluate(const JetMap<S>& j, const std::vector<S>& x);

/// Row-major Jacobian of the truncated polynomial at x.
template <class S>
std::vector<S> jet_jacobian(const JetMap<S>& j, const std::vector<S>& x);

/// Largest coefficient magnitude of a - b (Taylor basis).
template <class S>
double jet_distance(const JetMap<S>& a, const JetMap<S>& b);

/// Largest coefficient magnitude.
template <class S>
double jet_norm(const JetMap<S>& a);

template <class S>
double distance(const JetMap<S>& a, const JetMap<S>& b) {
  return jet_distance(a, b);
}

}  // namespace skewlin
