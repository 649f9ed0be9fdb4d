#pragma once

#include <cmath>

#include "skewlin/errors.hpp"

namespace skewlin {

template <class X>
struct NeumannResult {
  X value;
  /// Number of operator applications summed after the leading term.
  int terms = 0;
  double last_increment = 0.0;
  /// k^{terms+1} / (1 - k) * |rhs|
  double truncation_bound = 0.0;
};

/// x = sum_{m >= 0} T^m rhs for a linear T of norm <= k < 1.
///
/// Stops once a term has norm <= tol * (1 - k). Throws ConvergenceError when
/// a term grows beyond the certified geometric envelope or the term budget
/// runs out.
template <class X, class Apply, class Add, class Norm>
NeumannResult<X> neumann_series(Apply&& apply, X rhs, double k, double tol, Add&& add, Norm&& norm,
                                int max_terms = 100000) {
  if (!(k < 1.0)) throw InvalidArgument("Neumann series needs k < 1");
  const double kk = k > 0.0 ? k : 0.0;
  const double rhs_norm = norm(rhs);
  NeumannResult<X> out;
  out.value = rhs;
  out.last_increment = rhs_norm;
  X term = std::move(rhs);
  double envelope = rhs_norm;
  while (out.last_increment > tol * (1.0 - kk)) {
    if (out.terms >= max_terms)
      throw ConvergenceError("Neumann series did not converge within the term budget", out.last_increment);
    term = apply(term);
    ++out.terms;
    out.last_increment = norm(term);
    envelope *= kk;
    if (out.last_increment > 1.000001 * envelope + 1e-300 && out.last_increment > tol)
      throw ConvergenceError("Neumann series term exceeds the certified contraction bound", out.last_increment);
    out.value = add(out.value, term);
  }
  out.truncation_bound = std::pow(kk, out.terms + 1) / (1.0 - kk) * rhs_norm;
  return out;
}

}  // namespace skewlin
