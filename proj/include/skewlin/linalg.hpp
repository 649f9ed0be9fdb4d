#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "skewlin/errors.hpp"
#include "skewlin/scalar.hpp"

namespace skewlin {

/// Dense row-major square-matrix inverse by Gauss-Jordan elimination.
///
/// Works over any field in this library (floating, complex, rational, dual).
/// Pivots on the largest magnitude; throws InvalidArgument when the matrix is
/// singular (exactly for exact scalars, relative to 1e-14 otherwise).
template <class S>
std::vector<S> invert_matrix(std::vector<S> a, std::size_t n) {
  if (a.size() != n * n) throw InvalidArgument("invert_matrix: size mismatch");
  std::vector<S> inv(n * n, S(0));
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = S(1);

  double scale = 0.0;
  for (const auto& x : a) scale = std::max(scale, magnitude(x));

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = magnitude(a[col * n + col]);
    for (std::size_t row = col + 1; row < n; ++row) {
      const double m = magnitude(a[row * n + col]);
      if (m > best) {
        best = m;
        pivot = row;
      }
    }
    const bool singular = ScalarTraits<S>::exact ? (a[pivot * n + col] == S(0)) : !(best > 1e-14 * scale);
    if (singular) throw InvalidArgument("singular linear part");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a[pivot * n + j], a[col * n + j]);
        std::swap(inv[pivot * n + j], inv[col * n + j]);
      }
    }
    const S p = S(1) / a[col * n + col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col * n + j] *= p;
      inv[col * n + j] *= p;
    }
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col) continue;
      const S factor = a[row * n + col];
      if (factor == S(0)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[row * n + j] -= factor * a[col * n + j];
        inv[row * n + j] -= factor * inv[col * n + j];
      }
    }
  }
  return inv;
}

template <class S>
std::vector<S> mat_vec(const std::vector<S>& a, const std::vector<S>& x) {
  const std::size_t n = x.size();
  std::vector<S> y(n, S(0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i] += a[i * n + j] * x[j];
  return y;
}

template <class S>
double max_norm(const std::vector<S>& x) {
  double m = 0.0;
  for (const auto& v : x) m = std::max(m, magnitude(v));
  return m;
}

template <class S>
double euclidean_norm(const std::vector<S>& x) {
  double s = 0.0;
  for (const auto& v : x) {
    const double m = magnitude(v);
    s += m * m;
  }
  return std::sqrt(s);
}

}  // namespace skewlin
