#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "skewlin/scalar.hpp"

namespace skewlin {

/// Radical inverse of i in the given prime base.
double radical_inverse(std::uint64_t i, unsigned base);

/// Halton point i (starting at 1) in [0,1)^dim.
std::vector<double> halton_point(std::uint64_t i, std::size_t dim);

/// Deterministic low-discrepancy points in the closed real ball of the given
/// radius in dim dimensions; the origin and the axis points +-radius e_j come
/// first, then points on the boundary sphere alternate with interior points.
std::vector<std::vector<double>> ball_samples(std::size_t dim, std::size_t count, double radius,
                                              bool include_boundary = true);

/// Seeded uniform [0,1) stream; identical seeds give identical sequences on
/// every platform.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 engine_;
};

/// Real coordinates to a point of S^n: complex scalars consume two coordinates.
template <class S>
std::vector<S> point_from_real(const std::vector<double>& coords) {
  std::vector<S> x;
  if constexpr (ScalarTraits<S>::complex) {
    for (std::size_t j = 0; j + 1 < coords.size(); j += 2)
      x.push_back(ScalarTraits<S>::from_complex({coords[j], coords[j + 1]}));
  } else {
    for (double c : coords) x.push_back(ScalarTraits<S>::from_complex({c, 0.0}));
  }
  return x;
}

/// Number of real coordinates of S^n.
template <class S>
std::size_t real_dimension(std::size_t n) {
  return ScalarTraits<S>::complex ? 2 * n : n;
}

}  // namespace skewlin
