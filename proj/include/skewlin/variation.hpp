#pragma once

#include <functional>
#include <vector>

#include "skewlin/formal.hpp"
#include "skewlin/skew.hpp"

namespace skewlin {

using Vec = std::vector<double>;

/// A contraction family v -> rho(u, v) with its partial linearizations at (u, phi(u)).
struct VariationProblem {
  std::function<Vec(const Vec& u, const Vec& v)> rho;
  /// D^1 rho(h): derivative in the parameter. Central differences of rho when empty.
  std::function<Vec(const Vec& h)> d1;
  /// D^2 rho(w): derivative in the state. Central differences of rho when empty.
  std::function<Vec(const Vec& w)> d2;
  /// Contraction bound of v -> rho(u, v).
  double k = 0.0;
  Vec u;
  /// Fixed point phi(u), or a starting guess of the right dimension; refined by iteration.
  Vec phi;
};

struct FixedPointDerivative {
  Vec value;
  int terms = 0;
  double last_increment = 0.0;
  /// k^{terms+1} / (1 - k) |D^1 rho(h)|
  double truncation_bound = 0.0;
};

/// Fixed point of v -> rho(u, v) by iteration from v0, stopped at increment <= tol (1 - k).
Vec iterate_fixed_point(const std::function<Vec(const Vec&, const Vec&)>& rho, const Vec& u, Vec v0, double k,
                        double tol, int max_iterations = 100000);

/// D phi(u) h = sum_m (D^2 rho)^m D^1 rho(h), truncated when a term is <= tol (1 - k).
/// Throws InvalidArgument when sampled |D^2 rho| exceeds k, and ConvergenceError
/// when the series outgrows its geometric envelope.
FixedPointDerivative fixed_point_derivative(VariationProblem p, const Vec& h, double tol);

/// Formal solution at f and its derivative in the direction g.
template <class S>
struct CoefficientDerivative {
  FormalSolution<S> value;
  /// d/dt of h_a at t = 0 for f + t g, as jets per window.
  CylinderFunction<JetMap<S>> jets;
  /// d/dt of each coefficient family, aligned with value.coefficients.
  std::vector<CylinderFunction<S>> families;
};

/// Fibers f + t g over the common refinement of both tables (t = eps part of a dual number).
template <class S>
SkewSystem<Dual<S>> perturbation_system(const SkewSystem<S>& sys, const SkewSystem<S>& direction);

/// Directional derivative of the formal stage. Each O_{k,i} fixed point is
/// differentiated by the Neumann series of its linear part; the degree-by-degree
/// conjugations propagate the derivative through dual-number jet arithmetic.
/// The direction must fix 0 and have diagonal linear parts.
template <class S>
CoefficientDerivative<S> coefficient_derivative(const SkewSystem<S>& sys, const SkewSystem<S>& direction, int r,
                                                const FormalOptions& options = {});

/// Central difference (value(f + step g) - value(f - step g)) / (2 step) of the formal jets.
template <class S>
CylinderFunction<JetMap<S>> coefficient_finite_difference(const SkewSystem<S>& sys, const SkewSystem<S>& direction,
                                                          int r, double step, const FormalOptions& options = {});

}  // namespace skewlin
