#pragma once

#include <cstddef>
#include <vector>

#include "skewlin/base.hpp"
#include "skewlin/jets.hpp"
#include "skewlin/skew.hpp"

namespace skewlin {

/// The family q_{a,k,i} for one component i and one multiindex k.
template <class S>
struct CoefficientFamily {
  std::size_t component = 0;
  MultiIndex k;
  CylinderFunction<S> q;
  bool forward = true;
  double contraction = 0.0;
  int iterations = 0;
  double bound = 0.0;
  double truncation_bound = 0.0;
  bool exact = false;
};

template <class S>
struct FormalSolution {
  int degree = 0;
  /// h_a with h_a(0) = 0 and D_0 h_a = id.
  CylinderFunction<JetMap<S>> jets;
  std::vector<CoefficientFamily<S>> coefficients;
  /// Max coefficient magnitude of h_{sigma(a)} o f_a - D_0 f_a o h_a.
  double residual = 0.0;
  double truncation_bound = 0.0;
  bool converged = true;

  const CoefficientFamily<S>& coefficient(std::size_t i, const MultiIndex& k) const;
};

struct FormalOptions {
  double tol = 1e-13;
  int max_depth = 12;
  /// Subshift tables stop deepening once a conjugated table would exceed this many windows.
  double window_budget = 4096;
  /// Throw ConvergenceError when a depth-capped family misses tol.
  bool strict = false;
};

/// Degree-by-degree polynomial linearization.
///
/// For j = 2..r the system is conjugated by the current jets, each q_{k,i}
/// with |k| = j is the fixed point of O_{k,i} (forward branch when
/// |lambda_{a,i}| > |lambda_a^k|, backward otherwise), and h <- (id + Q) o h.
/// Throws HypothesisError on a non-diagonal linear part or a resonance.
template <class S>
FormalSolution<S> solve_formal(const SkewSystem<S>& sys, int r, const FormalOptions& options = {});

/// h_{sigma(a)} o f_a - D_0 f_a o h_a truncated at the solution degree.
template <class S>
CylinderFunction<JetMap<S>> residual_jet(const SkewSystem<S>& sys, const FormalSolution<S>& sol);

/// Largest |k-multiplier ratio| min(|lambda^k / lambda_i|, |lambda_i / lambda^k|)
/// over windows, components and 2 <= |k| <= r: the worst contraction of the
/// operators O_{k,i}.
template <class S>
double operator_contraction(const SkewSystem<S>& sys, int r);

}  // namespace skewlin
