#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "skewlin/base.hpp"
#include "skewlin/jets.hpp"
#include "skewlin/multi_index.hpp"

namespace skewlin {

/// Polynomial fiber map of n-space fixing the origin (no constant terms).
template <class S>
using FiberMap = PolyMap<S>;

/// Skew product f(a, x) = (sigma(a), f_a(x)) with polynomial fibers.
template <class S>
class SkewSystem {
 public:
  SkewSystem() = default;
  explicit SkewSystem(CylinderFunction<FiberMap<S>> fibers);

  const BasePtr& base() const { return fibers_.base(); }
  const CylinderFunction<FiberMap<S>>& fibers() const { return fibers_; }
  std::size_t dimension() const { return n_; }
  int degree() const { return r_; }
  int depth() const { return fibers_.depth(); }

  const FiberMap<S>& fiber(const BasePoint& a) const { return fibers_.at(a); }
  const FiberMap<S>& fiber_at_window(std::span<const int> w) const { return fibers_.at_window(w); }

  /// Diagonal entries lambda_{a,i} of D_0 f_a per window.
  CylinderFunction<std::vector<S>> multipliers() const;
  /// r-jets of the fibers (Taylor convention).
  CylinderFunction<JetMap<S>> jets(int r) const;
  bool is_linear() const;
  /// Every linear part is diagonal.
  bool is_diagonal() const;

  template <class U, class Fn>
  SkewSystem<U> transform(Fn&& fn) const {
    return SkewSystem<U>(fibers_.template map<FiberMap<U>>([&](const FiberMap<S>& f) { return f.template transform<U>(fn); }));
  }

 private:
  CylinderFunction<FiberMap<S>> fibers_;
  std::size_t n_ = 0;
  int r_ = 0;
};

/// f truncated to an r-jet.
template <class S>
JetMap<S> jet_of_map(const FiberMap<S>& f, int r) {
  return JetMap<S>::from_poly(f, r);
}

struct H1Result {
  bool pass = false;
  int samples = 0;
  /// Sampled sup over windows and the unit ball of the operator norm of D_x f_a.
  double sup_derivative = 0.0;
  /// 1 - sampled sup |f_a(x)|; positive when the images stay inside the ball.
  double containment_margin = 0.0;
  std::string worst_window;
  std::string message;
};

struct H2Result {
  bool pass = true;
  std::string window;
  std::size_t row = 0;
  std::size_t col = 0;
  double magnitude = 0.0;
};

/// Sign of |lambda_i| - |lambda^k| for one (i, k): +1 everywhere, -1
/// everywhere, or 0 when it vanishes or changes across windows.
struct ResonanceSign {
  std::size_t component = 0;
  MultiIndex k;
  int sign = 0;
};

struct ResonanceWitness {
  std::size_t component = 0;  // zero-based
  MultiIndex k;
  std::string window_a;
  std::string window_b;
  double difference_a = 0.0;  // |lambda_i| - |lambda^k| at window_a
  double difference_b = 0.0;
  bool equality = false;
};

struct H3Result {
  bool pass = true;
  std::optional<ResonanceWitness> witness;
  std::vector<ResonanceSign> signs;
};

struct HypothesisReport {
  H1Result h1;
  H2Result h2;
  H3Result h3;
  /// Smallest r with Lambda_a^r < mu_a on every window, if one exists below r_max.
  std::optional<int> h4_minimal_r;
  double mu = 0.0;      // min over windows of mu_a
  double Lambda = 0.0;  // max over windows of Lambda_a

  bool passed() const { return h1.pass && h2.pass && h3.pass && h4_minimal_r.has_value(); }
  /// Multi-line human-readable summary.
  std::string describe() const;
};

/// Runs (H1)-(H3) and finds the minimal r for (H^r_4).
///
/// (H1) is sampled on `samples` low-discrepancy points of the unit ball per
/// window; (H2) and (H3) are decided on the coefficient tables. (H3) covers
/// 2 <= |k| <= h4_minimal_r - 1 (or r_max - 1 when (H^r_4) fails).
/// Throws InvalidArgument when samples is zero.
template <class S>
HypothesisReport check_hypotheses(const SkewSystem<S>& sys, int r_max, int samples);

/// Sign of |lambda_{a,i}| - |lambda_a^k| over all windows (0 when mixed or equal).
template <class S>
int resonance_sign(const CylinderFunction<std::vector<S>>& lambda, std::size_t i, const MultiIndex& k);

/// The conjugated family h_{sigma(a)} o f_a o h_a^{-1} truncated at the
/// degree of h. Output depth is max(fiber depth, h depth + 1) on subshifts.
template <class S>
SkewSystem<S> conjugate_by_jet(const SkewSystem<S>& sys, const CylinderFunction<JetMap<S>>& h);

struct ContractionRates {
  std::vector<double> mu;      // per fiber window
  std::vector<double> Lambda;  // per fiber window
  double C = 0.0;
  double M = 0.0;
  double delta = 0.0;
  int r = 0;
  /// C + r * delta * M
  double rate() const { return C + r * delta * M; }
};

/// mu_a, Lambda_a and the flat-stage constants at radius delta:
/// C = max mu_a^{-1} |D_x f_a|^r and M = max mu_a^{-1} sum_{j=2}^r binom(r,j) |D^j f_a(x)|
/// over sampled x with |x| <= delta.
template <class S>
ContractionRates contraction_rates(const SkewSystem<S>& sys, int r, double delta, int samples = 256);

/// Largest delta in {1/2, 1/4, ..., 2^-20} with C + r delta M < 1, or the
/// override when given (still certified). Throws ConvergenceError otherwise.
template <class S>
ContractionRates select_delta(const SkewSystem<S>& sys, int r, int samples = 256,
                              std::optional<double> delta_override = std::nullopt);

}  // namespace skewlin
