#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "skewlin/base.hpp"
#include "skewlin/formal.hpp"
#include "skewlin/jets.hpp"
#include "skewlin/skew.hpp"

namespace skewlin {

struct FlatOptions {
  /// Flattening degree; defaults to the minimal r of (H^r_4).
  std::optional<int> degree;
  /// Upper limit of the (H^r_4) search.
  int max_degree = 12;
  /// Per-evaluation stopping tolerance on successive limit values.
  double tol = 1e-12;
  int max_iterations = 4000;
  /// Sampling budget for (H1) and for the delta certificate.
  int samples = 256;
  std::optional<double> delta;
  FormalOptions formal;
  /// Reject systems whose sampled (H1) check fails on the unit ball. Off by
  /// default: the limit only needs the orbit of the evaluated point to converge.
  bool enforce_h1 = false;
  /// Report the spread over admissible continuations when an itinerary has to be extended.
  bool sensitivity = true;
};

/// Outcome of one pointwise evaluation of h_a.
template <class S>
struct Evaluation {
  std::vector<S> value;
  int iterations = 0;
  double last_increment = 0.0;
  /// Norms of successive differences of the limit sequence.
  std::vector<double> increments;
  /// Spread of h_a(x) over admissible continuations of a short itinerary.
  double sensitivity = 0.0;
};

/// Orbit data of one base point: fibers, polynomial-stage jets and multipliers
/// at sites 0, 1, 2, ... of the forward orbit.
template <class S>
struct OrbitData {
  std::vector<FiberMap<S>> fibers;
  std::vector<JetMap<S>> jets;
  std::vector<std::vector<S>> multipliers;
  /// Site of a_0 and the period of the site sequence.
  std::size_t start = 0;
  /// Number of forward steps whose sites reflect the true itinerary.
  std::size_t reach = std::numeric_limits<std::size_t>::max();
  /// Coefficient sums of hhat_{s+1} o f_s - D_0 f_s hhat_s over sites, split
  /// into orders 2..r and orders above r; they bound the next limit increment.
  double remainder_low = 0.0;
  double remainder_high = 0.0;

  std::size_t site(std::size_t m) const { return (start + m) % fibers.size(); }
};

template <class S>
struct LinearizationResult {
  SkewSystem<S> system;
  FormalSolution<S> formal;
  HypothesisReport hypotheses;
  int degree = 0;
  double delta = 0.0;
  ContractionRates rates;
  /// Certified per-step contraction C + r delta M.
  double rate = 0.0;
  /// Worst contraction of the coefficient operators at this degree.
  double operator_rate = 0.0;
  /// Sites kept on each side of an orbit segment when approximating subshift points by cycles.
  int padding = 0;
  FlatOptions options;
  /// Largest conjugacy defect seen by defect_report.
  double diagnostics = 0.0;
};

/// Runs the hypothesis check, the formal stage at the flattening degree and
/// the delta certificate.
template <class S>
LinearizationResult<S> linearize(const SkewSystem<S>& sys, const FlatOptions& options = {});

/// Orbit data for evaluating h at a and its forward images.
///
/// Finite bases use the formal table. On subshifts the itinerary is cut to
/// sites -padding .. steps + padding, closed into a cycle (through the
/// shortest admissible connecting word when needed), and the formal stage is
/// solved exactly on that cycle. Missing symbols are filled canonically.
template <class S>
OrbitData<S> orbit_data(const LinearizationResult<S>& res, const BasePoint& a, std::size_t steps);

/// h_a(x) = lim_m (D_0 f_a^m)^{-1} hhat_{sigma^m a}(f_a^m(x)) along precomputed
/// orbit data, starting `offset` sites after a_0.
template <class S>
Evaluation<S> evaluate_on_orbit(const LinearizationResult<S>& res, const OrbitData<S>& orbit,
                                const std::vector<S>& x, double tol, std::size_t offset = 0);

/// h_a(x). Throws ConvergenceError (with the last increment) when the limit
/// sequence does not settle within the iteration cap.
template <class S>
Evaluation<S> evaluate_linearization(const LinearizationResult<S>& res, const BasePoint& a, const std::vector<S>& x,
                                     double tol);

/// Solves h_a(x) = y by Newton iteration seeded with the inverse polynomial
/// jet. Throws ConvergenceError on divergence and InvalidArgument when the
/// solution leaves the unit ball.
template <class S>
std::vector<S> invert_linearization(const LinearizationResult<S>& res, const BasePoint& a, const std::vector<S>& y,
                                    double tol);

struct DefectGrid {
  std::size_t points = 100;
  std::uint64_t seed = 1;
  /// Sampling radius; 0 means the certified delta.
  double radius = 0.0;
  /// Symbols drawn on each side of a_0 for subshift samples.
  int itinerary = 0;
};

template <class S>
struct DefectRow {
  std::string window;
  std::vector<S> x;
  std::vector<S> h;
  double defect = 0.0;
  double observed_rate = 0.0;
  int iterations = 0;
};

template <class S>
struct DefectReport {
  std::vector<DefectRow<S>> rows;
  double sup_defect = 0.0;
  /// Largest fitted per-step decay of the limit increments.
  double empirical_rate = 0.0;
  double certified_rate = 0.0;
};

/// Sup over sampled (a, x) of |h_{sigma(a)}(f_a(x)) - D_0 f_a h_a(x)|.
/// Updates res.diagnostics.
template <class S>
DefectReport<S> defect_report(LinearizationResult<S>& res, const DefectGrid& grid);

/// Least-squares slope of log increments, as a per-step ratio; increments at
/// the rounding floor are ignored. Returns 0 with fewer than three usable terms.
double fitted_ratio(const std::vector<double>& increments, double floor);

}  // namespace skewlin
