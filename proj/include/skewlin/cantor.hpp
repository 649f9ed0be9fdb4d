#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "skewlin/base.hpp"
#include "skewlin/flat.hpp"
#include "skewlin/jets.hpp"
#include "skewlin/skew.hpp"

namespace skewlin {

using RealVec = std::vector<double>;

/// An expanding map given by its contracting inverse branches on the unit ball.
///
/// allowed[i][j] = 1 when branch i may be applied to points in the image of
/// branch j. Itineraries of the inverse limit are the base symbols b with
/// a_0 = b_{-1}-branch(b_{-2}-branch(...)) and a_{-1} = b_0-branch(a_0), so
/// the base subshift uses the transposed matrix and sigma moves one step back
/// along g-orbits.
struct ExpandingModel {
  std::size_t dimension = 1;
  std::vector<PolyMap<double>> branches;
  std::vector<std::vector<int>> allowed;
  std::vector<std::string> labels;

  /// Subshift on branch labels with sigma(a)_i = a_{i+1}, set by validate().
  BasePtr shift_space;

  std::size_t size() const { return branches.size(); }
  /// Fills defaults, checks shapes and builds shift_space; throws InvalidArgument.
  void validate();
  const BasePtr& base() const;
  /// Sampled sup of |D branch| over the unit ball and sup |branch(x)|.
  std::pair<double, double> contraction(int samples = 512) const;
};

/// Points, frames and derivatives along the periodic itinerary repeating one base word.
struct PeriodicOrbit {
  std::vector<int> word;
  /// a_0 at sites t = 0..p-1; site t + 1 is branch word[t] applied to site t.
  std::vector<RealVec> points;
  /// Derivative of branch word[t] at points[t], row-major n x n.
  std::vector<RealVec> derivatives;
  /// Unit vectors u_1..u_n spanning F_1..F_n per site (F_1 least expanded by g).
  std::vector<std::vector<RealVec>> frames;
  /// |D g restricted to F_i| per site.
  std::vector<RealVec> factors;
  /// Largest angle between D g F_i(a) and F_i(g(a)) per site.
  std::vector<double> residuals;
  /// Graph-transform steps of the slower of the E and G flag iterations.
  int iterations = 0;
  /// Smallest ratio factor_{i+1} / factor_i over sites (infinity for n = 1).
  double min_gap = 0.0;
  /// Smallest |det L_a| over sites.
  double min_det = 0.0;
};

/// The periodic point of the inverse limit with itinerary `word` (closed by a
/// bridge when the word is not cyclically admissible) and its invariant
/// splitting, obtained by projective power iteration with QR until the flags
/// move by at most tol. Throws ConvergenceError without a spectral gap.
PeriodicOrbit periodic_orbit(const ExpandingModel& model, std::vector<int> word, double tol = 1e-13,
                             int max_iterations = 20000);

struct SplittingFrame {
  int depth = 0;
  std::vector<std::string> windows;
  std::vector<std::vector<RealVec>> vectors;
  std::vector<RealVec> factors;
  std::vector<double> residuals;
  int iterations = 0;
  double min_gap = 0.0;
  double min_det = 0.0;
  double max_residual = 0.0;
};

/// Splitting at the periodic representative of every admissible base word of length depth.
SplittingFrame compute_splitting(const ExpandingModel& model, int depth, double tol = 1e-13);

/// Admissible base words of a length; periodic_orbit closes them into cycles.
std::vector<std::vector<int>> periodic_words(const ExpandingModel& model, int length);

/// f at site t: (psi_t^{-1} o g o psi_{t+1})^{-1} = psi_{t+1}^{-1} o branch o psi_t
/// with psi_t(x) = a_0 + s L_t x. Linear parts off the diagonal and constant
/// terms below 1e-9 are set to zero; larger ones throw InvalidArgument.
FiberMap<double> rescaled_branch(const ExpandingModel& model, const PeriodicOrbit& orbit, std::size_t t, double s);

/// Skew product over the cycle of one periodic orbit.
SkewSystem<double> cycle_system(const ExpandingModel& model, const PeriodicOrbit& orbit, double s);

/// Skew product over the branch-label subshift, tabulated on windows of the
/// given symmetric depth; each window is represented by its periodic point.
/// Throws InvalidArgument when a rescaled branch leaves the ball.
SkewSystem<double> build_skew_from_model(const ExpandingModel& model, double s, int depth = 1, double tol = 1e-13);

/// Charts along one periodic orbit.
struct OrbitCharts {
  PeriodicOrbit orbit;
  LinearizationResult<double> linearization;
};

struct ChartFamily {
  double scale = 0.0;
  /// Radius of the tangent ball on which the charts are evaluated.
  double radius = 0.0;
  std::vector<OrbitCharts> orbits;
};

/// Linearizing charts phi_a = psi_a o h_a^{-1} o (D_0 psi_a)^{-1} for the
/// periodic representatives of all base words of the given length.
ChartFamily build_charts(const ExpandingModel& model, int depth, double s, const FlatOptions& options = {},
                         double tol = 1e-13);

/// phi at site t of one orbit, for a tangent vector v at a_0.
RealVec evaluate_chart(const ChartFamily& charts, const OrbitCharts& orbit, std::size_t t, const RealVec& v,
                       double tol = 1e-13);

/// Solves branch(y) = x for y near a seed by Newton's method: a local branch of g.
RealVec apply_expanding(const PolyMap<double>& branch, const RealVec& x, RealVec seed, double tol = 1e-15);

struct ChartDefect {
  std::string window;
  RealVec v;
  double defect = 0.0;
};

/// |phi_{g(a)}(D g v) - g(phi_a(v))| on `points` tangent vectors per site with
/// D g v in the chart ball.
std::vector<ChartDefect> chart_defects(const ExpandingModel& model, const ChartFamily& charts, std::size_t points,
                                       std::uint64_t seed = 1);

struct Continuation {
  std::vector<std::string> windows;
  std::vector<RealVec> original;
  std::vector<RealVec> continued;
  /// max |psi(g(k)) - g~(psi(k))| over samples.
  double residual = 0.0;
  int iterations = 0;
  /// Largest observed ratio of successive shadowing increments.
  double observed_contraction = 0.0;
  ExpandingModel perturbed;
};

/// Hyperbolic continuation on the periodic points of all base words of length
/// depth: psi(a_0(t+1)) = branch~(psi(a_0(t))) iterated from the unperturbed
/// orbit until the increment is <= tol. Throws ConvergenceError when the
/// shadowing iteration does not contract.
Continuation continue_hyperbolic(const ExpandingModel& model, const std::vector<PolyMap<double>>& perturbed, int depth,
                                 double tol = 1e-14);

/// Images of the ball centre under all admissible compositions
/// branch_{w_0} o ... o branch_{w_{d-1}}, with their words.
std::vector<std::pair<std::string, RealVec>> sample_attractor(const ExpandingModel& model, int depth);

}  // namespace skewlin
