#include "skewlin/cantor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "skewlin/errors.hpp"
#include "skewlin/linalg.hpp"
#include "skewlin/sampling.hpp"

namespace skewlin {

namespace {

using Mat = Eigen::MatrixXd;
using EVec = Eigen::VectorXd;

Mat to_mat(const RealVec& rowmajor, std::size_t n) {
  Mat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rowmajor[i * n + j];
  return m;
}

EVec to_evec(const RealVec& v) { return Eigen::Map<const EVec>(v.data(), static_cast<Eigen::Index>(v.size())); }

RealVec from_evec(const EVec& v) { return RealVec(v.data(), v.data() + v.size()); }

Mat frame_matrix(const std::vector<RealVec>& frame) {
  const auto n = static_cast<Eigen::Index>(frame.size());
  Mat l(n, n);
  for (Eigen::Index j = 0; j < n; ++j) l.col(j) = to_evec(frame[static_cast<std::size_t>(j)]);
  return l;
}

/// Orthonormal factor of a QR decomposition with non-negative diagonal in R.
Mat orthonormalize(const Mat& a) {
  const Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(a.rows(), a.cols());
  const Mat& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

/// Largest distance between the projectors onto the leading i columns, i < n.
double flag_distance(const Mat& a, const Mat& b) {
  double out = 0.0;
  for (Eigen::Index i = 1; i < a.cols(); ++i) {
    const Mat pa = a.leftCols(i) * a.leftCols(i).transpose();
    const Mat pb = b.leftCols(i) * b.leftCols(i).transpose();
    out = std::max(out, (pa - pb).norm());
  }
  return out;
}

double sine_angle(const EVec& w, const EVec& u) {
  const double len = w.norm();
  if (len == 0.0) return 1.0;
  return (w - w.dot(u) * u).norm() / len;
}

void normalize_sign(EVec& u) {
  const double scale = u.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < u.size(); ++j)
    if (std::abs(u(j)) > 1e-12 * scale) {
      if (u(j) < 0.0) u = -u;
      return;
    }
}

std::string word_label(const ExpandingModel& model, const std::vector<int>& word) {
  std::ostringstream os;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i > 0) os << ' ';
    os << model.labels.at(static_cast<std::size_t>(word[i]));
  }
  return os.str();
}

std::vector<int> close_word(const ExpandingModel& model, std::vector<int> word) {
  if (word.empty()) throw InvalidArgument("periodic orbit needs a non-empty word");
  for (int s : word)
    if (s < 0 || static_cast<std::size_t>(s) >= model.size()) throw InvalidArgument("word symbol out of range");
  const auto& base = *model.base();
  for (std::size_t i = 0; i + 1 < word.size(); ++i)
    if (!base.admissible(word[i], word[i + 1])) throw InvalidArgument("inadmissible word " + word_label(model, word));
  const auto bridge = connecting_word(base, word.back(), word.front());
  word.insert(word.end(), bridge.begin(), bridge.end());
  return word;
}

/// a_0 along the cycle: site t + 1 is branch word[t] applied to site t.
std::vector<RealVec> cycle_points(const ExpandingModel& model, const std::vector<int>& word) {
  const std::size_t p = word.size();
  RealVec x(model.dimension, 0.0);
  for (int round = 0; round < 100000; ++round) {
    RealVec y = x;
    for (std::size_t t = 0; t < p; ++t) y = model.branches[static_cast<std::size_t>(word[t])].evaluate(y);
    double change = 0.0;
    double size = 1.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      change = std::max(change, std::abs(y[i] - x[i]));
      size = std::max(size, std::abs(y[i]));
    }
    x = std::move(y);
    if (change <= 4.0 * std::numeric_limits<double>::epsilon() * size) break;
  }
  std::vector<RealVec> points(p);
  points[0] = x;
  for (std::size_t t = 0; t + 1 < p; ++t) points[t + 1] = model.branches[static_cast<std::size_t>(word[t])].evaluate(points[t]);
  return points;
}

template <class Step>
std::vector<Mat> flag_iteration(std::size_t p, std::size_t n, double tol, int max_iterations, int& steps,
                                const char* which, Step&& step) {
  std::vector<Mat> flags(p);
  // A fixed generic start: coordinate flags can be invariant without being dominant.
  UniformStream rng(0x5eed);
  Mat q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < q.cols(); ++j) q(i, j) = rng.uniform(-1.0, 1.0);
  q = orthonormalize(q);
  Mat previous = q;
  double change = std::numeric_limits<double>::infinity();
  for (int round = 1;; ++round) {
    q = step(q, flags);
    steps += static_cast<int>(p);
    change = flag_distance(q, previous);
    previous = q;
    if (round >= 2 && change <= tol) return flags;
    if (steps > max_iterations)
      throw ConvergenceError(std::string("no spectral gap detected: the ") + which + " flags still move by " +
                                 format_real(change) + " after " + std::to_string(steps) + " steps",
                             change);
  }
}

FiberMap<double> with_model_frames(const ExpandingModel& model, const PeriodicOrbit& orbit, std::size_t t, double s,
                                   bool check) {
  const std::size_t n = model.dimension;
  const std::size_t p = orbit.word.size();
  const std::size_t next = (t + 1) % p;
  const auto& branch = model.branches[static_cast<std::size_t>(orbit.word[t])];
  const int r = std::max(branch.degree(), 1);

  PolyMap<double> chart(n, r);
  const Mat l = frame_matrix(orbit.frames[t]);
  const auto& set = chart.index_set();
  for (std::size_t i = 0; i < n; ++i) {
    chart.coeff(i, 0) = orbit.points[t][i];
    for (std::size_t j = 0; j < n; ++j)
      chart.coeff(i, set.order_begin(1) + j) = s * l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const auto composed = poly_compose(branch.with_degree(r), chart);
  const Mat back = (s * frame_matrix(orbit.frames[next])).inverse();

  FiberMap<double> f(n, r);
  for (std::size_t k = 0; k < set.size(); ++k) {
    EVec column(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
      column(static_cast<Eigen::Index>(j)) = composed.coeff(j, k) - (k == 0 ? orbit.points[next][j] : 0.0);
    const EVec mapped = back * column;
    for (std::size_t i = 0; i < n; ++i) f.coeff(i, k) = mapped(static_cast<Eigen::Index>(i));
  }

  double diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag = std::max(diag, std::abs(f.coeff(i, set.order_begin(1) + i)));
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(f.coeff(i, 0)) > 1e-9)
      throw InvalidArgument("rescaled branch does not fix the origin: constant " + format_real(f.coeff(i, 0)));
    f.coeff(i, 0) = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double& c = f.coeff(i, set.order_begin(1) + j);
      if (std::abs(c) > 1e-9 * std::max(1.0, diag))
        throw InvalidArgument("frames do not diagonalize the branch derivative: off-diagonal entry " + format_real(c));
      c = 0.0;
    }
  }

  if (check) {
    for (const auto& x : ball_samples(n, 64, 1.0)) {
      const double norm = euclidean_norm(f.evaluate(x));
      if (!(norm < 1.0))
        throw InvalidArgument("scale " + format_real(s) + " too large: rescaled branch " +
                              model.labels[static_cast<std::size_t>(orbit.word[t])] + " maps a point of the ball to norm " +
                              format_real(norm));
    }
  }
  return f;
}

RealVec random_in_ball(UniformStream& rng, std::size_t n, double radius) {
  RealVec x(n);
  for (;;) {
    double sq = 0.0;
    for (auto& c : x) {
      c = rng.uniform(-1.0, 1.0);
      sq += c * c;
    }
    if (sq <= 1.0) break;
  }
  for (auto& c : x) c *= radius;
  return x;
}

}  // namespace

void ExpandingModel::validate() {
  if (branches.empty()) throw InvalidArgument("expanding model needs at least one branch");
  const std::size_t n = branches.front().dimension();
  if (n == 0) throw InvalidArgument("expanding model has dimension 0");
  if (dimension != n && dimension != 1) throw InvalidArgument("branch dimension does not match the model dimension");
  dimension = n;
  for (const auto& b : branches)
    if (b.dimension() != n) throw InvalidArgument("branches have different dimensions");
  const std::size_t m = branches.size();
  if (allowed.empty()) allowed.assign(m, std::vector<int>(m, 1));
  if (allowed.size() != m) throw InvalidArgument("admissibility matrix has the wrong number of rows");
  for (const auto& row : allowed) {
    if (row.size() != m) throw InvalidArgument("admissibility matrix is not square");
    for (int v : row)
      if (v != 0 && v != 1) throw InvalidArgument("admissibility entries must be 0 or 1");
  }
  if (labels.empty())
    for (std::size_t i = 0; i < m; ++i) labels.push_back(std::to_string(i));
  if (labels.size() != m) throw InvalidArgument("one label per branch required");

  std::vector<std::vector<int>> transitions(m, std::vector<int>(m, 0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) transitions[j][i] = allowed[i][j];
  shift_space = SymbolicBase::sft(m, std::move(transitions), labels);

  const double lip = contraction().first;
  if (!(lip < 1.0)) throw InvalidArgument("inverse branches are not contracting: sampled |D| = " + format_real(lip));
}

const BasePtr& ExpandingModel::base() const {
  if (!shift_space) throw InvalidArgument("expanding model used before validate()");
  return shift_space;
}

std::pair<double, double> ExpandingModel::contraction(int samples) const {
  double lip = 0.0;
  double reach = 0.0;
  for (const auto& b : branches)
    for (const auto& x : ball_samples(b.dimension(), static_cast<std::size_t>(samples), 1.0)) {
      const Mat j = to_mat(b.jacobian(x), b.dimension());
      lip = std::max(lip, Eigen::JacobiSVD<Mat>(j).singularValues()(0));
      reach = std::max(reach, euclidean_norm(b.evaluate(x)));
    }
  return {lip, reach};
}

PeriodicOrbit periodic_orbit(const ExpandingModel& model, std::vector<int> word, double tol, int max_iterations) {
  PeriodicOrbit out;
  out.word = close_word(model, std::move(word));
  const std::size_t p = out.word.size();
  const std::size_t n = model.dimension;
  out.points = cycle_points(model, out.word);

  std::vector<Mat> d(p);
  std::vector<Mat> d_inv(p);
  out.derivatives.resize(p);
  for (std::size_t t = 0; t < p; ++t) {
    out.derivatives[t] = model.branches[static_cast<std::size_t>(out.word[t])].jacobian(out.points[t]);
    d[t] = to_mat(out.derivatives[t], n);
    d_inv[t] = d[t].inverse();
  }

  // E: dominant flags of the inverse branches, carried forward along the cycle.
  int e_steps = 0;
  int g_steps = 0;
  const auto e = flag_iteration(p, n, tol, max_iterations, e_steps, "E", [&](Mat q, std::vector<Mat>& flags) {
    for (std::size_t t = 0; t < p; ++t) {
      q = orthonormalize(d[t] * q);
      flags[(t + 1) % p] = q;
    }
    return q;
  });
  // G: dominant flags of Dg, carried backward.
  const auto g = flag_iteration(p, n, tol, max_iterations, g_steps, "G", [&](Mat q, std::vector<Mat>& flags) {
    for (std::size_t t = p; t-- > 0;) {
      q = orthonormalize(d_inv[t] * q);
      flags[t] = q;
    }
    return q;
  });

  out.iterations = std::max(e_steps, g_steps);

  const auto ni = static_cast<Eigen::Index>(n);
  out.frames.resize(p);
  for (std::size_t t = 0; t < p; ++t) {
    for (Eigen::Index i = 1; i <= ni; ++i) {
      EVec c = EVec::Zero(i);
      if (i == 1) {
        c(0) = 1.0;
      } else {
        const Mat m = g[t].rightCols(i - 1).transpose() * e[t].leftCols(i);
        const Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
        c = svd.matrixV().col(i - 1);
      }
      EVec u = e[t].leftCols(i) * c;
      u.normalize();
      normalize_sign(u);
      out.frames[t].push_back(from_evec(u));
    }
  }

  out.factors.resize(p);
  out.residuals.resize(p);
  out.min_gap = std::numeric_limits<double>::infinity();
  out.min_det = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < p; ++t) {
    const std::size_t prev = (t + p - 1) % p;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const EVec w = d_inv[prev] * to_evec(out.frames[t][i]);
      out.factors[t].push_back(w.norm());
      worst = std::max(worst, sine_angle(w, to_evec(out.frames[prev][i])));
    }
    out.residuals[t] = worst;
    for (std::size_t i = 0; i + 1 < n; ++i) out.min_gap = std::min(out.min_gap, out.factors[t][i + 1] / out.factors[t][i]);
    out.min_det = std::min(out.min_det, std::abs(frame_matrix(out.frames[t]).determinant()));
  }
  if (out.min_det < 1e-8)
    throw InvalidArgument("degenerate frame: |det L| = " + format_real(out.min_det) + " along " +
                          word_label(model, out.word));
  return out;
}

std::vector<std::vector<int>> periodic_words(const ExpandingModel& model, int length) {
  if (length < 1) throw InvalidArgument("word length must be positive");
  if (std::pow(static_cast<double>(model.size()), length) > 4194304.0)
    throw InvalidArgument("too many words of length " + std::to_string(length));
  const auto& base = *model.base();
  std::vector<std::vector<int>> words;
  for (std::size_t s = 0; s < model.size(); ++s) words.push_back({static_cast<int>(s)});
  for (int l = 1; l < length; ++l) {
    std::vector<std::vector<int>> longer;
    for (const auto& w : words)
      for (std::size_t s = 0; s < model.size(); ++s)
        if (base.admissible(w.back(), static_cast<int>(s))) {
          longer.push_back(w);
          longer.back().push_back(static_cast<int>(s));
        }
    words = std::move(longer);
  }
  return words;
}

SplittingFrame compute_splitting(const ExpandingModel& model, int depth, double tol) {
  SplittingFrame out;
  out.depth = depth;
  out.min_gap = std::numeric_limits<double>::infinity();
  out.min_det = std::numeric_limits<double>::infinity();
  for (const auto& w : periodic_words(model, depth)) {
    const auto orbit = periodic_orbit(model, w, tol);
    out.windows.push_back(word_label(model, w));
    out.vectors.push_back(orbit.frames[0]);
    out.factors.push_back(orbit.factors[0]);
    out.residuals.push_back(orbit.residuals[0]);
    out.iterations = std::max(out.iterations, orbit.iterations);
    out.min_gap = std::min(out.min_gap, orbit.min_gap);
    out.min_det = std::min(out.min_det, orbit.min_det);
    out.max_residual = std::max(out.max_residual, *std::max_element(orbit.residuals.begin(), orbit.residuals.end()));
  }
  return out;
}

FiberMap<double> rescaled_branch(const ExpandingModel& model, const PeriodicOrbit& orbit, std::size_t t, double s) {
  if (!(s > 0.0)) throw InvalidArgument("chart scale must be positive");
  return with_model_frames(model, orbit, t, s, true);
}

SkewSystem<double> cycle_system(const ExpandingModel& model, const PeriodicOrbit& orbit, double s) {
  const std::size_t p = orbit.word.size();
  std::vector<FiberMap<double>> table;
  for (std::size_t t = 0; t < p; ++t) table.push_back(rescaled_branch(model, orbit, t, s));
  return SkewSystem<double>(CylinderFunction<FiberMap<double>>(SymbolicBase::cycle(p), 0, std::move(table)));
}

SkewSystem<double> build_skew_from_model(const ExpandingModel& model, double s, int depth, double tol) {
  if (depth < 0) throw InvalidArgument("window depth must be non-negative");
  const auto& base = model.base();
  return SkewSystem<double>(CylinderFunction<FiberMap<double>>::tabulate(base, depth, [&](std::span<const int> w) {
    const auto orbit = periodic_orbit(model, std::vector<int>(w.begin(), w.end()), tol);
    return rescaled_branch(model, orbit, static_cast<std::size_t>(depth), s);
  }));
}

ChartFamily build_charts(const ExpandingModel& model, int depth, double s, const FlatOptions& options, double tol) {
  ChartFamily out;
  out.scale = s;
  double sigma_min = std::numeric_limits<double>::infinity();
  for (const auto& w : periodic_words(model, depth)) {
    auto orbit = periodic_orbit(model, w, tol);
    const auto sys = cycle_system(model, orbit, s);
    for (const auto& frame : orbit.frames)
      sigma_min = std::min(sigma_min, Eigen::JacobiSVD<Mat>(frame_matrix(frame)).singularValues().minCoeff());
    out.orbits.push_back({std::move(orbit), linearize(sys, options)});
  }
  out.radius = 0.5 * s * sigma_min;
  return out;
}

RealVec evaluate_chart(const ChartFamily& charts, const OrbitCharts& orbit, std::size_t t, const RealVec& v, double tol) {
  const Mat l = frame_matrix(orbit.orbit.frames.at(t));
  const EVec y = (charts.scale * l).partialPivLu().solve(to_evec(v));
  const BasePoint site{{static_cast<int>(t)}, 0};
  const auto x = invert_linearization(orbit.linearization, site, from_evec(y), tol);
  return from_evec(to_evec(orbit.orbit.points[t]) + charts.scale * l * to_evec(x));
}

RealVec apply_expanding(const PolyMap<double>& branch, const RealVec& x, RealVec seed, double tol) {
  const std::size_t n = x.size();
  RealVec y = std::move(seed);
  double step = 0.0;
  for (int it = 0; it < 100; ++it) {
    const RealVec fy = branch.evaluate(y);
    EVec residual(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) residual(static_cast<Eigen::Index>(i)) = fy[i] - x[i];
    const EVec delta = to_mat(branch.jacobian(y), n).partialPivLu().solve(residual);
    for (std::size_t i = 0; i < n; ++i) y[i] -= delta(static_cast<Eigen::Index>(i));
    step = delta.cwiseAbs().maxCoeff();
    if (step <= tol * std::max(1.0, max_norm(y))) return y;
  }
  throw ConvergenceError("Newton solve for the expanding map did not converge", step);
}

std::vector<ChartDefect> chart_defects(const ExpandingModel& model, const ChartFamily& charts, std::size_t points,
                                       std::uint64_t seed) {
  std::vector<ChartDefect> out;
  UniformStream rng(seed);
  for (const auto& oc : charts.orbits) {
    const auto& orbit = oc.orbit;
    const std::size_t p = orbit.word.size();
    const std::size_t prev = p - 1;
    const Mat d = to_mat(orbit.derivatives[prev], model.dimension);
    const auto& branch = model.branches[static_cast<std::size_t>(orbit.word[prev])];
    for (std::size_t k = 0; k < points; ++k) {
      const RealVec w = random_in_ball(rng, model.dimension, 0.9 * charts.radius);
      const RealVec v = from_evec(d * to_evec(w));
      const RealVec lhs = evaluate_chart(charts, oc, prev, w);
      const RealVec rhs = apply_expanding(branch, evaluate_chart(charts, oc, 0, v), orbit.points[prev]);
      double defect = 0.0;
      for (std::size_t i = 0; i < lhs.size(); ++i) defect += (lhs[i] - rhs[i]) * (lhs[i] - rhs[i]);
      out.push_back({word_label(model, orbit.word), v, std::sqrt(defect)});
    }
  }
  return out;
}

Continuation continue_hyperbolic(const ExpandingModel& model, const std::vector<PolyMap<double>>& perturbed, int depth,
                                 double tol) {
  Continuation out;
  out.perturbed = model;
  out.perturbed.branches = perturbed;
  if (perturbed.size() != model.size()) throw InvalidArgument("perturbation needs one branch per model branch");
  out.perturbed.validate();
  const auto& tilde = out.perturbed.branches;

  for (const auto& w : periodic_words(model, depth)) {
    const auto word = close_word(model, w);
    const std::size_t p = word.size();
    const auto points = cycle_points(model, word);
    auto psi = points;
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 1;; ++it) {
      std::vector<RealVec> next(p);
      double inc = 0.0;
      for (std::size_t t = 0; t < p; ++t) {
        next[(t + 1) % p] = tilde[static_cast<std::size_t>(word[t])].evaluate(psi[t]);
        inc = std::max(inc, distance(next[(t + 1) % p], psi[(t + 1) % p]));
      }
      psi = std::move(next);
      out.iterations = std::max(out.iterations, it);
      if (inc <= tol) break;
      const double floor = 64.0 * std::numeric_limits<double>::epsilon();
      if (std::isfinite(previous) && previous > floor) {
        const double ratio = inc / previous;
        out.observed_contraction = std::max(out.observed_contraction, ratio);
        if (ratio >= 1.0 && inc > floor)
          throw ConvergenceError("shadowing iteration is not contracting: increment ratio " + format_real(ratio), inc);
      }
      if (it >= 100000 || (inc <= floor && previous <= floor)) break;
      previous = inc;
    }
    for (std::size_t t = 0; t < p; ++t) {
      const std::size_t next = (t + 1) % p;
      const auto back = apply_expanding(tilde[static_cast<std::size_t>(word[t])], psi[next], psi[t]);
      out.residual = std::max(out.residual, distance(back, psi[t]));
    }
    out.windows.push_back(word_label(model, w));
    out.original.push_back(points[0]);
    out.continued.push_back(psi[0]);
  }
  return out;
}

std::vector<std::pair<std::string, RealVec>> sample_attractor(const ExpandingModel& model, int depth) {
  if (depth < 0) throw InvalidArgument("attractor depth must be non-negative");
  std::vector<std::pair<std::string, RealVec>> out;
  if (depth == 0) {
    out.emplace_back("", RealVec(model.dimension, 0.0));
    return out;
  }
  // Words w_0..w_{d-1} read in the model's order; base words are their reversals.
  for (auto w : periodic_words(model, depth)) {
    std::reverse(w.begin(), w.end());
    RealVec x(model.dimension, 0.0);
    for (std::size_t j = w.size(); j-- > 0;) x = model.branches[static_cast<std::size_t>(w[j])].evaluate(x);
    out.emplace_back(word_label(model, w), std::move(x));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace skewlin
