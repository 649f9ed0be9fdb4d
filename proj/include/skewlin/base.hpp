#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skewlin/errors.hpp"
#include "skewlin/jets.hpp"
#include "skewlin/scalar.hpp"

namespace skewlin {

/// All admissible words of one window depth, in lexicographic order.
class WindowSet {
 public:
  WindowSet(std::size_t alphabet, int depth, std::vector<int> words);

  int depth() const { return depth_; }
  std::size_t length() const { return static_cast<std::size_t>(2 * depth_ + 1); }
  std::size_t size() const { return codes_.size(); }
  std::span<const int> word(std::size_t index) const {
    return {words_.data() + index * length(), length()};
  }
  /// Index of an admissible word of this length; npos when absent.
  std::size_t find(std::span<const int> word) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t alphabet_;
  int depth_;
  std::vector<int> words_;
  std::vector<std::uint64_t> codes_;
};

/// A point of the base: for finite bases the point index, for subshifts a
/// finite stretch of a bi-infinite itinerary with the position of a_0.
struct BasePoint {
  std::vector<int> symbols;
  std::ptrdiff_t origin = 0;

  int at(std::ptrdiff_t offset) const { return symbols.at(static_cast<std::size_t>(origin + offset)); }
  /// Number of known symbols strictly before / after a_0.
  std::ptrdiff_t past() const { return origin; }
  std::ptrdiff_t future() const { return static_cast<std::ptrdiff_t>(symbols.size()) - origin - 1; }
};

/// Base dynamics (A, sigma): a permutation of finitely many points or a
/// two-sided subshift of finite type with sigma(a)_i = a_{i+1}.
class SymbolicBase {
 public:
  enum class Kind { finite, sft };

  static std::shared_ptr<const SymbolicBase> finite(std::vector<int> sigma,
                                                    std::vector<std::string> labels = {});
  /// Sites 0..length-1 with sigma(t) = t + 1 mod length.
  static std::shared_ptr<const SymbolicBase> cycle(std::size_t length);
  static std::shared_ptr<const SymbolicBase> sft(std::size_t alphabet, std::vector<std::vector<int>> transitions,
                                                 std::vector<std::string> labels = {});
  static std::shared_ptr<const SymbolicBase> full_shift(std::size_t alphabet);

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::finite; }
  /// Number of points (finite) or alphabet size (sft).
  std::size_t size() const { return size_; }
  const std::vector<int>& permutation() const { return sigma_; }
  const std::vector<int>& inverse_permutation() const { return sigma_inv_; }
  const std::vector<std::vector<int>>& transitions() const { return transitions_; }
  const std::vector<std::string>& labels() const { return labels_; }
  bool admissible(int from, int to) const { return transitions_[from][to] != 0; }

  /// Number of admissible windows of the given depth (1 for depth < 0 never).
  double window_count(int depth) const;
  /// Admissible windows of a depth; finite bases ignore depth. Cached.
  const WindowSet& windows(int depth) const;

  BasePoint shift(const BasePoint& p, int steps = 1) const;
  /// Window of depth d around a_0; throws InvalidArgument if the point does
  /// not carry enough symbols.
  std::vector<int> window_of(const BasePoint& p, int depth) const;
  /// Point carrying the window with a_0 at its centre.
  BasePoint point_of_window(std::span<const int> word) const;
  /// Extends a point to carry at least `past` / `future` symbols around a_0,
  /// choosing the smallest admissible symbol at every new position.
  BasePoint extend(const BasePoint& p, std::ptrdiff_t past, std::ptrdiff_t future) const;
  /// Points obtained by choosing every admissible symbol at the first
  /// unknown future position, each then extended canonically.
  std::vector<BasePoint> future_alternatives(const BasePoint& p, std::ptrdiff_t future) const;
  std::vector<BasePoint> past_alternatives(const BasePoint& p, std::ptrdiff_t past) const;
  bool is_admissible(const BasePoint& p) const;

  std::string window_label(std::span<const int> word) const;
  std::string point_label(const BasePoint& p) const;

  /// Upper bound on enumerated windows; deeper windows are not tabulated.
  static constexpr double kWindowBudget = 1 << 20;

 private:
  SymbolicBase() = default;

  Kind kind_ = Kind::finite;
  std::size_t size_ = 0;
  std::vector<int> sigma_;
  std::vector<int> sigma_inv_;
  std::vector<std::vector<int>> transitions_;
  std::vector<std::string> labels_;

  mutable std::mutex cache_mutex_;
  mutable std::map<int, std::unique_ptr<WindowSet>> cache_;
};

using BasePtr = std::shared_ptr<const SymbolicBase>;

/// Shortest symbols w with from -> w -> to admissible; empty when from -> to is.
/// Throws InvalidArgument when no such word exists.
std::vector<int> connecting_word(const SymbolicBase& base, int from, int to);

// -------------------------------------------------------- distances on values

inline double distance(double a, double b) { return std::abs(a - b); }
inline double distance(const std::complex<double>& a, const std::complex<double>& b) { return std::abs(a - b); }
inline double distance(const mpq_class& a, const mpq_class& b) { return std::abs(mpq_class(a - b).get_d()); }
template <class S>
double distance(const Dual<S>& a, const Dual<S>& b) {
  return std::max(distance(a.val, b.val), distance(a.eps, b.eps));
}
template <class S>
double distance(const std::vector<S>& a, const std::vector<S>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, distance(a[i], b[i]));
  return d;
}

/// Continuous family over the base that depends only on a finite window.
///
/// For subshifts the table is indexed by the admissible windows
/// (a_{-d}, ..., a_d) of depth d; for finite bases by the points.
template <class T>
class CylinderFunction {
 public:
  CylinderFunction() = default;
  CylinderFunction(BasePtr base, int depth, std::vector<T> table)
      : base_(std::move(base)), depth_(base_->is_finite() ? 0 : depth), table_(std::move(table)) {
    if (table_.size() != base_->windows(depth_).size())
      throw InvalidArgument("cylinder function table is not total over the windows");
  }

  static CylinderFunction constant(BasePtr base, const T& value) {
    const std::size_t n = base->windows(0).size();
    return CylinderFunction(std::move(base), 0, std::vector<T>(n, value));
  }

  template <class Fn>
  static CylinderFunction tabulate(BasePtr base, int depth, Fn&& fn) {
    const auto& ws = base->windows(base->is_finite() ? 0 : depth);
    std::vector<T> table;
    table.reserve(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) table.push_back(fn(ws.word(i)));
    return CylinderFunction(base, depth, std::move(table));
  }

  const BasePtr& base() const { return base_; }
  int depth() const { return depth_; }
  std::size_t size() const { return table_.size(); }
  const std::vector<T>& values() const { return table_; }
  const T& operator[](std::size_t i) const { return table_[i]; }
  std::span<const int> window(std::size_t i) const { return base_->windows(depth_).word(i); }

  /// Value at a window of depth >= depth(), read from its central subword.
  const T& at_window(std::span<const int> word) const {
    if (base_->is_finite()) return table_.at(static_cast<std::size_t>(word[0]));
    const std::size_t len = static_cast<std::size_t>(2 * depth_ + 1);
    if (word.size() < len || (word.size() - len) % 2 != 0)
      throw InvalidArgument("window too shallow for cylinder function");
    const std::size_t off = (word.size() - len) / 2;
    const std::size_t idx = base_->windows(depth_).find(word.subspan(off, len));
    if (idx == WindowSet::npos) throw InvalidArgument("inadmissible window");
    return table_[idx];
  }

  const T& at(const BasePoint& p) const {
    if (base_->is_finite()) return table_.at(static_cast<std::size_t>(p.symbols.at(0)));
    const auto w = base_->window_of(p, depth_);
    return at_window(w);
  }

  /// Same function tabulated on deeper windows.
  CylinderFunction refined(int depth) const {
    if (base_->is_finite() || depth <= depth_) return *this;
    return tabulate(base_, depth, [&](std::span<const int> w) { return at_window(w); });
  }

  template <class U, class Fn>
  CylinderFunction<U> map(Fn&& fn) const {
    std::vector<U> out;
    out.reserve(table_.size());
    for (const auto& v : table_) out.push_back(fn(v));
    return CylinderFunction<U>(base_, depth_, std::move(out));
  }

 private:
  BasePtr base_;
  int depth_ = 0;
  std::vector<T> table_;
};

enum class ShiftDirection { forward, backward };

/// Window of sigma(a) (forward) or sigma^{-1}(a) (backward) read off the
/// window of a; one symbol shallower on subshifts.
inline std::vector<int> shifted_word(const SymbolicBase& base, std::span<const int> w, ShiftDirection dir) {
  if (base.is_finite()) {
    const auto& perm = dir == ShiftDirection::forward ? base.permutation() : base.inverse_permutation();
    return {perm[static_cast<std::size_t>(w[0])]};
  }
  if (w.size() < 3) throw InvalidArgument("window too shallow to shift");
  const std::size_t off = dir == ShiftDirection::forward ? 2 : 0;
  return std::vector<int>(w.begin() + static_cast<std::ptrdiff_t>(off), w.begin() + static_cast<std::ptrdiff_t>(off + w.size() - 2));
}

/// a -> q(sigma(a)) (forward) or a -> q(sigma^{-1}(a)) (backward).
/// Output depth is depth + 1 on subshifts, unchanged on finite bases.
template <class T>
CylinderFunction<T> shift_pullback(const CylinderFunction<T>& q, ShiftDirection dir) {
  const auto& base = q.base();
  if (base->is_finite()) {
    const auto& perm = dir == ShiftDirection::forward ? base->permutation() : base->inverse_permutation();
    std::vector<T> out;
    out.reserve(q.size());
    for (std::size_t a = 0; a < q.size(); ++a) out.push_back(q[static_cast<std::size_t>(perm[a])]);
    return CylinderFunction<T>(base, 0, std::move(out));
  }
  const int d = q.depth();
  const std::size_t len = static_cast<std::size_t>(2 * d + 1);
  const std::size_t off = dir == ShiftDirection::forward ? 2 : 0;
  return CylinderFunction<T>::tabulate(base, d + 1, [&](std::span<const int> w) { return q.at_window(w.subspan(off, len)); });
}

/// Sup over windows of the value distance; shallower argument is refined.
template <class T>
double sup_distance(const CylinderFunction<T>& p, const CylinderFunction<T>& q) {
  if (p.base() != q.base()) throw InvalidArgument("sup_distance: different bases");
  const int d = std::max(p.depth(), q.depth());
  const auto pp = p.refined(d);
  const auto qq = q.refined(d);
  double out = 0.0;
  for (std::size_t i = 0; i < pp.size(); ++i) out = std::max(out, distance(pp[i], qq[i]));
  return out;
}

/// Pointwise combination of two families on their common refinement.
template <class U, class T1, class T2, class Fn>
CylinderFunction<U> zip_with(const CylinderFunction<T1>& p, const CylinderFunction<T2>& q, Fn&& fn) {
  if (p.base() != q.base()) throw InvalidArgument("zip_with: different bases");
  const int d = std::max(p.depth(), q.depth());
  const auto pp = p.refined(d);
  const auto qq = q.refined(d);
  std::vector<U> out;
  out.reserve(pp.size());
  for (std::size_t i = 0; i < pp.size(); ++i) out.push_back(fn(pp[i], qq[i]));
  return CylinderFunction<U>(p.base(), d, std::move(out));
}

/// Restriction to a shallower depth: each window is extended canonically
/// (smallest admissible symbols) and the deeper table is read there.
template <class T>
CylinderFunction<T> restrict_depth(const CylinderFunction<T>& q, int depth) {
  if (q.base()->is_finite() || q.depth() <= depth) return q;
  const auto& base = q.base();
  const int deep = q.depth();
  return CylinderFunction<T>::tabulate(base, depth, [&](std::span<const int> w) {
    const BasePoint p = base->extend(base->point_of_window(w), deep, deep);
    return q.at_window(base->window_of(p, deep));
  });
}

/// The affine map q -> coefficient * (q o sigma^{+-1}) + offset on scalar families.
template <class S>
struct ShiftAffineOp {
  ShiftDirection direction = ShiftDirection::forward;
  CylinderFunction<S> coefficient;
  CylinderFunction<S> offset;

  CylinderFunction<S> linear_part(const CylinderFunction<S>& q) const;
  CylinderFunction<S> operator()(const CylinderFunction<S>& q) const;
};

struct FixedPointOptions {
  double tol = 1e-13;
  int max_depth = 12;
  /// Finite bases up to this many points are solved exactly along cycles.
  std::size_t exact_threshold = 10000;
  bool force_iteration = false;
  /// Accept a depth-truncated result instead of throwing ConvergenceError.
  bool allow_truncation = false;
  int max_iterations = 100000;
};

template <class S>
struct FixedPointResult {
  CylinderFunction<S> value;
  int iterations = 0;
  /// Bound on the distance to the true fixed point.
  double achieved_bound = 0.0;
  /// Part of the bound caused by the depth cap (0 on finite bases).
  double truncation_bound = 0.0;
  bool exact = false;
  bool converged = true;
};

/// Fixed point of a contracting shift-affine operator.
///
/// Iterates from the zero family until successive iterates are within
/// tol * (1 - k); on subshifts window depth grows by one per step until
/// max_depth (or the window budget), after which deeper symbols are fixed
/// canonically and the tail bound 2 k^steps * |offset| / (1 - k) is recorded,
/// steps being the number of terms of the series the capped table holds exactly.
/// Finite bases at or below the exact threshold are solved exactly.
template <class S>
FixedPointResult<S> solve_affine_fixed_point(const ShiftAffineOp<S>& op, double k, const FixedPointOptions& options);

/// Sup of |q| over the windows.
template <class S>
double sup_magnitude(const CylinderFunction<S>& q) {
  double m = 0.0;
  for (const auto& v : q.values()) m = std::max(m, magnitude(v));
  return m;
}

}  // namespace skewlin
