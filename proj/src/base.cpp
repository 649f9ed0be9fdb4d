#include "skewlin/base.hpp"

#include <algorithm>
#include <deque>
#include <cmath>
#include <limits>
#include <sstream>

namespace skewlin {

WindowSet::WindowSet(std::size_t alphabet, int depth, std::vector<int> words)
    : alphabet_(alphabet), depth_(depth), words_(std::move(words)) {
  const std::size_t len = length();
  const std::size_t count = words_.size() / len;
  codes_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t c = 0;
    for (std::size_t j = 0; j < len; ++j) c = c * alphabet_ + static_cast<std::uint64_t>(words_[i * len + j]);
    codes_[i] = c;
  }
}

std::size_t WindowSet::find(std::span<const int> word) const {
  if (word.size() != length()) return npos;
  std::uint64_t c = 0;
  for (int s : word) {
    if (s < 0 || static_cast<std::size_t>(s) >= alphabet_) return npos;
    c = c * alphabet_ + static_cast<std::uint64_t>(s);
  }
  const auto it = std::lower_bound(codes_.begin(), codes_.end(), c);
  if (it == codes_.end() || *it != c) return npos;
  return static_cast<std::size_t>(it - codes_.begin());
}

namespace {

std::vector<std::string> default_labels(std::size_t n, std::vector<std::string> labels) {
  if (labels.empty()) {
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != n) throw InvalidArgument("label count does not match the base size");
  return labels;
}

}  // namespace

BasePtr SymbolicBase::finite(std::vector<int> sigma, std::vector<std::string> labels) {
  const std::size_t n = sigma.size();
  if (n == 0) throw InvalidArgument("finite base needs at least one point");
  std::vector<int> inv(n, -1);
  for (std::size_t a = 0; a < n; ++a) {
    const int b = sigma[a];
    if (b < 0 || static_cast<std::size_t>(b) >= n || inv[static_cast<std::size_t>(b)] != -1)
      throw InvalidArgument("base map is not a permutation");
    inv[static_cast<std::size_t>(b)] = static_cast<int>(a);
  }
  std::shared_ptr<SymbolicBase> base(new SymbolicBase());
  base->kind_ = Kind::finite;
  base->size_ = n;
  base->sigma_ = std::move(sigma);
  base->sigma_inv_ = std::move(inv);
  base->labels_ = default_labels(n, std::move(labels));
  base->transitions_.assign(n, std::vector<int>(n, 0));
  for (std::size_t a = 0; a < n; ++a) base->transitions_[a][static_cast<std::size_t>(base->sigma_[a])] = 1;
  return base;
}

BasePtr SymbolicBase::cycle(std::size_t length) {
  std::vector<int> sigma(length);
  for (std::size_t t = 0; t < length; ++t) sigma[t] = static_cast<int>((t + 1) % length);
  return finite(std::move(sigma));
}

BasePtr SymbolicBase::sft(std::size_t alphabet, std::vector<std::vector<int>> transitions,
                          std::vector<std::string> labels) {
  if (alphabet == 0) throw InvalidArgument("subshift needs a nonempty alphabet");
  if (transitions.size() != alphabet) throw InvalidArgument("transition matrix has wrong size");
  for (std::size_t a = 0; a < alphabet; ++a) {
    if (transitions[a].size() != alphabet) throw InvalidArgument("transition matrix is not square");
    bool out = false;
    bool in = false;
    for (std::size_t b = 0; b < alphabet; ++b) {
      if (transitions[a][b] != 0 && transitions[a][b] != 1) throw InvalidArgument("transition matrix must be 0/1");
      out = out || transitions[a][b] != 0;
      in = in || transitions[b][a] != 0;
    }
    if (!out || !in) throw InvalidArgument("symbol " + std::to_string(a) + " has no bi-infinite continuation");
  }
  std::shared_ptr<SymbolicBase> base(new SymbolicBase());
  base->kind_ = Kind::sft;
  base->size_ = alphabet;
  base->transitions_ = std::move(transitions);
  base->labels_ = default_labels(alphabet, std::move(labels));
  return base;
}

BasePtr SymbolicBase::full_shift(std::size_t alphabet) {
  return sft(alphabet, std::vector<std::vector<int>>(alphabet, std::vector<int>(alphabet, 1)));
}

double SymbolicBase::window_count(int depth) const {
  if (is_finite()) return static_cast<double>(size_);
  std::vector<double> v(size_, 1.0);
  for (int step = 0; step < 2 * depth; ++step) {
    std::vector<double> next(size_, 0.0);
    for (std::size_t a = 0; a < size_; ++a)
      for (std::size_t b = 0; b < size_; ++b)
        if (transitions_[a][b]) next[b] += v[a];
    v = std::move(next);
  }
  double total = 0.0;
  for (double x : v) total += x;
  return total;
}

const WindowSet& SymbolicBase::windows(int depth) const {
  if (is_finite()) depth = 0;
  if (depth < 0) throw InvalidArgument("negative window depth");
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = cache_.find(depth);
  if (it != cache_.end()) return *it->second;

  if (window_count(depth) > kWindowBudget)
    throw InvalidArgument("window depth " + std::to_string(depth) + " exceeds the window budget");
  std::vector<int> words;
  if (is_finite()) {
    for (std::size_t a = 0; a < size_; ++a) words.push_back(static_cast<int>(a));
  } else {
    const std::size_t len = static_cast<std::size_t>(2 * depth + 1);
    std::vector<int> cur(len, 0);
    // depth-first enumeration in lexicographic order
    std::function<void(std::size_t)> rec = [&](std::size_t pos) {
      if (pos == len) {
        words.insert(words.end(), cur.begin(), cur.end());
        return;
      }
      for (std::size_t s = 0; s < size_; ++s) {
        if (pos > 0 && !transitions_[static_cast<std::size_t>(cur[pos - 1])][s]) continue;
        cur[pos] = static_cast<int>(s);
        rec(pos + 1);
      }
    };
    rec(0);
  }
  auto ws = std::make_unique<WindowSet>(size_, depth, std::move(words));
  const WindowSet& ref = *ws;
  cache_.emplace(depth, std::move(ws));
  return ref;
}

BasePoint SymbolicBase::shift(const BasePoint& p, int steps) const {
  BasePoint q = p;
  if (is_finite()) {
    int a = p.symbols.at(0);
    const auto& perm = steps >= 0 ? sigma_ : sigma_inv_;
    for (int i = 0; i < std::abs(steps); ++i) a = perm[static_cast<std::size_t>(a)];
    q.symbols = {a};
    q.origin = 0;
    return q;
  }
  q.origin += steps;
  if (q.origin < 0 || q.origin >= static_cast<std::ptrdiff_t>(q.symbols.size()))
    throw InvalidArgument("shifted past the known itinerary");
  return q;
}

std::vector<int> SymbolicBase::window_of(const BasePoint& p, int depth) const {
  if (is_finite()) return {p.symbols.at(0)};
  if (p.past() < depth || p.future() < depth)
    throw InvalidArgument("itinerary too short for a window of depth " + std::to_string(depth));
  const auto first = p.symbols.begin() + (p.origin - depth);
  return std::vector<int>(first, first + (2 * depth + 1));
}

BasePoint SymbolicBase::point_of_window(std::span<const int> word) const {
  BasePoint p;
  p.symbols.assign(word.begin(), word.end());
  p.origin = is_finite() ? 0 : static_cast<std::ptrdiff_t>(word.size() / 2);
  return p;
}

BasePoint SymbolicBase::extend(const BasePoint& p, std::ptrdiff_t past, std::ptrdiff_t future) const {
  if (is_finite()) return p;
  if (p.symbols.empty()) throw InvalidArgument("empty itinerary");
  BasePoint q = p;
  while (q.future() < future) {
    const int last = q.symbols.back();
    int next = -1;
    for (std::size_t s = 0; s < size_ && next < 0; ++s)
      if (transitions_[static_cast<std::size_t>(last)][s]) next = static_cast<int>(s);
    q.symbols.push_back(next);
  }
  while (q.past() < past) {
    const int first = q.symbols.front();
    int prev = -1;
    for (std::size_t s = 0; s < size_ && prev < 0; ++s)
      if (transitions_[s][static_cast<std::size_t>(first)]) prev = static_cast<int>(s);
    q.symbols.insert(q.symbols.begin(), prev);
    ++q.origin;
  }
  return q;
}

std::vector<BasePoint> SymbolicBase::future_alternatives(const BasePoint& p, std::ptrdiff_t future) const {
  std::vector<BasePoint> out;
  if (is_finite()) return {p};
  const int last = p.symbols.back();
  for (std::size_t s = 0; s < size_; ++s) {
    if (!transitions_[static_cast<std::size_t>(last)][s]) continue;
    BasePoint q = p;
    q.symbols.push_back(static_cast<int>(s));
    out.push_back(extend(q, 0, future));
  }
  return out;
}

std::vector<BasePoint> SymbolicBase::past_alternatives(const BasePoint& p, std::ptrdiff_t past) const {
  std::vector<BasePoint> out;
  if (is_finite()) return {p};
  const int first = p.symbols.front();
  for (std::size_t s = 0; s < size_; ++s) {
    if (!transitions_[s][static_cast<std::size_t>(first)]) continue;
    BasePoint q = p;
    q.symbols.insert(q.symbols.begin(), static_cast<int>(s));
    ++q.origin;
    out.push_back(extend(q, past, 0));
  }
  return out;
}

bool SymbolicBase::is_admissible(const BasePoint& p) const {
  if (p.symbols.empty()) return false;
  for (int s : p.symbols)
    if (s < 0 || static_cast<std::size_t>(s) >= size_) return false;
  if (is_finite()) return p.symbols.size() == 1;
  if (p.origin < 0 || p.origin >= static_cast<std::ptrdiff_t>(p.symbols.size())) return false;
  for (std::size_t i = 1; i < p.symbols.size(); ++i)
    if (!transitions_[static_cast<std::size_t>(p.symbols[i - 1])][static_cast<std::size_t>(p.symbols[i])]) return false;
  return true;
}

std::string SymbolicBase::window_label(std::span<const int> word) const {
  if (is_finite()) return labels_.at(static_cast<std::size_t>(word[0]));
  std::ostringstream os;
  const std::size_t centre = word.size() / 2;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i > 0) os << ' ';
    if (i == centre) os << '[';
    os << labels_.at(static_cast<std::size_t>(word[i]));
    if (i == centre) os << ']';
  }
  return os.str();
}

std::string SymbolicBase::point_label(const BasePoint& p) const {
  if (is_finite()) return labels_.at(static_cast<std::size_t>(p.symbols.at(0)));
  std::ostringstream os;
  for (std::size_t i = 0; i < p.symbols.size(); ++i) {
    if (i > 0) os << ' ';
    const bool centre = static_cast<std::ptrdiff_t>(i) == p.origin;
    if (centre) os << '[';
    os << labels_.at(static_cast<std::size_t>(p.symbols[i]));
    if (centre) os << ']';
  }
  return os.str();
}

// ------------------------------------------------------------ ShiftAffineOp

template <class S>
CylinderFunction<S> ShiftAffineOp<S>::linear_part(const CylinderFunction<S>& q) const {
  const auto pulled = shift_pullback(q, direction);
  const int d = std::max(pulled.depth(), coefficient.depth());
  const auto p = pulled.refined(d);
  const auto c = coefficient.refined(d);
  std::vector<S> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = c[i] * p[i];
  return CylinderFunction<S>(q.base(), d, std::move(out));
}

template <class S>
CylinderFunction<S> ShiftAffineOp<S>::operator()(const CylinderFunction<S>& q) const {
  const auto lin = linear_part(q);
  const int d = std::max(lin.depth(), offset.depth());
  const auto l = lin.refined(d);
  const auto b = offset.refined(d);
  std::vector<S> out(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) out[i] = l[i] + b[i];
  return CylinderFunction<S>(q.base(), d, std::move(out));
}

namespace {

template <class S>
FixedPointResult<S> solve_on_cycles(const ShiftAffineOp<S>& op) {
  const auto& base = op.offset.base();
  const std::size_t n = base->size();
  const auto& next = op.direction == ShiftDirection::forward ? base->permutation() : base->inverse_permutation();
  std::vector<S> q(n, S(0));
  std::vector<char> done(n, 0);
  for (std::size_t start = 0; start < n; ++start) {
    if (done[start]) continue;
    std::vector<std::size_t> orbit;
    for (std::size_t a = start; !done[a]; a = static_cast<std::size_t>(next[a])) {
      done[a] = 1;
      orbit.push_back(a);
    }
    // q(a_0) = sum_j (prod_{l<j} c_l) b_j + (prod_l c_l) q(a_0)
    S partial(1);
    S sum(0);
    for (std::size_t a : orbit) {
      sum += partial * op.offset[a];
      partial *= op.coefficient[a];
    }
    const S denom = S(1) - partial;
    if (ScalarTraits<S>::exact ? denom == S(0) : magnitude(denom) == 0.0)
      throw ConvergenceError("shift-affine operator is not contracting on a cycle", std::numeric_limits<double>::infinity());
    q[orbit[0]] = sum / denom;
    for (std::size_t j = orbit.size(); j-- > 1;) {
      const std::size_t a = orbit[j];
      const std::size_t b = j + 1 < orbit.size() ? orbit[j + 1] : orbit[0];
      q[a] = op.coefficient[a] * q[b] + op.offset[a];
    }
  }
  FixedPointResult<S> res;
  res.value = CylinderFunction<S>(base, 0, std::move(q));
  res.exact = true;
  res.iterations = 1;
  return res;
}

}  // namespace

template <class S>
FixedPointResult<S> solve_affine_fixed_point(const ShiftAffineOp<S>& op, double k, const FixedPointOptions& options) {
  const auto& base = op.offset.base();
  if (op.coefficient.base() != base) throw InvalidArgument("operator pieces live on different bases");
  if (!(k < 1.0)) throw InvalidArgument("contraction constant must be below 1");
  if (base->is_finite() && !options.force_iteration && base->size() <= options.exact_threshold)
    return solve_on_cycles(op);

  const double bnorm = sup_magnitude(op.offset);
  const double kk = std::max(k, 0.0);
  int cap = options.max_depth;
  if (!base->is_finite())
    while (cap > 0 && base->window_count(cap) > SymbolicBase::kWindowBudget) --cap;

  FixedPointResult<S> res;
  res.exact = false;
  CylinderFunction<S> q = CylinderFunction<S>::constant(base, S(0));
  bool capped = false;
  double incr = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    auto next = op(q);
    if (!base->is_finite() && next.depth() > cap) {
      next = restrict_depth(next, cap);
      capped = true;
    }
    incr = sup_distance(next, q);
    q = std::move(next);
    res.iterations = it;
    if (incr <= options.tol * (1.0 - kk) || incr == 0.0) break;
  }
  if (capped) {
    // series terms m <= cap - data depth are held exactly by the capped table
    const int data_depth = std::max(op.offset.depth(), op.coefficient.depth());
    const int steps = std::max(cap - data_depth + 1, 0);
    res.truncation_bound = 2.0 * std::pow(kk, steps) * bnorm / (1.0 - kk);
  }
  const double incr_bound = incr * kk / (1.0 - kk);
  res.achieved_bound = incr_bound + res.truncation_bound;
  res.value = std::move(q);
  res.converged = incr <= options.tol * (1.0 - kk) && res.truncation_bound <= options.tol;
  if (!res.converged && !options.allow_truncation) {
    throw ConvergenceError("shift-affine fixed point did not reach tolerance", res.achieved_bound);
  }
  return res;
}

#define SKEWLIN_INSTANTIATE_BASE(S)                      \
  template struct ShiftAffineOp<S>;                      \
  template FixedPointResult<S> solve_affine_fixed_point( \
      const ShiftAffineOp<S>&, double, const FixedPointOptions&);

SKEWLIN_INSTANTIATE_BASE(double)
SKEWLIN_INSTANTIATE_BASE(std::complex<double>)
SKEWLIN_INSTANTIATE_BASE(mpq_class)
SKEWLIN_INSTANTIATE_BASE(Dual<double>)
SKEWLIN_INSTANTIATE_BASE(Dual<std::complex<double>>)

std::vector<int> connecting_word(const SymbolicBase& base, int from, int to) {
  if (base.admissible(from, to)) return {};
  const std::size_t m = base.size();
  std::vector<int> parent(m, -2);
  std::deque<int> queue;
  for (std::size_t s = 0; s < m; ++s)
    if (base.admissible(from, static_cast<int>(s))) {
      parent[s] = -1;
      queue.push_back(static_cast<int>(s));
    }
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    if (base.admissible(s, to)) {
      std::vector<int> path;
      for (int t = s; t >= 0; t = parent[static_cast<std::size_t>(t)]) path.push_back(t);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (std::size_t t = 0; t < m; ++t)
      if (base.admissible(s, static_cast<int>(t)) && parent[t] == -2) {
        parent[t] = s;
        queue.push_back(static_cast<int>(t));
      }
  }
  throw InvalidArgument("subshift has no cycle through the itinerary endpoints");
}

}  // namespace skewlin
