#include "skewlin/multi_index.hpp"

#include <map>
#include <mutex>
#include <sstream>
#include <utility>

#include "skewlin/errors.hpp"

namespace skewlin {

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int e : entries_) {
    if (e < 0) throw InvalidArgument("multiindex entries must be non-negative");
    order_ += e;
    for (int f = 2; f <= e; ++f) factorial_ *= static_cast<std::uint64_t>(f);
  }
}

MultiIndex MultiIndex::unit(std::size_t n, std::size_t j) {
  std::vector<int> e(n, 0);
  e.at(j) = 1;
  return MultiIndex(std::move(e));
}

std::string MultiIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t j = 0; j < entries_.size(); ++j) os << (j ? "," : "") << entries_[j];
  os << ')';
  return os.str();
}

namespace {

void enumerate(std::size_t n, int remaining, std::vector<int>& cur, std::size_t pos,
               std::vector<MultiIndex>& out) {
  if (pos + 1 == n) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[pos] = e;
    enumerate(n, remaining - e, cur, pos + 1, out);
  }
}

}  // namespace

MultiIndexSet::MultiIndexSet(std::size_t n, int r) : n_(n), r_(r) {
  if (n == 0) throw InvalidArgument("dimension must be positive");
  if (r < 0) throw InvalidArgument("degree must be non-negative");
  std::vector<int> cur(n, 0);
  for (int j = 0; j <= r; ++j) {
    order_start_.push_back(indices_.size());
    enumerate(n, j, cur, 0, indices_);
  }
  order_start_.push_back(indices_.size());

  std::size_t space = 1;
  for (std::size_t j = 0; j < n; ++j) space *= static_cast<std::size_t>(r + 1);
  lookup_.assign(space, npos);
  for (std::size_t i = 0; i < indices_.size(); ++i) lookup_[code(indices_[i].entries())] = i;

  pred_.assign(indices_.size(), npos);
  pred_var_.assign(indices_.size(), npos);
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    std::vector<int> k = indices_[i].entries();
    for (std::size_t j = 0; j < n; ++j) {
      if (k[j] > 0) {
        --k[j];
        pred_[i] = lookup_[code(k)];
        pred_var_[i] = j;
        break;
      }
    }
  }

  lower_.assign(indices_.size() * n, npos);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<int> k = indices_[i].entries();
      if (k[j] == 0) continue;
      --k[j];
      lower_[i * n + j] = lookup_[code(k)];
    }
  }
}

std::size_t MultiIndexSet::code(const std::vector<int>& k) const {
  std::size_t c = 0;
  for (std::size_t j = n_; j-- > 0;) c = c * static_cast<std::size_t>(r_ + 1) + static_cast<std::size_t>(k[j]);
  return c;
}

std::size_t MultiIndexSet::find(const std::vector<int>& k) const {
  if (k.size() != n_) return npos;
  int order = 0;
  for (int e : k) {
    if (e < 0) return npos;
    order += e;
  }
  if (order > r_) return npos;
  return lookup_[code(k)];
}

std::size_t MultiIndexSet::rank(const MultiIndex& k) const {
  const std::size_t r = find(k.entries());
  if (r == npos) throw InvalidArgument("multiindex " + k.to_string() + " outside index set");
  return r;
}

std::size_t MultiIndexSet::sum_rank(std::size_t a, std::size_t b) const {
  const auto& ka = indices_[a];
  const auto& kb = indices_[b];
  if (ka.order() + kb.order() > r_) return npos;
  std::size_t c = 0;
  for (std::size_t j = n_; j-- > 0;)
    c = c * static_cast<std::size_t>(r_ + 1) + static_cast<std::size_t>(ka[j] + kb[j]);
  return lookup_[c];
}

std::shared_ptr<const MultiIndexSet> MultiIndexSet::get(std::size_t n, int r) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, int>, std::shared_ptr<const MultiIndexSet>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{n, r}];
  if (!slot) slot = std::shared_ptr<const MultiIndexSet>(new MultiIndexSet(n, r));
  return slot;
}

}  // namespace skewlin
