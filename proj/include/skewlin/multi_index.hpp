#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace skewlin {

/// A multiindex k = (k_1, ..., k_n) of non-negative integers.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);
  MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

  static MultiIndex zero(std::size_t n) { return MultiIndex(std::vector<int>(n, 0)); }
  static MultiIndex unit(std::size_t n, std::size_t j);

  std::size_t size() const { return entries_.size(); }
  int operator[](std::size_t j) const { return entries_[j]; }
  const std::vector<int>& entries() const { return entries_; }

  /// |k| = k_1 + ... + k_n
  int order() const { return order_; }
  /// k! = k_1! ... k_n!
  std::uint64_t factorial() const { return factorial_; }

  /// x^k with x given componentwise; generic in the scalar type.
  template <class S>
  S power_of(const std::vector<S>& x) const {
    S out(1);
    for (std::size_t j = 0; j < entries_.size(); ++j)
      for (int e = 0; e < entries_[j]; ++e) out *= x[j];
    return out;
  }

  std::string to_string() const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.entries_ == b.entries_; }
  friend bool operator!=(const MultiIndex& a, const MultiIndex& b) { return !(a == b); }

 private:
  std::vector<int> entries_;
  int order_ = 0;
  std::uint64_t factorial_ = 1;
};

/// All multiindices of n variables with order 0..r in graded order.
///
/// Within one order the first entry is largest first, so for n = 2, order 2
/// the sequence is (2,0), (1,1), (0,2). Rank 0 is the zero index. Instances
/// are shared and immutable; obtain them through `get`.
class MultiIndexSet {
 public:
  static std::shared_ptr<const MultiIndexSet> get(std::size_t n, int r);

  std::size_t dimension() const { return n_; }
  int max_order() const { return r_; }
  std::size_t size() const { return indices_.size(); }

  const MultiIndex& at(std::size_t rank) const { return indices_[rank]; }
  std::size_t rank(const MultiIndex& k) const;
  /// Rank of k, or npos if |k| > r.
  std::size_t find(const std::vector<int>& k) const;

  /// First rank of order j and one-past-last rank of order j.
  std::size_t order_begin(int j) const { return order_start_[static_cast<std::size_t>(j)]; }
  std::size_t order_end(int j) const { return order_start_[static_cast<std::size_t>(j) + 1]; }

  /// Rank of the sum of two indices, npos when the sum exceeds r.
  std::size_t sum_rank(std::size_t a, std::size_t b) const;

  /// Rank of k - e_j for the first j with k_j > 0, together with that j.
  /// Used to build monomials incrementally; undefined for rank 0.
  std::size_t predecessor(std::size_t rank) const { return pred_[rank]; }
  std::size_t predecessor_variable(std::size_t rank) const { return pred_var_[rank]; }

  /// Rank of k - e_j, or npos when k_j = 0.
  std::size_t lower(std::size_t rank, std::size_t j) const { return lower_[rank * n_ + j]; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  MultiIndexSet(std::size_t n, int r);
  std::size_t code(const std::vector<int>& k) const;

  std::size_t n_;
  int r_;
  std::vector<MultiIndex> indices_;
  std::vector<std::size_t> order_start_;
  std::vector<std::size_t> lookup_;  // dense code -> rank
  std::vector<std::size_t> pred_;
  std::vector<std::size_t> pred_var_;
  std::vector<std::size_t> lower_;
};

/// Calls fn(k) for every multiindex of order j in n variables, graded order.
template <class Fn>
void for_each_of_order(std::size_t n, int j, Fn&& fn) {
  const auto set = MultiIndexSet::get(n, j);
  for (std::size_t r = set->order_begin(j); r < set->order_end(j); ++r) fn(set->at(r));
}

}  // namespace skewlin
