#pragma once

// Sorted tries over an attribute order, plus the measured set-intersection
// and probe primitives every join algorithm is built from.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "wcoj/core.hpp"

namespace wcoj {

/// Operation counters standing in for asymptotic running time.
struct CostMeter {
  std::uint64_t probes = 0;      // binary-search steps in membership tests and descents
  std::uint64_t advances = 0;    // cursor movements during intersection and scans
  std::uint64_t emits = 0;       // output tuples
  std::uint64_t recursions = 0;  // Generic-Join invocations

  std::uint64_t total() const { return probes + advances + emits; }

  CostMeter& operator+=(const CostMeter& o) {
    probes += o.probes;
    advances += o.advances;
    emits += o.emits;
    recursions += o.recursions;
    return *this;
  }
  friend bool operator==(const CostMeter&, const CostMeter&) = default;
};

/// Immutable prefix tree over a relation, laid out level by level.
///
/// Level d stores the values of the d-th attribute of the trie order for
/// every distinct length-(d+1) prefix, in lexicographic order. The children
/// of element i at level d are the slice [first_child[d][i], first_child[d][i+1])
/// of level d+1, so every node's child list is a strictly sorted contiguous
/// range.
class TrieIndex {
 public:
  struct Range {
    std::uint32_t level = 0;
    std::size_t lo = 0, hi = 0;

    std::size_t size() const { return hi - lo; }
    bool empty() const { return lo == hi; }
  };

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  TrieIndex() = default;

  /// Trie in the relation's own (global) attribute order.
  explicit TrieIndex(const Relation& r) : TrieIndex(r, r.schema()) {}

  /// Trie over `order`, a permutation of the relation's schema.
  TrieIndex(const Relation& r, const Schema& order) : schema_(order), tuples_(r.size()) {
    const std::size_t k = order.size();
    {
      Schema a = order, b = r.schema();
      std::sort(a.begin(), a.end());
      if (a != b) throw SchemaMismatch("trie order " + to_string(order) + " is not a permutation of " +
                                       to_string(r.schema()));
    }
    if (k == 0) return;
    std::vector<std::size_t> cols;
    for (Attr a : order) cols.push_back(*r.position_of(a));

    std::vector<Value> rows(r.size() * k);
    for (std::size_t i = 0; i < r.size(); ++i) {
      auto src = r.row(i);
      for (std::size_t c = 0; c < k; ++c) rows[i * k + c] = src[cols[c]];
    }
    if (!std::is_sorted(order.begin(), order.end())) {
      std::vector<std::size_t> idx(r.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](auto x, auto y) {
        return std::lexicographical_compare(rows.begin() + x * k, rows.begin() + (x + 1) * k,
                                            rows.begin() + y * k, rows.begin() + (y + 1) * k);
      });
      std::vector<Value> sorted(rows.size());
      for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy_n(rows.begin() + idx[i] * k, k, sorted.begin() + i * k);
      rows = std::move(sorted);
    }

    values_.assign(k, {});
    first_child_.assign(k, {});
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Value* row = rows.data() + i * k;
      std::size_t diff = 0;
      if (i > 0) {
        const Value* prev = row - k;
        while (diff < k && row[diff] == prev[diff]) ++diff;
      }
      for (std::size_t d = diff; d < k; ++d) {
        if (d + 1 < k) first_child_[d].push_back(values_[d + 1].size());
        values_[d].push_back(row[d]);
      }
    }
    for (std::size_t d = 0; d + 1 < k; ++d) first_child_[d].push_back(values_[d + 1].size());
  }

  const Schema& schema() const { return schema_; }
  std::size_t arity() const { return schema_.size(); }
  std::size_t size() const { return tuples_; }

  Range root() const {
    return {0, 0, arity() == 0 ? 0 : values_[0].size()};
  }

  std::span<const Value> values(Range r) const {
    return {values_[r.level].data() + r.lo, r.size()};
  }

  Value value_at(std::uint32_t level, std::size_t index) const { return values_[level][index]; }

  /// Children of the element at absolute index `index` of `parent`'s level.
  Range child(Range parent, std::size_t index) const {
    const auto& fc = first_child_[parent.level];
    return {parent.level + 1, fc[index], fc[index + 1]};
  }

  /// Absolute index of `v` inside `r`, or npos. Counts one probe per call.
  std::size_t find(Range r, Value v, CostMeter* meter = nullptr) const {
    if (meter) ++meter->probes;
    const auto& vals = values_[r.level];
    auto it = std::lower_bound(vals.begin() + r.lo, vals.begin() + r.hi, v);
    if (it == vals.begin() + r.hi || *it != v) return npos;
    return static_cast<std::size_t>(it - vals.begin());
  }

  /// Number of distinct prefixes ending at `level` that lie below `r`.
  std::size_t count_below(Range r, std::uint32_t level) const {
    std::size_t lo = r.lo, hi = r.hi;
    for (std::uint32_t d = r.level; d < level; ++d) {
      lo = first_child_[d][lo];
      hi = first_child_[d][hi];
    }
    return hi - lo;
  }

  /// Descends along `prefix` from the root; empty range when absent.
  Range descend(std::span<const Value> prefix, CostMeter* meter = nullptr) const {
    Range r = root();
    for (std::size_t d = 0; d < prefix.size(); ++d) {
      std::size_t i = find(r, prefix[d], meter);
      if (i == npos) return {static_cast<std::uint32_t>(d), 0, 0};
      if (d + 1 == arity()) return {static_cast<std::uint32_t>(d), i, i + 1};
      r = child(r, i);
    }
    return r;
  }

 private:
  Schema schema_;
  std::size_t tuples_ = 0;
  std::vector<std::vector<Value>> values_;
  std::vector<std::vector<std::size_t>> first_child_;
};

inline TrieIndex build_trie(const Relation& r) { return TrieIndex(r); }

/// Sorted distinct values of the next attribute after `prefix`.
inline std::vector<Value> children(const TrieIndex& ix, std::span<const Value> prefix) {
  if (prefix.size() >= ix.arity()) return {};
  auto r = ix.descend(prefix);
  if (r.empty()) return {};
  auto v = ix.values(r);
  return {v.begin(), v.end()};
}

inline bool probe(const TrieIndex& ix, std::span<const Value> t, CostMeter* meter = nullptr) {
  if (t.size() > ix.arity()) return false;
  if (t.empty()) return ix.size() > 0;
  return !ix.descend(t, meter).empty();
}

inline std::size_t count_prefix(const TrieIndex& ix, std::span<const Value> prefix) {
  if (prefix.size() >= ix.arity()) return 0;
  return ix.descend(prefix).size();
}

namespace detail {

/// First index in [pos, v.size()) whose value is >= x, by exponential then
/// binary search. Every comparison is charged as one advance.
inline std::size_t gallop(std::span<const Value> v, std::size_t pos, Value x, std::uint64_t& steps) {
  const std::size_t n = v.size();
  if (pos >= n) return n;
  ++steps;
  if (v[pos] >= x) return pos;
  std::size_t lo = pos, bound = 1;  // v[lo] < x
  while (lo + bound < n) {
    ++steps;
    if (v[lo + bound] >= x) break;
    lo += bound;
    bound *= 2;
  }
  std::size_t hi = std::min(lo + bound, n);  // answer in (lo, hi]
  ++lo;
  while (lo < hi) {
    ++steps;
    std::size_t mid = lo + (hi - lo) / 2;
    if (v[mid] < x)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

inline std::uint64_t ceil_log2(std::uint64_t x) {
  std::uint64_t r = 0;
  while ((std::uint64_t{1} << r) < x) ++r;
  return r;
}

}  // namespace detail

/// Advances an intersection of `k` lists with the given extreme sizes may
/// charge: k * min * (1 + ceil(log2 max)).
inline std::uint64_t intersect_budget(std::size_t k, std::size_t min_size, std::size_t max_size) {
  return static_cast<std::uint64_t>(k) * min_size * (1 + detail::ceil_log2(max_size));
}

/// k-way intersection: walk the smallest list, gallop into the others.
inline void intersect_into(std::span<const std::span<const Value>> sets, std::vector<Value>& out,
                           CostMeter& meter) {
  out.clear();
  if (sets.empty()) return;
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < sets.size(); ++i)
    if (sets[i].size() < sets[smallest].size()) smallest = i;
  const auto base = sets[smallest];
  if (base.empty()) return;
  if (sets.size() == 1) {
    meter.advances += base.size();
    out.assign(base.begin(), base.end());
    return;
  }
  std::vector<std::size_t> cursor(sets.size(), 0);
  std::uint64_t steps = 0;
  for (Value x : base) {
    bool all = true;
    for (std::size_t i = 0; i < sets.size() && all; ++i) {
      if (i == smallest) continue;
      cursor[i] = detail::gallop(sets[i], cursor[i], x, steps);
      if (cursor[i] == sets[i].size()) {
        meter.advances += steps;
        return;
      }
      all = sets[i][cursor[i]] == x;
    }
    if (all) out.push_back(x);
  }
  meter.advances += steps;
}

inline std::vector<Value> intersect(const std::vector<std::vector<Value>>& sets, CostMeter& meter) {
  std::vector<std::span<const Value>> spans(sets.begin(), sets.end());
  std::vector<Value> out;
  intersect_into(spans, out, meter);
  return out;
}

}  // namespace wcoj
