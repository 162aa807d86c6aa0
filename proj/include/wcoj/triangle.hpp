#pragma once

// The two hand-written triangle algorithms for Q(A,B,C) :- R(A,B), S(B,C), T(A,C).

#include <map>
#include <utility>
#include <vector>

#include "wcoj/core.hpp"
#include "wcoj/index.hpp"

namespace wcoj {

/// Intermediate sets produced by the delaying algorithm.
struct DelayTrace {
  std::vector<Value> a;                                       // L_A
  std::map<Value, std::vector<Value>> b;                      // L_B^a
  std::map<std::pair<Value, Value>, std::vector<Value>> c;    // L_C^{a,b}
};

namespace detail {

inline void check_triangle(const Relation& r, const Relation& s, const Relation& t) {
  if (r.schema() != Schema{0, 1} || s.schema() != Schema{1, 2} || t.schema() != Schema{0, 2})
    throw SchemaMismatch("triangle inputs must be R(A,B), S(B,C), T(A,C) over attributes 0,1,2");
}

}  // namespace detail

/// Per value a, either scan S and probe R, T (heavy a) or pair up the
/// neighbours of a in R and T and probe S (light a).
inline Relation triangle_two_choices(const Relation& r, const Relation& s, const Relation& t, CostMeter& meter) {
  detail::check_triangle(r, s, t);
  TrieIndex ri(r), si(s), ti(t);
  std::vector<std::span<const Value>> tops{ri.values(ri.root()), ti.values(ti.root())};
  std::vector<Value> la;
  intersect_into(tops, la, meter);

  std::vector<Value> out;
  for (Value a : la) {
    auto rb = ri.child(ri.root(), ri.find(ri.root(), a, &meter));
    auto tc = ti.child(ti.root(), ti.find(ti.root(), a, &meter));
    if (rb.size() * tc.size() >= s.size()) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        auto row = s.row(i);
        ++meter.advances;
        if (ri.find(rb, row[0], &meter) == TrieIndex::npos) continue;
        if (ti.find(tc, row[1], &meter) == TrieIndex::npos) continue;
        out.insert(out.end(), {a, row[0], row[1]});
      }
    } else {
      for (Value b : ri.values(rb)) {
        auto sb = si.find(si.root(), b, &meter);
        meter.advances += tc.size();
        if (sb == TrieIndex::npos) continue;
        auto sc = si.child(si.root(), sb);
        for (Value c : ti.values(tc))
          if (si.find(sc, c, &meter) != TrieIndex::npos) out.insert(out.end(), {a, b, c});
      }
    }
  }
  Relation result({0, 1, 2}, std::move(out));
  meter.emits += result.size();
  return result;
}

/// Nested intersections over A, then B, then C.
inline Relation triangle_delay(const Relation& r, const Relation& s, const Relation& t, CostMeter& meter,
                               DelayTrace* trace = nullptr) {
  detail::check_triangle(r, s, t);
  TrieIndex ri(r), si(s), ti(t);
  std::vector<Value> la, lb, lc, out;
  std::vector<std::span<const Value>> lists{ri.values(ri.root()), ti.values(ti.root())};
  intersect_into(lists, la, meter);
  if (trace) trace->a = la;
  for (Value a : la) {
    auto rb = ri.child(ri.root(), ri.find(ri.root(), a, &meter));
    auto tc = ti.child(ti.root(), ti.find(ti.root(), a, &meter));
    lists = {ri.values(rb), si.values(si.root())};
    intersect_into(lists, lb, meter);
    if (trace) trace->b[a] = lb;
    for (Value b : lb) {
      auto sc = si.child(si.root(), si.find(si.root(), b, &meter));
      lists = {si.values(sc), ti.values(tc)};
      intersect_into(lists, lc, meter);
      if (trace) trace->c[{a, b}] = lc;
      for (Value c : lc) out.insert(out.end(), {a, b, c});
    }
  }
  Relation result({0, 1, 2}, std::move(out));
  meter.emits += result.size();
  return result;
}

}  // namespace wcoj
