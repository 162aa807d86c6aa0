#pragma once

// Relational data model and the reference (oracle) operators every fast path
// is checked against.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wcoj {

using Attr = std::uint32_t;
using Value = std::uint64_t;
using Tuple = std::vector<Value>;
using Schema = std::vector<Attr>;

/// Partial assignment of values to attributes, kept sorted by attribute.
using Assignment = std::map<Attr, Value>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class MalformedCover : public Error {
 public:
  using Error::Error;
};

class InfeasibleCover : public Error {
 public:
  using Error::Error;
};

class InvalidPartition : public Error {
 public:
  using Error::Error;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

inline std::string to_string(const Schema& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

/// Duplicate-free set of tuples over a schema.
///
/// The schema is always kept in global attribute order (ascending ids) and
/// rows are stored flat, sorted lexicographically. Construction
/// canonicalizes whatever column order and row order it is given, so two
/// relations holding the same set compare equal bit-for-bit.
class Relation {
 public:
  Relation() = default;

  explicit Relation(Schema schema) : Relation(std::move(schema), std::vector<Value>{}) {}

  /// `flat` holds rows back to back in the column order of `schema`.
  Relation(Schema schema, std::vector<Value> flat) : schema_(std::move(schema)) {
    const std::size_t k = schema_.size();
    {
      Schema sorted = schema_;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw SchemaMismatch("relation schema has repeated attribute " + to_string(schema_));
    }
    if (k == 0) {
      // Nullary relation: either {()} or the empty set.
      count_ = flat.empty() ? 0 : 1;
      return;
    }
    if (flat.size() % k != 0) throw SchemaMismatch("row data is not a multiple of the arity");

    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](auto a, auto b) { return schema_[a] < schema_[b]; });
    const bool identity = std::is_sorted(schema_.begin(), schema_.end());
    if (!identity) {
      std::vector<Value> permuted(flat.size());
      for (std::size_t r = 0; r < flat.size() / k; ++r)
        for (std::size_t c = 0; c < k; ++c) permuted[r * k + c] = flat[r * k + perm[c]];
      flat = std::move(permuted);
      std::sort(schema_.begin(), schema_.end());
    }

    const std::size_t n = flat.size() / k;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(flat.begin() + a * k, flat.begin() + (a + 1) * k,
                                          flat.begin() + b * k, flat.begin() + (b + 1) * k);
    };
    if (!std::is_sorted(order.begin(), order.end(), less))
      std::sort(order.begin(), order.end(), less);
    data_.reserve(flat.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto* row = flat.data() + order[i] * k;
      if (!data_.empty() && std::equal(row, row + k, data_.end() - k)) continue;
      data_.insert(data_.end(), row, row + k);
    }
    count_ = data_.size() / k;
  }

  Relation(Schema schema, const std::vector<Tuple>& rows)
      : Relation(std::move(schema), flatten(rows)) {
    if (schema_.empty() && !rows.empty()) count_ = 1;
  }

  const Schema& schema() const { return schema_; }
  std::size_t arity() const { return schema_.size(); }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  std::span<const Value> row(std::size_t i) const {
    return {data_.data() + i * arity(), arity()};
  }
  const std::vector<Value>& flat() const { return data_; }

  std::vector<Tuple> tuples() const {
    std::vector<Tuple> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < count_; ++i) out.emplace_back(row(i).begin(), row(i).end());
    return out;
  }

  std::optional<std::size_t> position_of(Attr a) const {
    auto it = std::lower_bound(schema_.begin(), schema_.end(), a);
    if (it == schema_.end() || *it != a) return std::nullopt;
    return static_cast<std::size_t>(it - schema_.begin());
  }

  /// Membership of a full row given in schema order.
  bool contains(std::span<const Value> t) const {
    const std::size_t k = arity();
    if (t.size() != k) return false;
    if (k == 0) return count_ > 0;
    std::size_t lo = 0, hi = count_;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      auto r = row(mid);
      if (std::lexicographical_compare(r.begin(), r.end(), t.begin(), t.end()))
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo < count_ && std::equal(t.begin(), t.end(), row(lo).begin());
  }

  friend bool operator==(const Relation&, const Relation&) = default;

 private:
  static std::vector<Value> flatten(const std::vector<Tuple>& rows) {
    std::vector<Value> flat;
    for (const auto& t : rows) flat.insert(flat.end(), t.begin(), t.end());
    return flat;
  }

  Schema schema_;
  std::vector<Value> data_;
  std::size_t count_ = 0;
};

struct Hypergraph {
  std::size_t num_vertices = 0;
  std::vector<Schema> edges;  // each sorted ascending

  std::size_t num_edges() const { return edges.size(); }

  void validate() const {
    std::vector<bool> seen(num_vertices, false);
    for (const auto& e : edges) {
      if (e.empty()) throw SchemaMismatch("hyperedge is empty");
      if (!std::is_sorted(e.begin(), e.end()) ||
          std::adjacent_find(e.begin(), e.end()) != e.end())
        throw SchemaMismatch("hyperedge not in global order " + to_string(e));
      for (Attr a : e) {
        if (a >= num_vertices) throw SchemaMismatch("hyperedge attribute out of range");
        seen[a] = true;
      }
    }
    for (std::size_t v = 0; v < num_vertices; ++v)
      if (!seen[v]) throw SchemaMismatch("attribute " + std::to_string(v) + " in no hyperedge");
  }
};

/// A natural join query: one relation bound to every hyperedge.
struct JoinQuery {
  Hypergraph hypergraph;
  std::vector<Relation> relations;
  std::vector<std::string> attribute_names;
  std::vector<std::string> relation_names;

  std::size_t num_attributes() const { return hypergraph.num_vertices; }
  std::size_t num_relations() const { return relations.size(); }

  std::vector<std::uint64_t> sizes() const {
    std::vector<std::uint64_t> s;
    for (const auto& r : relations) s.push_back(r.size());
    return s;
  }

  void validate() const {
    hypergraph.validate();
    if (relations.size() != hypergraph.edges.size())
      throw SchemaMismatch("relation count differs from hyperedge count");
    for (std::size_t i = 0; i < relations.size(); ++i)
      if (relations[i].schema() != hypergraph.edges[i])
        throw SchemaMismatch("relation " + std::to_string(i) + " schema " +
                             to_string(relations[i].schema()) + " does not match hyperedge " +
                             to_string(hypergraph.edges[i]));
  }
};

/// Builds a query whose hyperedges are the relations' schemas. Attribute ids
/// must be dense in [0, n).
inline JoinQuery make_query(std::vector<Relation> relations,
                            std::vector<std::string> attribute_names = {},
                            std::vector<std::string> relation_names = {}) {
  JoinQuery q;
  Attr max_attr = 0;
  bool any = false;
  for (const auto& r : relations) {
    q.hypergraph.edges.push_back(r.schema());
    for (Attr a : r.schema()) {
      max_attr = std::max(max_attr, a);
      any = true;
    }
  }
  q.hypergraph.num_vertices = any ? max_attr + 1 : 0;
  if (attribute_names.empty())
    for (std::size_t v = 0; v < q.hypergraph.num_vertices; ++v)
      attribute_names.push_back("A" + std::to_string(v));
  if (relation_names.empty())
    for (std::size_t i = 0; i < relations.size(); ++i)
      relation_names.push_back("R" + std::to_string(i));
  q.relations = std::move(relations);
  q.attribute_names = std::move(attribute_names);
  q.relation_names = std::move(relation_names);
  q.validate();
  return q;
}

inline Relation project(const Relation& r, Schema s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  std::vector<std::size_t> cols;
  for (Attr a : s) {
    auto p = r.position_of(a);
    if (!p) throw SchemaMismatch("project: attribute " + std::to_string(a) + " not in " +
                                 to_string(r.schema()));
    cols.push_back(*p);
  }
  if (s.empty()) return Relation(Schema{}, r.empty() ? std::vector<Value>{} : std::vector<Value>{0});
  std::vector<Value> flat;
  flat.reserve(r.size() * cols.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    auto row = r.row(i);
    for (auto c : cols) flat.push_back(row[c]);
  }
  return Relation(std::move(s), std::move(flat));
}

inline Relation select(const Relation& r, const Assignment& bindings) {
  std::vector<std::pair<std::size_t, Value>> cond;
  for (auto [a, v] : bindings) {
    auto p = r.position_of(a);
    if (!p) throw SchemaMismatch("select: attribute " + std::to_string(a) + " not in " +
                                 to_string(r.schema()));
    cond.emplace_back(*p, v);
  }
  std::vector<Value> flat;
  for (std::size_t i = 0; i < r.size(); ++i) {
    auto row = r.row(i);
    bool ok = true;
    for (auto [c, v] : cond) ok = ok && row[c] == v;
    if (ok) flat.insert(flat.end(), row.begin(), row.end());
  }
  if (r.arity() == 0) return r;
  return Relation(r.schema(), std::move(flat));
}

/// R ⋉ t: rows of `r` agreeing with `t` on the attributes they share.
/// Attributes of `t` outside the schema impose nothing.
inline Relation semijoin(const Relation& r, const Assignment& t) {
  Assignment shared;
  for (auto [a, v] : t)
    if (r.position_of(a)) shared.emplace(a, v);
  return select(r, shared);
}

/// Reference nested-loop natural join of two relations.
inline Relation natural_join(const Relation& a, const Relation& b) {
  Schema out = a.schema();
  out.insert(out.end(), b.schema().begin(), b.schema().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::vector<std::pair<std::size_t, std::size_t>> shared;
  for (std::size_t i = 0; i < a.arity(); ++i)
    if (auto p = b.position_of(a.schema()[i])) shared.emplace_back(i, *p);
  std::vector<std::pair<int, std::size_t>> src;  // 0 = from a, 1 = from b
  for (Attr x : out) {
    if (auto p = a.position_of(x))
      src.emplace_back(0, *p);
    else
      src.emplace_back(1, *b.position_of(x));
  }
  std::vector<Value> flat;
  bool any_nullary = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      auto ra = a.row(i);
      auto rb = b.row(j);
      bool ok = true;
      for (auto [x, y] : shared) ok = ok && ra[x] == rb[y];
      if (!ok) continue;
      any_nullary = true;
      for (auto [which, c] : src) flat.push_back(which == 0 ? ra[c] : rb[c]);
    }
  if (out.empty()) return Relation(Schema{}, any_nullary ? std::vector<Value>{0} : std::vector<Value>{});
  return Relation(std::move(out), std::move(flat));
}

/// Exact natural-join output by brute force over each attribute's active
/// domain; the correctness oracle for every other join path. Each relation
/// is checked as soon as its last attribute is assigned.
inline Relation oracle_join(const JoinQuery& q) {
  q.validate();
  const std::size_t n = q.num_attributes();
  Schema all(n);
  std::iota(all.begin(), all.end(), 0);
  for (const auto& r : q.relations)
    if (r.empty()) return Relation(all);

  std::vector<std::vector<Value>> domain(n);
  for (Attr v = 0; v < n; ++v) {
    bool first = true;
    for (const auto& r : q.relations) {
      if (!r.position_of(v)) continue;
      Relation col = project(r, {v});
      std::vector<Value> vals(col.flat().begin(), col.flat().end());
      if (first) {
        domain[v] = std::move(vals);
        first = false;
      } else {
        std::vector<Value> keep;
        std::set_intersection(domain[v].begin(), domain[v].end(), vals.begin(), vals.end(),
                              std::back_inserter(keep));
        domain[v] = std::move(keep);
      }
    }
  }

  std::vector<std::vector<std::size_t>> check_at(n);
  for (std::size_t i = 0; i < q.relations.size(); ++i)
    check_at[q.relations[i].schema().back()].push_back(i);

  std::vector<Value> assign(n);
  std::vector<Value> flat;
  Tuple probe;
  auto rec = [&](auto&& self, std::size_t depth) -> void {
    if (depth == n) {
      flat.insert(flat.end(), assign.begin(), assign.end());
      return;
    }
    for (Value v : domain[depth]) {
      assign[depth] = v;
      bool ok = true;
      for (auto i : check_at[depth]) {
        const auto& r = q.relations[i];
        probe.clear();
        for (Attr a : r.schema()) probe.push_back(assign[a]);
        if (!r.contains(probe)) {
          ok = false;
          break;
        }
      }
      if (ok) self(self, depth + 1);
    }
  };
  rec(rec, 0);
  return Relation(all, std::move(flat));
}

}  // namespace wcoj
