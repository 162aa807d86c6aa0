#pragma once

// Conjunctive queries with simple functional dependencies, and the rewriting
// that turns them into natural-join queries an AGM bound applies to:
// chase → fresh symbols → FD extension → repeated-variable removal → head projection.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wcoj/agm.hpp"
#include "wcoj/core.hpp"

namespace wcoj {

using Var = std::uint32_t;

struct Atom {
  std::string symbol;
  std::vector<Var> vars;

  friend bool operator==(const Atom&, const Atom&) = default;
  friend auto operator<=>(const Atom&, const Atom&) = default;
};

/// symbol[from] → symbol[to], positions 1-based.
struct SimpleFD {
  std::string symbol;
  std::size_t from = 1, to = 2;

  friend bool operator==(const SimpleFD&, const SimpleFD&) = default;
};

/// A body atom, possibly a view. `origin` names the stored relation whose
/// size bounds the atom; a nonempty `definition` is a conjunction of stored
/// atoms whose join, projected onto `vars`, is the atom's content.
struct BodyAtom : Atom {
  std::string origin;
  std::vector<Atom> definition;

  BodyAtom() = default;
  BodyAtom(std::string sym, std::vector<Var> v) : Atom{sym, std::move(v)}, origin(std::move(sym)) {}

  /// Stored atoms this atom is computed from.
  std::vector<Atom> sources() const {
    if (!definition.empty()) return definition;
    return {Atom{origin, vars}};
  }

  friend bool operator==(const BodyAtom&, const BodyAtom&) = default;
};

struct ConjunctiveQuery {
  Atom head;
  std::vector<BodyAtom> body;
  std::vector<SimpleFD> fds;
  std::vector<std::string> var_names;  // indexed by Var

  std::set<Var> vars() const {
    std::set<Var> s;
    for (const auto& a : body) s.insert(a.vars.begin(), a.vars.end());
    return s;
  }

  void validate() const {
    auto body_vars = vars();
    for (Var v : head.vars)
      if (!body_vars.count(v)) throw ParameterError("head variable " + name(v) + " does not occur in the body");
    std::map<std::string, std::size_t> arity;
    for (const auto& a : body) {
      auto [it, fresh] = arity.emplace(a.symbol, a.vars.size());
      if (!fresh && it->second != a.vars.size())
        throw SchemaMismatch("symbol " + a.symbol + " used with different arities");
    }
  }

  std::string name(Var v) const { return v < var_names.size() ? var_names[v] : "V" + std::to_string(v); }
};

inline std::string to_string(const Atom& a, const std::vector<std::string>& names = {}) {
  std::string s = a.symbol + "(";
  for (std::size_t i = 0; i < a.vars.size(); ++i) {
    if (i) s += ",";
    s += a.vars[i] < names.size() ? names[a.vars[i]] : "V" + std::to_string(a.vars[i]);
  }
  return s + ")";
}

inline std::string to_string(const ConjunctiveQuery& c) {
  std::string s = to_string(c.head, c.var_names) + " :- ";
  for (std::size_t i = 0; i < c.body.size(); ++i) {
    if (i) s += ", ";
    s += to_string(c.body[i], c.var_names);
  }
  return s + ".";
}

/// Stored relations by symbol, positional: a k-ary table has schema 0..k-1.
using Database = std::map<std::string, Relation>;

namespace detail {

inline void check_fds(const ConjunctiveQuery& c) {
  for (const auto& fd : c.fds) {
    if (fd.from == 0 || fd.to == 0 || fd.from == fd.to)
      throw ParameterError("functional dependency on " + fd.symbol + " needs two distinct 1-based positions");
    for (const auto& a : c.body)
      if (a.origin == fd.symbol && (fd.from > a.vars.size() || fd.to > a.vars.size()))
        throw ParameterError("functional dependency position outside the arity of " + fd.symbol);
  }
}

inline void substitute(ConjunctiveQuery& c, Var from, Var to) {
  auto fix = [&](std::vector<Var>& vs) {
    for (auto& v : vs)
      if (v == from) v = to;
  };
  fix(c.head.vars);
  for (auto& a : c.body) {
    fix(a.vars);
    for (auto& d : a.definition) fix(d.vars);
  }
}

inline void append_unique(std::vector<Atom>& into, const std::vector<Atom>& more) {
  for (const auto& a : more)
    if (std::find(into.begin(), into.end(), a) == into.end()) into.push_back(a);
}

inline std::vector<Var> distinct_vars(const std::vector<Var>& vs) {
  std::vector<Var> out;
  for (Var v : vs)
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

/// Rows of a stored atom as a relation over its distinct variables; rows
/// violating a repeated-variable pattern are dropped.
inline Relation atom_relation(const Atom& a, const Database& db) {
  auto it = db.find(a.symbol);
  if (it == db.end()) throw SchemaMismatch("no data for relation " + a.symbol);
  const Relation& r = it->second;
  if (r.arity() != a.vars.size())
    throw SchemaMismatch("relation " + a.symbol + " has arity " + std::to_string(r.arity()) + ", atom uses " +
                         std::to_string(a.vars.size()));
  std::vector<Var> dv = distinct_vars(a.vars);
  std::vector<std::size_t> slot(a.vars.size());
  std::vector<bool> first(a.vars.size());
  for (std::size_t i = 0; i < a.vars.size(); ++i) {
    slot[i] = std::find(dv.begin(), dv.end(), a.vars[i]) - dv.begin();
    first[i] = std::find(a.vars.begin(), a.vars.begin() + i, a.vars[i]) == a.vars.begin() + i;
  }
  Schema schema(dv.begin(), dv.end());
  std::vector<Value> flat;
  std::vector<Value> row(dv.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    auto t = r.row(i);
    bool ok = true;
    for (std::size_t p = 0; p < t.size() && ok; ++p) {
      if (first[p])
        row[slot[p]] = t[p];
      else
        ok = row[slot[p]] == t[p];
    }
    if (ok) flat.insert(flat.end(), row.begin(), row.end());
  }
  return Relation(schema, std::move(flat));
}

/// Natural join of relations whose schemas are arbitrary variable ids.
inline Relation join_all(const std::vector<Relation>& rels) {
  std::vector<Attr> vars;
  for (const auto& r : rels) vars.insert(vars.end(), r.schema().begin(), r.schema().end());
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  for (const auto& r : rels)
    if (r.empty()) return Relation(vars);
  if (vars.empty()) return Relation(Schema{}, std::vector<Tuple>{Tuple{}});
  auto dense = [&](Attr v) { return static_cast<Attr>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin()); };
  std::vector<Relation> renamed;
  for (const auto& r : rels) {
    if (r.arity() == 0) continue;
    Schema s;
    for (Attr a : r.schema()) s.push_back(dense(a));
    renamed.emplace_back(s, r.flat());
  }
  Relation out = oracle_join(make_query(std::move(renamed)));
  return Relation(vars, out.flat());
}

}  // namespace detail

/// Contents of a body atom over its distinct variables (sorted by id).
inline Relation view_relation(const BodyAtom& a, const Database& db) {
  std::vector<Relation> parts;
  for (const auto& s : a.sources()) parts.push_back(detail::atom_relation(s, db));
  Relation joined = detail::join_all(parts);
  auto dv = detail::distinct_vars(a.vars);
  return project(joined, Schema(dv.begin(), dv.end()));
}

/// The answer as sorted head tuples (positional, repeats allowed).
inline std::vector<Tuple> evaluate_cq(const ConjunctiveQuery& c, const Database& db) {
  c.validate();
  std::vector<Relation> views;
  for (const auto& a : c.body) views.push_back(view_relation(a, db));
  Relation all = detail::join_all(views);
  std::vector<Tuple> out;
  std::vector<std::size_t> cols;
  for (Var v : c.head.vars) cols.push_back(*all.position_of(v));
  for (std::size_t i = 0; i < all.size(); ++i) {
    Tuple t;
    for (auto col : cols) t.push_back(all.row(i)[col]);
    out.push_back(std::move(t));
  }
  if (c.head.vars.empty() && !all.empty()) out = {Tuple{}};
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

enum class ChaseOrder { forward, reverse };

/// Unifies target variables of same-symbol atoms that agree on an FD source
/// until nothing changes, then drops duplicate atoms. `forward` scans FDs and
/// atom pairs in order and keeps the smaller variable; `reverse` scans
/// backwards and keeps the larger one.
inline ConjunctiveQuery chase(ConjunctiveQuery c, ChaseOrder order = ChaseOrder::forward) {
  c.validate();
  detail::check_fds(c);
  const bool fwd = order == ChaseOrder::forward;
  const std::size_t nf = c.fds.size();
  for (bool changed = true; changed;) {
    changed = false;
    const std::size_t nb = c.body.size();
    for (std::size_t fi = 0; fi < nf && !changed; ++fi) {
      const auto& fd = c.fds[fwd ? fi : nf - 1 - fi];
      for (std::size_t x = 0; x < nb && !changed; ++x)
        for (std::size_t y = x + 1; y < nb && !changed; ++y) {
          const auto& a = c.body[fwd ? x : nb - 1 - x];
          const auto& b = c.body[fwd ? y : nb - 1 - y];
          if (a.origin != fd.symbol || b.origin != fd.symbol) continue;
          if (a.vars[fd.from - 1] != b.vars[fd.from - 1]) continue;
          Var u = a.vars[fd.to - 1], v = b.vars[fd.to - 1];
          if (u == v) continue;
          Var keep = fwd ? std::min(u, v) : std::max(u, v);
          detail::substitute(c, keep == u ? v : u, keep);
          changed = true;
        }
    }
  }
  std::vector<BodyAtom> body;
  for (auto& a : c.body)
    if (std::find(body.begin(), body.end(), a) == body.end()) body.push_back(std::move(a));
  c.body = std::move(body);
  return c;
}

/// Gives every occurrence of a repeated symbol its own name `<symbol>_<k>`;
/// all occurrences keep the shared origin.
inline ConjunctiveQuery dedup_symbols(ConjunctiveQuery c) {
  std::map<std::string, std::size_t> count, seen;
  for (const auto& a : c.body) ++count[a.symbol];
  for (auto& a : c.body)
    if (count[a.symbol] > 1) a.symbol = a.symbol + "_" + std::to_string(++seen[a.symbol]);
  return c;
}

/// Saturates atoms with functionally determined variables. Each variable FD
/// s → t carries the stored atoms through which t is looked up from s; atoms
/// containing s but not t gain t as a view column over those atoms.
inline ConjunctiveQuery fd_extend(ConjunctiveQuery c) {
  detail::check_fds(c);
  std::map<std::pair<Var, Var>, std::vector<Atom>> lookup;
  for (const auto& a : c.body)
    for (const auto& fd : c.fds) {
      if (a.origin != fd.symbol) continue;
      Var s = a.vars[fd.from - 1], t = a.vars[fd.to - 1];
      if (s != t && !lookup.count({s, t})) lookup[{s, t}] = a.sources();
    }
  std::set<std::pair<Var, Var>> done;
  for (;;) {
    auto next = std::find_if(lookup.begin(), lookup.end(), [&](const auto& kv) { return !done.count(kv.first); });
    if (next == lookup.end()) break;
    const auto [s, t] = next->first;
    const std::vector<Atom> via = next->second;
    done.insert({s, t});
    for (auto& a : c.body) {
      bool has_s = std::find(a.vars.begin(), a.vars.end(), s) != a.vars.end();
      bool has_t = std::find(a.vars.begin(), a.vars.end(), t) != a.vars.end();
      if (!has_s || has_t) continue;
      auto defs = a.sources();
      detail::append_unique(defs, via);
      a.definition = std::move(defs);
      a.vars.push_back(t);
    }
    std::vector<std::pair<std::pair<Var, Var>, std::vector<Atom>>> added;
    for (const auto& [key, atoms] : lookup)
      if (key.second == s && key.first != t && !lookup.count({key.first, t})) {
        auto defs = atoms;
        detail::append_unique(defs, via);
        added.push_back({{key.first, t}, std::move(defs)});
      }
    for (auto& [k, v] : added) lookup.emplace(k, std::move(v));
  }
  return c;
}

/// Narrows atoms with a repeated variable to their distinct variables; the
/// equality filter stays in the atom's definition.
inline ConjunctiveQuery drop_repeated_vars(ConjunctiveQuery c) {
  for (auto& a : c.body) {
    auto dv = detail::distinct_vars(a.vars);
    if (dv.size() == a.vars.size()) continue;
    a.definition = a.sources();
    a.vars = std::move(dv);
    a.symbol += "'";
  }
  return c;
}

/// A natural-join query over the head variables whose output contains the
/// answer of the conjunctive query it came from.
struct ProjectedQuery {
  ConjunctiveQuery normalized;     // body atoms narrowed to head variables
  Hypergraph hypergraph;
  std::vector<Var> attribute_vars; // attribute id → variable
  bool boolean = false;            // empty head

  JoinQuery bind(const Database& db) const {
    std::vector<Relation> rels;
    std::vector<std::string> names, rel_names;
    for (Var v : attribute_vars) names.push_back(normalized.name(v));
    for (const auto& a : normalized.body) {
      Relation r = view_relation(a, db);
      Schema s;
      for (Var v : r.schema())
        s.push_back(static_cast<Attr>(std::find(attribute_vars.begin(), attribute_vars.end(), v) - attribute_vars.begin()));
      rels.emplace_back(s, r.flat());
      rel_names.push_back(a.symbol);
    }
    return make_query(std::move(rels), std::move(names), std::move(rel_names));
  }
};

inline ProjectedQuery project_to_head(ConjunctiveQuery c) {
  ProjectedQuery p;
  p.attribute_vars = detail::distinct_vars(c.head.vars);
  p.boolean = p.attribute_vars.empty();
  p.hypergraph.num_vertices = p.attribute_vars.size();
  std::vector<BodyAtom> body;
  for (auto& a : c.body) {
    std::vector<Var> kept;
    for (Var v : a.vars)
      if (std::find(p.attribute_vars.begin(), p.attribute_vars.end(), v) != p.attribute_vars.end()) kept.push_back(v);
    if (kept.empty()) continue;
    if (kept.size() != a.vars.size()) {
      a.definition = a.sources();
      a.vars = kept;
    }
    Schema edge;
    for (Var v : a.vars)
      edge.push_back(static_cast<Attr>(std::find(p.attribute_vars.begin(), p.attribute_vars.end(), v) -
                                       p.attribute_vars.begin()));
    std::sort(edge.begin(), edge.end());
    p.hypergraph.edges.push_back(edge);
    body.push_back(std::move(a));
  }
  c.body = std::move(body);
  p.normalized = std::move(c);
  if (!p.boolean) p.hypergraph.validate();
  return p;
}

/// The full rewriting, from a conjunctive query to its projected join query.
inline ProjectedQuery rewrite_cq(const ConjunctiveQuery& c) {
  return project_to_head(drop_repeated_vars(fd_extend(dedup_symbols(chase(c)))));
}

/// AGM bound of the rewritten query; an atom's size is that of its origin.
inline BoundReport cq_bound(const ConjunctiveQuery& c, const std::map<std::string, std::uint64_t>& sizes) {
  for (const auto& a : c.body)
    if (!sizes.count(a.origin)) throw ParameterError("no size given for relation " + a.origin);
  ProjectedQuery p = rewrite_cq(c);
  if (p.boolean) return {Real(0), Real(1), {}};
  std::vector<std::uint64_t> s;
  for (const auto& a : p.normalized.body) s.push_back(std::max<std::uint64_t>(sizes.at(a.origin), 1));
  return min_cover_lp(p.hypergraph, s);
}

}  // namespace wcoj
