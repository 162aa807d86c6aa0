#pragma once

// Join-project plans evaluated one binary join at a time, with every
// intermediate result counted.

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wcoj/core.hpp"

namespace wcoj {

struct PlanNode;
using PlanTree = std::shared_ptr<const PlanNode>;

struct PlanNode {
  enum class Kind { leaf, join };
  Kind kind = Kind::leaf;
  std::size_t atom = 0;               // leaf only
  std::optional<Schema> projection;   // leaf: applied to the atom; join: applied to the join result
  PlanTree left, right;
};

inline PlanTree plan_leaf(std::size_t atom, std::optional<Schema> projection = {}) {
  if (projection) std::sort(projection->begin(), projection->end());
  return std::make_shared<PlanNode>(PlanNode{PlanNode::Kind::leaf, atom, std::move(projection), nullptr, nullptr});
}

inline PlanTree plan_join(PlanTree left, PlanTree right, std::optional<Schema> projection = {}) {
  if (projection) std::sort(projection->begin(), projection->end());
  return std::make_shared<PlanNode>(
      PlanNode{PlanNode::Kind::join, 0, std::move(projection), std::move(left), std::move(right)});
}

inline std::string to_string(const PlanTree& p, const std::vector<std::string>& names = {}) {
  std::string proj = p->projection ? "π" + to_string(*p->projection) : "";
  if (p->kind == PlanNode::Kind::leaf) {
    std::string n = p->atom < names.size() ? names[p->atom] : "#" + std::to_string(p->atom);
    return proj.empty() ? n : proj + "(" + n + ")";
  }
  std::string body = "(" + to_string(p->left, names) + " ⋈ " + to_string(p->right, names) + ")";
  return proj.empty() ? body : proj + body;
}

/// One executed join.
struct JoinTrace {
  std::size_t node = 0;          // preorder id in the plan
  Schema schema;                 // join result schema, before any post-projection
  std::uint64_t cardinality = 0; // |left ⋈ right|
  std::uint64_t output = 0;      // size after the post-projection (= cardinality without one)
  Schema left_schema, right_schema;
  std::uint64_t left_size = 0, right_size = 0;
  bool left_is_leaf = false, right_is_leaf = false;
};

struct PlanTrace {
  std::vector<JoinTrace> joins;  // ordered by node id
  std::uint64_t total_work = 0;  // Σ |left| + |right| + |left ⋈ right|

  std::uint64_t intermediate_max() const {
    std::uint64_t m = 0;
    for (const auto& j : joins) m = std::max(m, j.cardinality);
    return m;
  }
};

struct PlanResult {
  Relation output;
  PlanTrace trace;
};

struct PlanOptions {
  /// Called for every join with both inputs materialized. Setting it forces
  /// materialization of streamed inputs, so keep it to small instances.
  std::function<void(const Relation& left, const Relation& right, std::uint64_t cardinality)> on_join;
};

namespace detail {

class PlanExecutor {
 public:
  using Sink = std::function<void(std::span<const Value>)>;

  PlanExecutor(const JoinQuery& q, const PlanOptions& opt) : q_(q), opt_(opt) {}

  void number(const PlanNode* p) {
    ids_[p] = ids_.size();
    if (p->kind == PlanNode::Kind::join) {
      if (!p->left || !p->right) throw PlanError("join node without two children");
      number(p->left.get());
      number(p->right.get());
    }
  }

  Schema schema_of(const PlanNode& p) const {
    if (p.kind == PlanNode::Kind::leaf) {
      if (p.atom >= q_.num_relations()) throw PlanError("plan leaf refers to missing atom " + std::to_string(p.atom));
      const Schema& s = q_.hypergraph.edges[p.atom];
      if (!p.projection) return s;
      if (!std::includes(s.begin(), s.end(), p.projection->begin(), p.projection->end()))
        throw PlanError("leaf projection " + to_string(*p.projection) + " is not within " + to_string(s));
      return *p.projection;
    }
    Schema j = join_schema(p);
    if (!p.projection) return j;
    if (!std::includes(j.begin(), j.end(), p.projection->begin(), p.projection->end()))
      throw PlanError("projection " + to_string(*p.projection) + " is not within " + to_string(j));
    return *p.projection;
  }

  Schema join_schema(const PlanNode& p) const {
    Schema l = schema_of(*p.left), r = schema_of(*p.right), u;
    std::set_union(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(u));
    return u;
  }

  Relation materialize(const PlanNode& p) {
    if (p.kind == PlanNode::Kind::leaf) {
      const Relation& r = q_.relations[p.atom];
      return p.projection ? project(r, *p.projection) : r;
    }
    std::vector<Value> flat;
    produce(p, [&](std::span<const Value> t) { flat.insert(flat.end(), t.begin(), t.end()); });
    return Relation(schema_of(p), std::move(flat));
  }

  /// Streams the node's output tuples (in its schema order) into `sink`.
  void produce(const PlanNode& p, const Sink& sink) {
    if (p.kind == PlanNode::Kind::leaf) {
      if (!p.projection) {
        const Relation& r = q_.relations[p.atom];
        for (std::size_t i = 0; i < r.size(); ++i) sink(r.row(i));
        return;
      }
      Relation r = materialize(p);
      for (std::size_t i = 0; i < r.size(); ++i) sink(r.row(i));
      return;
    }
    if (p.projection) {
      const Schema js = join_schema(p);
      std::vector<Value> flat;
      auto& jt = join(p, [&](std::span<const Value> t) { flat.insert(flat.end(), t.begin(), t.end()); });
      Relation r = project(Relation(js, std::move(flat)), *p.projection);
      jt.output = r.size();
      for (std::size_t i = 0; i < r.size(); ++i) sink(r.row(i));
      return;
    }
    auto& jt = join(p, sink);
    jt.output = jt.cardinality;
  }

  PlanTrace trace;

 private:
  JoinTrace& join(const PlanNode& p, const Sink& sink) {
    JoinTrace jt;
    jt.node = ids_.at(&p);
    jt.left_schema = schema_of(*p.left);
    jt.right_schema = schema_of(*p.right);
    jt.schema = join_schema(p);
    jt.left_is_leaf = p.left->kind == PlanNode::Kind::leaf;
    jt.right_is_leaf = p.right->kind == PlanNode::Kind::leaf;

    const Relation right = materialize(*p.right);
    jt.right_size = right.size();
    // Shared attributes, their columns on both sides, and where every output
    // column comes from.
    std::vector<std::size_t> lkey, rkey;
    for (std::size_t i = 0; i < jt.left_schema.size(); ++i)
      if (auto pos = right.position_of(jt.left_schema[i])) {
        lkey.push_back(i);
        rkey.push_back(*pos);
      }
    std::vector<std::pair<bool, std::size_t>> source;  // (from left, column)
    for (Attr a : jt.schema) {
      auto it = std::lower_bound(jt.left_schema.begin(), jt.left_schema.end(), a);
      if (it != jt.left_schema.end() && *it == a)
        source.push_back({true, static_cast<std::size_t>(it - jt.left_schema.begin())});
      else
        source.push_back({false, *right.position_of(a)});
    }
    std::vector<std::size_t> order(right.size());
    std::iota(order.begin(), order.end(), 0);
    auto key_less = [&](std::size_t x, std::size_t y) {
      for (auto c : rkey)
        if (right.row(x)[c] != right.row(y)[c]) return right.row(x)[c] < right.row(y)[c];
      return false;
    };
    std::stable_sort(order.begin(), order.end(), key_less);

    std::vector<Value> key(lkey.size()), out(jt.schema.size());
    std::uint64_t left_count = 0, count = 0;
    auto probe = [&](std::span<const Value> l) {
      ++left_count;
      for (std::size_t k = 0; k < lkey.size(); ++k) key[k] = l[lkey[k]];
      auto lo = std::partition_point(order.begin(), order.end(), [&](std::size_t r) {
        for (std::size_t k = 0; k < rkey.size(); ++k)
          if (right.row(r)[rkey[k]] != key[k]) return right.row(r)[rkey[k]] < key[k];
        return false;
      });
      for (auto it = lo; it != order.end(); ++it) {
        auto r = right.row(*it);
        bool eq = true;
        for (std::size_t k = 0; k < rkey.size() && eq; ++k) eq = r[rkey[k]] == key[k];
        if (!eq) break;
        for (std::size_t c = 0; c < source.size(); ++c) out[c] = source[c].first ? l[source[c].second] : r[source[c].second];
        ++count;
        sink(out);
      }
    };
    if (opt_.on_join) {
      Relation left = materialize(*p.left);
      for (std::size_t i = 0; i < left.size(); ++i) probe(left.row(i));
      opt_.on_join(left, right, count);
    } else {
      produce(*p.left, probe);
    }
    jt.left_size = left_count;
    jt.cardinality = count;
    trace.total_work += jt.left_size + jt.right_size + jt.cardinality;
    trace.joins.push_back(std::move(jt));
    return trace.joins.back();
  }

  const JoinQuery& q_;
  const PlanOptions& opt_;
  std::unordered_map<const PlanNode*, std::size_t> ids_;
};

}  // namespace detail

/// Evaluates a plan bottom-up. The right input of every join is materialized
/// and sorted on the shared attributes; the left input is streamed through it.
inline PlanResult execute_plan(const PlanTree& plan, const JoinQuery& q, const PlanOptions& opt = {}) {
  q.validate();
  if (!plan) throw PlanError("empty plan");
  detail::PlanExecutor ex(q, opt);
  ex.number(plan.get());
  ex.schema_of(*plan);  // rejects bad atoms and projections before any work
  Relation out = ex.materialize(*plan);
  std::sort(ex.trace.joins.begin(), ex.trace.joins.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
  return {std::move(out), std::move(ex.trace)};
}

/// (R⋈T)⋈S, (R⋈S)⋈T, (S⋈T)⋈R for atoms R = 0, S = 1, T = 2.
inline std::vector<PlanTree> triangle_plans() {
  auto r = [] { return plan_leaf(0); };
  auto s = [] { return plan_leaf(1); };
  auto t = [] { return plan_leaf(2); };
  return {plan_join(plan_join(r(), t()), s()), plan_join(plan_join(r(), s()), t()),
          plan_join(plan_join(s(), t()), r())};
}

namespace detail {

inline std::vector<PlanTree> join_plans_over(const std::vector<std::size_t>& atoms) {
  if (atoms.size() == 1) return {plan_leaf(atoms[0])};
  std::vector<PlanTree> out;
  const std::size_t k = atoms.size();
  // Splits with atoms[0] on the first side, each unordered pair once.
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k) - 1; ++mask) {
    if (!(mask & 1)) continue;
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < k; ++i) (mask >> i & 1 ? a : b).push_back(atoms[i]);
    if (a.size() < b.size()) std::swap(a, b);  // bigger side streams on the left
    for (const auto& l : join_plans_over(a))
      for (const auto& r : join_plans_over(b)) out.push_back(plan_join(l, r));
  }
  return out;
}

}  // namespace detail

/// Every join-only plan over atoms 0..m-1, up to swapping join inputs.
inline std::vector<PlanTree> all_join_plans(std::size_t m) {
  if (m == 0) throw PlanError("no atoms");
  std::vector<std::size_t> atoms(m);
  std::iota(atoms.begin(), atoms.end(), 0);
  return detail::join_plans_over(atoms);
}

/// Left-deep plan joining the atoms in index order.
inline PlanTree left_deep_plan(std::size_t m) {
  if (m == 0) throw PlanError("no atoms");
  PlanTree p = plan_leaf(0);
  for (std::size_t e = 1; e < m; ++e) p = plan_join(p, plan_leaf(e));
  return p;
}

/// The recursive join-project plan over attribute prefixes: the join of all
/// atoms projected onto A_1..A_{k-1} is joined with every atom containing A_k,
/// projected onto A_1..A_k.
inline PlanTree agm_plan(const JoinQuery& q) {
  q.validate();
  PlanTree p;
  Schema prefix;
  for (Attr k = 0; k < q.num_attributes(); ++k) {
    prefix.push_back(k);
    for (std::size_t e = 0; e < q.num_relations(); ++e) {
      const Schema& s = q.hypergraph.edges[e];
      if (!std::binary_search(s.begin(), s.end(), k)) continue;
      Schema part;
      std::set_intersection(s.begin(), s.end(), prefix.begin(), prefix.end(), std::back_inserter(part));
      PlanTree leaf = part == s ? plan_leaf(e) : plan_leaf(e, part);
      p = p ? plan_join(p, leaf) : leaf;
    }
  }
  if (!p) throw PlanError("query has no attributes");
  return p;
}

inline PlanResult run_agm_plan(const JoinQuery& q, const PlanOptions& opt = {}) {
  q.validate();
  for (const auto& r : q.relations)
    if (r.empty()) {
      Schema all(q.num_attributes());
      std::iota(all.begin(), all.end(), 0);
      return {Relation(all), {}};
    }
  return execute_plan(agm_plan(q), q, opt);
}

inline Relation agm_join_project(const JoinQuery& q) { return run_agm_plan(q).output; }

}  // namespace wcoj
