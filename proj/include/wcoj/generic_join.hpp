#pragma once

// Generic-Join: the recursive worst-case optimal join, with partition
// strategies realizing NPRR (power of two choices) and Leapfrog Triejoin.
//
// A strategy fixes, before any data is touched, how every recursive call
// splits its vertex set V into I ⊎ J. Because the L-subquery runs over I
// and the residual queries run over J, ordering I before J at every split
// yields one attribute order per run; every relation is indexed by a trie in
// that order, so projections π_I are trie truncations and semijoins R ⋉ t_I
// are prefix descents.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "wcoj/agm.hpp"
#include "wcoj/core.hpp"
#include "wcoj/index.hpp"

namespace wcoj {

enum class StrategyKind { nprr, leapfrog, fixed_sequence };

struct PartitionStrategy {
  StrategyKind kind = StrategyKind::leapfrog;
  /// nprr: forced pivot edge J per recursion depth; depths past the end use nprr_choose.
  std::vector<std::size_t> pivots;
  /// fixed_sequence: the set I per recursion depth; depths past the end peel one attribute.
  std::vector<Schema> sequence;

  static PartitionStrategy nprr(std::vector<std::size_t> pivots = {}) {
    return {StrategyKind::nprr, std::move(pivots), {}};
  }
  static PartitionStrategy fixed(std::vector<Schema> sequence) {
    return {StrategyKind::fixed_sequence, {}, std::move(sequence)};
  }
};

/// Peel the first remaining attribute at every level: Leapfrog Triejoin.
inline PartitionStrategy leapfrog_strategy() { return {StrategyKind::leapfrog, {}, {}}; }

inline std::string to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::nprr: return "nprr";
    case StrategyKind::leapfrog: return "leapfrog";
    case StrategyKind::fixed_sequence: return "fixed";
  }
  return "?";
}

struct NprrChoice {
  std::size_t edge;
  Schema rest;  // I = V − J
};

/// The edge with the largest weight (lowest index on ties) and its complement.
inline NprrChoice nprr_choose(const Hypergraph& h, const FractionalCover& x) {
  check_cover_shape(h, x);
  if (h.num_edges() == 0) throw ParameterError("query has no edges");
  std::size_t best = 0;
  for (std::size_t e = 1; e < h.num_edges(); ++e)
    if (x[e] > x[best]) best = e;
  NprrChoice c{best, {}};
  const auto& j = h.edges[best];
  for (Attr v = 0; v < h.num_vertices; ++v)
    if (!std::binary_search(j.begin(), j.end(), v)) c.rest.push_back(v);
  return c;
}

struct DecompositionStats {
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
  double worst_ratio = 0;  // max lhs/rhs seen

  DecompositionStats& operator+=(const DecompositionStats& o) {
    checks += o.checks;
    violations += o.violations;
    worst_ratio = std::max(worst_ratio, o.worst_ratio);
    return *this;
  }
};

struct GenericJoinOptions {
  /// Evaluate the decomposition inequality at every recursive split.
  bool check_decomposition = false;
  /// Workers for the outermost loop over L; 1 runs inline.
  unsigned threads = 1;
  /// Called with every base-case intersection: the values already bound
  /// (run order), the attribute, and the intersected value list.
  std::function<void(std::span<const Value>, Attr, std::span<const Value>)> on_intersection;
};

struct JoinRun {
  Relation output;
  CostMeter meter;
  PartitionStrategy strategy;
  FractionalCover cover;
  Schema order;  // attribute order of the tries used by the run
  DecompositionStats decomposition;
};

namespace detail {

struct FlatTuples {
  std::size_t arity = 0;
  std::vector<Value> data;
  std::size_t count = 0;

  explicit FlatTuples(std::size_t k = 0) : arity(k) {}
  std::size_t size() const { return count; }
  std::span<const Value> operator[](std::size_t i) const { return {data.data() + i * arity, arity}; }
  void push(std::span<const Value> a, std::span<const Value> b = {}) {
    data.insert(data.end(), a.begin(), a.end());
    data.insert(data.end(), b.begin(), b.end());
    ++count;
  }
  void append(const FlatTuples& o) {
    data.insert(data.end(), o.data.begin(), o.data.end());
    count += o.count;
  }
};

struct Step {
  Schema vars;                      // vertex set in run order
  std::vector<std::size_t> atoms;   // participating atoms
  std::vector<Rational> weight;     // cover restricted (or rescaled) to this step, per atom id
  bool base = false;
  std::size_t split = 0;            // |I|
  std::optional<std::size_t> pivot; // NPRR pivot edge J
  bool scan_only = false;           // x_J >= 1
  std::vector<double> q_exponent;   // x_F / (1 − x_J) per atom id
  std::unique_ptr<Step> left, right, rest;

  // Filled once the run order is known.
  std::size_t begin = 0, end = 0;
  std::vector<std::uint32_t> lvl_begin, lvl_end;    // visible trie levels per atom id
  std::vector<std::vector<std::size_t>> offsets;    // per atom id: position − begin of each visible level
};

struct PlanAtom {
  std::size_t id;
  Schema attrs;  // attributes inside the current vertex set, global order
};

inline std::vector<PlanAtom> restrict_atoms(const std::vector<PlanAtom>& atoms, const Schema& set,
                                            std::optional<std::size_t> skip = {}) {
  std::vector<PlanAtom> out;
  for (const auto& a : atoms) {
    if (skip && a.id == *skip) continue;
    Schema s;
    std::set_intersection(a.attrs.begin(), a.attrs.end(), set.begin(), set.end(), std::back_inserter(s));
    if (!s.empty()) out.push_back({a.id, std::move(s)});
  }
  return out;
}

class Planner {
 public:
  Planner(const PartitionStrategy& s, std::size_t num_atoms) : strat_(s), m_(num_atoms) {}

  std::unique_ptr<Step> plan(const Schema& vset, const std::vector<PlanAtom>& atoms,
                             const std::vector<Rational>& weight, std::size_t depth) {
    auto step = std::make_unique<Step>();
    for (const auto& a : atoms) step->atoms.push_back(a.id);
    step->weight = weight;
    if (vset.size() == 1) {
      step->base = true;
      step->vars = vset;
      return step;
    }
    if (strat_.kind == StrategyKind::nprr) return plan_nprr(std::move(step), vset, atoms, weight, depth);

    Schema part;
    if (strat_.kind == StrategyKind::fixed_sequence && depth < strat_.sequence.size()) {
      Schema want = strat_.sequence[depth];
      std::sort(want.begin(), want.end());
      std::set_intersection(want.begin(), want.end(), vset.begin(), vset.end(), std::back_inserter(part));
      if (part.empty() || part.size() == vset.size())
        throw InvalidPartition("partition " + to_string(want) + " at depth " + std::to_string(depth) +
                               " is not a proper nonempty subset of " + to_string(vset));
    } else {
      part = {vset.front()};
    }
    Schema others;
    std::set_difference(vset.begin(), vset.end(), part.begin(), part.end(), std::back_inserter(others));
    step->split = part.size();
    step->left = plan(part, restrict_atoms(atoms, part), weight, depth + 1);
    step->right = plan(others, restrict_atoms(atoms, others), weight, depth + 1);
    step->vars = step->left->vars;
    step->vars.insert(step->vars.end(), step->right->vars.begin(), step->right->vars.end());
    return step;
  }

 private:
  std::unique_ptr<Step> plan_nprr(std::unique_ptr<Step> step, const Schema& vset,
                                  const std::vector<PlanAtom>& atoms, const std::vector<Rational>& weight,
                                  std::size_t depth) {
    const PlanAtom* pivot = nullptr;
    if (depth < strat_.pivots.size()) {
      for (const auto& a : atoms)
        if (a.id == strat_.pivots[depth]) pivot = &a;
      if (!pivot)
        throw InvalidPartition("pivot edge " + std::to_string(strat_.pivots[depth]) +
                               " does not meet the vertex set at depth " + std::to_string(depth));
    } else {
      for (const auto& a : atoms)
        if (!pivot || weight[a.id] > weight[pivot->id]) pivot = &a;
    }
    const Schema jset = pivot->attrs;
    Schema iset;
    std::set_difference(vset.begin(), vset.end(), jset.begin(), jset.end(), std::back_inserter(iset));

    step->pivot = pivot->id;
    step->split = iset.size();
    if (!iset.empty()) step->left = plan(iset, restrict_atoms(atoms, iset), weight, depth + 1);
    const Rational& xj = weight[pivot->id];
    step->scan_only = xj >= 1;
    step->q_exponent.assign(m_, 0.0);
    Schema jorder = jset;
    if (!step->scan_only) {
      std::vector<Rational> scaled(m_);
      for (const auto& a : atoms)
        if (a.id != pivot->id) {
          scaled[a.id] = weight[a.id] / (1 - xj);
          step->q_exponent[a.id] = to_real(scaled[a.id]).convert_to<double>();
        }
      auto rest_atoms = restrict_atoms(atoms, jset, pivot->id);
      step->rest = plan(jset, rest_atoms, scaled, depth + 1);
      jorder = step->rest->vars;
    }
    step->vars = step->left ? step->left->vars : Schema{};
    step->vars.insert(step->vars.end(), jorder.begin(), jorder.end());
    return step;
  }

  const PartitionStrategy& strat_;
  std::size_t m_;
};

/// Assigns run positions and per-atom visible trie levels to every step.
inline void finalize(Step& s, std::size_t begin, const std::vector<std::size_t>& pos,
                     const std::vector<Schema>& trie_order) {
  s.begin = begin;
  s.end = begin + s.vars.size();
  const std::size_t m = trie_order.size();
  s.lvl_begin.assign(m, 0);
  s.lvl_end.assign(m, 0);
  s.offsets.assign(m, {});
  for (auto a : s.atoms) {
    const auto& ord = trie_order[a];
    bool seen = false;
    for (std::uint32_t l = 0; l < ord.size(); ++l) {
      std::size_t p = pos[ord[l]];
      if (p < s.begin || p >= s.end) continue;
      if (!seen) s.lvl_begin[a] = l;
      seen = true;
      s.lvl_end[a] = l + 1;
      s.offsets[a].push_back(p - s.begin);
    }
  }
  if (s.left) finalize(*s.left, begin, pos, trie_order);
  if (s.right) finalize(*s.right, begin + s.split, pos, trie_order);
  if (s.rest) finalize(*s.rest, begin + s.split, pos, trie_order);
}

struct View {
  std::uint32_t level = 0, end = 0;
  std::size_t lo = 0, hi = 0;

  TrieIndex::Range range() const { return {level, lo, hi}; }
};

struct Plan {
  std::unique_ptr<Step> root;
  Schema order;                     // run order
  std::vector<std::size_t> pos;     // attribute → run position
  std::vector<Schema> trie_order;   // per atom
  std::vector<TrieIndex> tries;
};

inline Plan make_plan(const JoinQuery& q, const PartitionStrategy& strat, const FractionalCover& x) {
  Plan p;
  const std::size_t n = q.num_attributes(), m = q.num_relations();
  Schema all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<PlanAtom> atoms;
  for (std::size_t e = 0; e < m; ++e) atoms.push_back({e, q.hypergraph.edges[e]});
  Planner planner(strat, m);
  p.root = planner.plan(all, atoms, x.weights, 0);
  p.order = p.root->vars;
  p.pos.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) p.pos[p.order[i]] = i;
  for (std::size_t e = 0; e < m; ++e) {
    Schema ord = q.hypergraph.edges[e];
    std::sort(ord.begin(), ord.end(), [&](Attr a, Attr b) { return p.pos[a] < p.pos[b]; });
    p.trie_order.push_back(ord);
    p.tries.emplace_back(q.relations[e], ord);
  }
  finalize(*p.root, 0, p.pos, p.trie_order);
  return p;
}

inline std::vector<View> root_views(const Plan& p) {
  std::vector<View> v;
  for (const auto& t : p.tries) {
    auto r = t.root();
    v.push_back({r.level, static_cast<std::uint32_t>(t.arity()), r.lo, r.hi});
  }
  return v;
}

class Executor {
 public:
  Executor(const Plan& plan, const GenericJoinOptions& opt, CostMeter& meter, DecompositionStats& stats)
      : plan_(plan), opt_(opt), meter_(meter), stats_(stats), bound_(plan.order.size()) {}

  void run(const Step& s, const std::vector<View>& views, FlatTuples& out) {
    ++meter_.recursions;
    if (s.base) {
      base_case(s, views, out);
      return;
    }
    FlatTuples l(s.split);
    if (s.left) {
      std::vector<View> lv = views;
      for (auto a : s.left->atoms) lv[a].end = s.left->lvl_end[a];
      run(*s.left, lv, l);
    } else {
      l.push({});
    }
    double lhs = solve_residuals(s, views, l, 0, l.size(), out);
    if (opt_.check_decomposition && s.split > 0) record(lhs, decomposition_rhs(s, views));
  }

  double decomposition_rhs(const Step& s, const std::vector<View>& views) const {
    double rhs = 1;
    for (auto a : s.atoms) rhs *= pow_count(view_size(a, views[a]), s.weight[a]);
    return rhs;
  }

  void record(double lhs, double rhs) {
    ++stats_.checks;
    if (lhs > rhs * (1 + 1e-9)) ++stats_.violations;
    if (rhs > 0) stats_.worst_ratio = std::max(stats_.worst_ratio, lhs / rhs);
  }

  /// Residual queries Q[t_I] for L[from, to).
  /// Returns the decomposition sum over the processed slice when checking is on.
  double solve_residuals(const Step& s, const std::vector<View>& views, const FlatTuples& l,
                         std::size_t from, std::size_t to, FlatTuples& out) {
    const auto& sub = s.pivot ? s : *s.right;
    const std::size_t jbegin = s.begin + s.split;
    double lhs = 0;
    std::vector<View> child(views.size());
    FlatTuples sub_out(s.end - jbegin);
    for (std::size_t i = from; i < to; ++i) {
      auto t = l[i];
      std::copy(t.begin(), t.end(), bound_.begin() + s.begin);
      child = views;
      bool alive = true;
      double term = 1;
      for (auto a : s.atoms) {
        if (s.lvl_end[a] == 0 || s.offsets[a].back() < s.split) continue;  // atom inside I
        View& v = child[a];
        for (std::size_t k = 0; k < s.offsets[a].size() && s.offsets[a][k] < s.split; ++k) {
          auto idx = plan_.tries[a].find(v.range(), t[s.offsets[a][k]], &meter_);
          if (idx == TrieIndex::npos) {
            alive = false;
            break;
          }
          auto c = plan_.tries[a].child(v.range(), idx);
          v.level = c.level;
          v.lo = c.lo;
          v.hi = c.hi;
        }
        if (!alive) break;
        if (opt_.check_decomposition) term *= pow_count(view_size(a, v), s.weight[a]);
      }
      if (!alive) continue;
      if (opt_.check_decomposition && s.split > 0) lhs += term;
      sub_out.data.clear();
      sub_out.count = 0;
      if (s.pivot)
        nprr_residual(s, child, sub_out);
      else
        run(sub, child, sub_out);
      for (std::size_t k = 0; k < sub_out.size(); ++k) out.push(t, sub_out[k]);
    }
    return lhs;
  }

  /// Q[t_I] = R_J ⋈ (⋈_{F ∈ E_J − {J}} π_J(R_F ⋉ t_I)) by the cheaper of
  /// scanning R_J and solving the other atoms first.
  void nprr_residual(const Step& s, const std::vector<View>& views, FlatTuples& out) {
    const std::size_t pj = *s.pivot;
    const View& pv = views[pj];
    std::vector<std::size_t> others;
    for (auto a : s.atoms)
      if (a != pj && s.lvl_end[a] > 0 && s.offsets[a].back() >= s.split) others.push_back(a);

    bool scan = s.scan_only;
    if (!scan) {
      double log_q = 0;
      for (auto a : others) {
        auto sz = view_size(a, views[a]);
        if (sz == 0) return;
        log_q += s.q_exponent[a] * std::log2(static_cast<double>(sz));
      }
      scan = std::log2(static_cast<double>(view_size(pj, pv))) <= log_q;
    }

    if (scan) {
      std::vector<Value> tup(s.end - s.begin - s.split);
      scan_view(plan_.tries[pj], pv, 0, tup, [&](std::span<const Value> row) {
        ++meter_.advances;
        for (auto a : others)
          if (!probe_view(a, views[a], s.offsets[a], s.split, row)) return;
        out.push(row);
      });
      return;
    }

    FlatTuples rest(s.end - s.begin - s.split);
    run(*s.rest, views, rest);
    std::vector<std::size_t> identity(rest.arity);
    std::iota(identity.begin(), identity.end(), 0);
    for (std::size_t i = 0; i < rest.size(); ++i)
      if (probe_view(pj, pv, identity, 0, rest[i])) out.push(rest[i]);
  }

 private:
  void base_case(const Step& s, const std::vector<View>& views, FlatTuples& out) {
    std::vector<std::span<const Value>> lists;
    for (auto a : s.atoms) lists.push_back(plan_.tries[a].values(views[a].range()));
    std::vector<Value> result;
    intersect_into(lists, result, meter_);
    if (opt_.on_intersection)
      opt_.on_intersection(std::span<const Value>(bound_.data(), s.begin), s.vars.front(), result);
    for (Value v : result) out.push(std::span<const Value>(&v, 1));
  }

  bool probe_view(std::size_t atom, const View& v, const std::vector<std::size_t>& offsets, std::size_t shift,
                  std::span<const Value> row) {
    const auto& trie = plan_.tries[atom];
    TrieIndex::Range r = v.range();
    std::size_t k = 0;
    while (k < offsets.size() && offsets[k] < shift) ++k;
    for (; k < offsets.size(); ++k) {
      auto idx = trie.find(r, row[offsets[k] - shift], &meter_);
      if (idx == TrieIndex::npos) return false;
      if (k + 1 < offsets.size()) r = trie.child(r, idx);
    }
    return true;
  }

  template <class Fn>
  void scan_view(const TrieIndex& trie, const View& v, std::size_t depth, std::vector<Value>& tup, Fn&& emit) {
    for (std::size_t i = v.lo; i < v.hi; ++i) {
      tup[depth] = trie.value_at(v.level, i);
      if (v.level + 1 == v.end) {
        emit(std::span<const Value>(tup.data(), depth + 1));
      } else {
        auto c = trie.child(v.range(), i);
        scan_view(trie, View{c.level, v.end, c.lo, c.hi}, depth + 1, tup, emit);
      }
    }
  }

  std::size_t view_size(std::size_t atom, const View& v) const {
    if (v.lo == v.hi) return 0;
    return plan_.tries[atom].count_below(v.range(), v.end - 1);
  }

  static double pow_count(std::size_t n, const Rational& x) {
    if (n == 0) return 0;
    if (x == 0) return 1;
    return std::exp2(to_real(x).convert_to<double>() * std::log2(static_cast<double>(n)));
  }

  const Plan& plan_;
  const GenericJoinOptions& opt_;
  CostMeter& meter_;
  DecompositionStats& stats_;
  std::vector<Value> bound_;
};

inline Relation to_relation(const Plan& p, FlatTuples&& rows) {
  return Relation(p.order, std::move(rows.data));
}

inline void require_cover(const JoinQuery& q, const FractionalCover& x) {
  check_cover_shape(q.hypergraph, x);
  if (!is_cover(q.hypergraph, x)) throw InfeasibleCover("weights do not cover every attribute");
}

}  // namespace detail

/// Runs Generic-Join and returns the output with its counters.
inline JoinRun run_generic_join(const JoinQuery& q, const PartitionStrategy& strat, const FractionalCover& cover,
                                const GenericJoinOptions& opt = {}) {
  q.validate();
  detail::require_cover(q, cover);
  JoinRun run{Relation(Schema{}), {}, strat, cover, {}, {}};
  const std::size_t n = q.num_attributes();
  Schema all(n);
  std::iota(all.begin(), all.end(), 0);

  bool any_empty = false;
  for (const auto& r : q.relations) any_empty |= r.empty();
  if (n == 0) {
    run.output = any_empty ? Relation(Schema{}) : Relation(Schema{}, std::vector<Tuple>{Tuple{}});
    run.meter.emits = run.output.size();
    return run;
  }

  detail::Plan plan = detail::make_plan(q, strat, cover);
  run.order = plan.order;
  if (any_empty) {
    run.output = Relation(all);
    return run;
  }

  const detail::Step& root = *plan.root;
  auto views = detail::root_views(plan);
  detail::FlatTuples out(n);
  const unsigned workers = opt.on_intersection ? 1u : std::max(1u, opt.threads);

  if (workers == 1 || root.base) {
    detail::Executor ex(plan, opt, run.meter, run.decomposition);
    ex.run(root, views, out);
  } else {
    // Parallel outer loop: L is computed once, slices of it are solved by
    // workers with private meters and buffers, then merged in slice order.
    detail::Executor head(plan, opt, run.meter, run.decomposition);
    ++run.meter.recursions;
    detail::FlatTuples l(root.split);
    if (root.left) {
      auto lv = views;
      for (auto a : root.left->atoms) lv[a].end = root.left->lvl_end[a];
      head.run(*root.left, lv, l);
    } else {
      l.push({});
    }
    const std::size_t chunks = std::min<std::size_t>(workers, std::max<std::size_t>(1, l.size()));
    std::vector<CostMeter> meters(chunks);
    std::vector<DecompositionStats> stats(chunks);
    std::vector<detail::FlatTuples> parts(chunks, detail::FlatTuples(n));
    std::vector<double> sums(chunks, 0);
    std::vector<std::thread> pool;
    for (std::size_t c = 0; c < chunks; ++c) {
      std::size_t from = l.size() * c / chunks, to = l.size() * (c + 1) / chunks;
      pool.emplace_back([&, c, from, to] {
        detail::Executor ex(plan, opt, meters[c], stats[c]);
        sums[c] = ex.solve_residuals(root, views, l, from, to, parts[c]);
      });
    }
    for (auto& t : pool) t.join();
    double lhs = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
      run.meter += meters[c];
      run.decomposition += stats[c];
      out.append(parts[c]);
      lhs += sums[c];
    }
    if (opt.check_decomposition && root.split > 0) head.record(lhs, head.decomposition_rhs(root, views));
  }
  run.output = detail::to_relation(plan, std::move(out));
  run.meter.emits = run.output.size();
  return run;
}

inline Relation generic_join(const JoinQuery& q, const PartitionStrategy& strat, const FractionalCover& cover,
                             CostMeter& meter, const GenericJoinOptions& opt = {}) {
  auto run = run_generic_join(q, strat, cover, opt);
  meter += run.meter;
  return std::move(run.output);
}

/// Solves the residual query Q[t_I] for the pivot edge J, where t_I binds
/// exactly the attributes outside J. The result ranges over J's attributes.
inline Relation nprr_subquery(const JoinQuery& q, const Assignment& t_I, std::size_t pivot,
                              const FractionalCover& x, CostMeter& meter) {
  q.validate();
  detail::require_cover(q, x);
  if (pivot >= q.num_relations()) throw ParameterError("pivot edge out of range");
  const Schema& jset = q.hypergraph.edges[pivot];
  if (jset.empty()) throw InvalidPartition("pivot edge has no attributes");
  Schema iset;
  for (Attr v = 0; v < q.num_attributes(); ++v)
    if (!std::binary_search(jset.begin(), jset.end(), v)) iset.push_back(v);
  Schema bound;
  for (const auto& [a, v] : t_I) bound.push_back(a);
  if (bound != iset) throw InvalidPartition("binding " + to_string(bound) + " must cover exactly " + to_string(iset));

  for (const auto& r : q.relations)
    if (r.empty()) return Relation(jset);

  detail::Plan plan = detail::make_plan(q, PartitionStrategy::nprr({pivot}), x);
  const detail::Step& root = *plan.root;
  GenericJoinOptions opt;
  DecompositionStats stats;
  CostMeter local;
  detail::Executor ex(plan, opt, local, stats);
  detail::FlatTuples out(jset.size());
  if (root.base) {
    ex.run(root, detail::root_views(plan), out);
  } else {
    detail::FlatTuples l(root.split);
    std::vector<Value> t;
    for (std::size_t i = 0; i < root.split; ++i) t.push_back(t_I.at(plan.order[i]));
    l.push(t);
    detail::FlatTuples joined(q.num_attributes());
    ex.solve_residuals(root, detail::root_views(plan), l, 0, 1, joined);
    for (std::size_t i = 0; i < joined.size(); ++i) out.push(joined[i].subspan(root.split));
  }
  Schema jorder(plan.order.begin() + root.split, plan.order.end());
  Relation result(jorder, std::move(out.data));
  local.emits = result.size();
  meter += local;
  return result;
}

}  // namespace wcoj
