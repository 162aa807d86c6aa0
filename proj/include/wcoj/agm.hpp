#pragma once

// Fractional edge covers, the AGM output-size bound, and the covering LP
// that yields the tightest such bound for a given set of relation sizes.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "wcoj/core.hpp"

namespace wcoj {

using Rational = boost::multiprecision::cpp_rational;
using Real = boost::multiprecision::cpp_bin_float_50;

inline Real to_real(const Rational& r) {
  return Real(boost::multiprecision::numerator(r)) / Real(boost::multiprecision::denominator(r));
}

inline std::string to_string(const Rational& r) { return r.str(); }

inline Real log2_of(std::uint64_t n) { return boost::multiprecision::log(Real(n)) / boost::multiprecision::log(Real(2)); }

/// Nonnegative weight per hyperedge, indexed by edge position.
struct FractionalCover {
  std::vector<Rational> weights;

  std::size_t size() const { return weights.size(); }
  const Rational& operator[](std::size_t i) const { return weights[i]; }

  static FractionalCover uniform(std::size_t m, Rational w) {
    return {std::vector<Rational>(m, w)};
  }

  friend bool operator==(const FractionalCover&, const FractionalCover&) = default;
};

struct BoundReport {
  Real log2_bound;  // Σ x_F log2 |R_F|
  Real bound;       // 2^log2_bound
  FractionalCover cover;
};

inline void check_cover_shape(const Hypergraph& h, const FractionalCover& x) {
  if (x.size() != h.num_edges())
    throw MalformedCover("cover has " + std::to_string(x.size()) + " weights for " +
                         std::to_string(h.num_edges()) + " edges");
  for (const auto& w : x.weights)
    if (w < 0) throw MalformedCover("negative cover weight " + w.str());
}

/// Exact check of Σ_{F ∋ v} x_F ≥ 1 for every vertex.
inline bool is_cover(const Hypergraph& h, const FractionalCover& x) {
  check_cover_shape(h, x);
  std::vector<Rational> load(h.num_vertices);
  for (std::size_t e = 0; e < h.num_edges(); ++e)
    for (Attr v : h.edges[e]) load[v] += x[e];
  return std::all_of(load.begin(), load.end(), [](const Rational& l) { return l >= 1; });
}

/// |R|^x under the convention 0^0 = 0.
inline Real pow_size(std::uint64_t size, const Rational& x) {
  if (size == 0) return Real(0);
  if (x == 0) return Real(1);
  return boost::multiprecision::exp2(to_real(x) * log2_of(size));
}

inline BoundReport agm_bound(const Hypergraph& h, std::span<const std::uint64_t> sizes,
                             const FractionalCover& x) {
  if (!is_cover(h, x)) throw InfeasibleCover("weights do not cover every attribute");
  if (sizes.size() != h.num_edges()) throw ParameterError("one size per edge required");
  BoundReport rep{Real(0), Real(1), x};
  for (std::size_t e = 0; e < sizes.size(); ++e) {
    if (sizes[e] == 0) {
      rep.log2_bound = -std::numeric_limits<Real>::infinity();
      rep.bound = 0;
      return rep;
    }
    rep.log2_bound += to_real(x[e]) * log2_of(sizes[e]);
  }
  rep.bound = boost::multiprecision::exp2(rep.log2_bound);
  return rep;
}

inline BoundReport agm_bound(const JoinQuery& q, const FractionalCover& x) {
  auto s = q.sizes();
  return agm_bound(q.hypergraph, s, x);
}

/// E_I: edges meeting the attribute set I.
inline std::vector<std::size_t> edge_subset(const Hypergraph& h, std::span<const Attr> attrs) {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    const auto& f = h.edges[e];
    if (std::any_of(attrs.begin(), attrs.end(),
                    [&](Attr a) { return std::binary_search(f.begin(), f.end(), a); }))
      out.push_back(e);
  }
  return out;
}

/// Optimal basic solution of the covering LP together with the data the
/// tests use to certify it.
struct CoverLpSolution {
  FractionalCover cover;
  Real objective;                 // ρ*: Σ x_F log2 |R_F|
  Real best_neighbor_change;      // min over single pivots of the objective change (≥ 0 at optimum)
  std::size_t pivots = 0;
};

namespace detail {

/// Dense simplex tableau with exact rational entries. The covering LP has a
/// rational constraint matrix and right-hand side, so only reduced costs of
/// the log-size objective need real arithmetic.
class CoverTableau {
 public:
  // Columns: [0, m) edge weights, [m, m+n) surplus, [m+n, m+2n) artificial.
  CoverTableau(const Hypergraph& h) : m_(h.num_edges()), n_(h.num_vertices) {
    const std::size_t cols = m_ + 2 * n_;
    rows_.assign(n_, std::vector<Rational>(cols));
    rhs_.assign(n_, Rational(1));
    for (std::size_t e = 0; e < m_; ++e)
      for (Attr v : h.edges[e]) rows_[v][e] = 1;
    for (std::size_t v = 0; v < n_; ++v) {
      rows_[v][m_ + v] = -1;
      rows_[v][m_ + n_ + v] = 1;
      basis_.push_back(m_ + n_ + v);
    }
  }

  std::size_t num_cols() const { return m_ + 2 * n_; }
  bool artificial(std::size_t c) const { return c >= m_ + n_; }

  bool is_basic(std::size_t c) const {
    return std::find(basis_.begin(), basis_.end(), c) != basis_.end();
  }

  template <class Cost>
  std::vector<Cost> reduced_costs(const std::vector<Cost>& c) const {
    std::vector<Cost> d(c);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const Cost& cb = c[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j < num_cols(); ++j)
        if (rows_[i][j] != 0) d[j] -= cb * convert<Cost>(rows_[i][j]);
    }
    return d;
  }

  /// Bland ratio test; nullopt when the column is unbounded.
  std::optional<std::size_t> leaving_row(std::size_t col) const {
    std::optional<std::size_t> best;
    Rational best_ratio;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (rows_[i][col] <= 0) continue;
      Rational ratio = rhs_[i] / rows_[i][col];
      if (!best || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[*best])) {
        best = i;
        best_ratio = ratio;
      }
    }
    return best;
  }

  Rational step_length(std::size_t col) const {
    auto r = leaving_row(col);
    return r ? rhs_[*r] / rows_[*r][col] : Rational(-1);
  }

  void pivot(std::size_t r, std::size_t col) {
    Rational p = rows_[r][col];
    for (auto& a : rows_[r]) a /= p;
    rhs_[r] /= p;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == r || rows_[i][col] == 0) continue;
      Rational f = rows_[i][col];
      for (std::size_t j = 0; j < num_cols(); ++j)
        if (rows_[r][j] != 0) rows_[i][j] -= f * rows_[r][j];
      rhs_[i] -= f * rhs_[r];
    }
    basis_[r] = col;
    ++pivots_;
  }

  /// Minimizes with Bland's rule over columns allowed by `usable`.
  template <class Cost, class Usable>
  void minimize(const std::vector<Cost>& c, const Cost& eps, Usable usable) {
    for (;;) {
      auto d = reduced_costs(c);
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < num_cols() && !enter; ++j)
        if (usable(j) && !is_basic(j) && d[j] < -eps) enter = j;
      if (!enter) return;
      auto r = leaving_row(*enter);
      if (!r) throw Error("covering LP unbounded");
      pivot(*r, *enter);
    }
  }

  /// Pivots zero-level artificial variables out of the basis after phase 1,
  /// dropping rows that turn out to be redundant.
  void expel_artificials() {
    for (std::size_t i = 0; i < rows_.size();) {
      if (!artificial(basis_[i])) {
        ++i;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < m_ + n_ && !col; ++j)
        if (rows_[i][j] != 0) col = j;
      if (col) {
        pivot(i, *col);
        ++i;
      } else {
        rows_.erase(rows_.begin() + i);
        rhs_.erase(rhs_.begin() + i);
        basis_.erase(basis_.begin() + i);
      }
    }
  }

  Rational value(std::size_t col) const {
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] == col) return rhs_[i];
    return 0;
  }

  std::size_t pivots() const { return pivots_; }

 private:
  template <class Cost>
  static Cost convert(const Rational& r) {
    if constexpr (std::is_same_v<Cost, Rational>)
      return r;
    else
      return to_real(r);
  }

  std::size_t m_, n_;
  std::vector<std::vector<Rational>> rows_;
  std::vector<Rational> rhs_;
  std::vector<std::size_t> basis_;
  std::size_t pivots_ = 0;
};

}  // namespace detail

/// Solves min Σ_F log2|R_F|·x_F subject to the cover constraints and x ≥ 0.
///
/// Phase 1 finds a feasible basis exactly; phase 2 optimizes the real
/// objective; a final lexicographic pass (minimize x_0, then x_1, ... within
/// the optimal face) selects the lexicographically smallest optimal vertex.
inline CoverLpSolution solve_cover_lp(const Hypergraph& h, std::span<const std::uint64_t> sizes) {
  h.validate();
  const std::size_t m = h.num_edges(), n = h.num_vertices;
  if (sizes.size() != m) throw ParameterError("one size per edge required");
  for (auto s : sizes)
    if (s < 1) throw ParameterError("relation sizes must be at least 1");

  detail::CoverTableau tab(h);
  const std::size_t cols = tab.num_cols();
  std::vector<bool> frozen(cols, false);
  auto usable = [&](std::size_t j) { return !tab.artificial(j) && !frozen[j]; };

  {
    std::vector<Rational> phase1(cols);
    for (std::size_t j = m + n; j < cols; ++j) phase1[j] = 1;
    tab.minimize(phase1, Rational(0), [](std::size_t) { return true; });
    tab.expel_artificials();
  }

  std::vector<Real> cost(cols, Real(0));
  Real scale = 1;
  for (std::size_t e = 0; e < m; ++e) {
    cost[e] = log2_of(sizes[e]);
    scale = std::max(scale, cost[e]);
  }
  const Real eps = scale * Real("1e-40");
  tab.minimize(cost, eps, usable);
  {
    auto d = tab.reduced_costs(cost);
    for (std::size_t j = 0; j < cols; ++j)
      if (!tab.is_basic(j) && d[j] > eps) frozen[j] = true;
  }

  for (std::size_t e = 0; e < m; ++e) {
    std::vector<Rational> unit(cols);
    unit[e] = 1;
    tab.minimize(unit, Rational(0), usable);
    auto d = tab.reduced_costs(unit);
    for (std::size_t j = 0; j < cols; ++j)
      if (!tab.is_basic(j) && d[j] > 0) frozen[j] = true;
  }

  CoverLpSolution sol;
  sol.cover.weights.resize(m);
  sol.objective = 0;
  for (std::size_t e = 0; e < m; ++e) {
    sol.cover.weights[e] = tab.value(e);
    sol.objective += to_real(sol.cover.weights[e]) * cost[e];
  }

  // Certificate: the objective change of every single pivot from the final
  // basis (degenerate pivots change nothing).
  sol.best_neighbor_change = 0;
  auto d = tab.reduced_costs(cost);
  for (std::size_t j = 0; j < cols; ++j) {
    if (tab.artificial(j) || tab.is_basic(j)) continue;
    Rational step = tab.step_length(j);
    if (step < 0) continue;
    Real change = d[j] * to_real(step);
    sol.best_neighbor_change = std::min(sol.best_neighbor_change, change);
  }
  sol.pivots = tab.pivots();
  return sol;
}

inline BoundReport min_cover_lp(const Hypergraph& h, std::span<const std::uint64_t> sizes) {
  auto sol = solve_cover_lp(h, sizes);
  BoundReport rep;
  rep.cover = std::move(sol.cover);
  rep.log2_bound = sol.objective;
  rep.bound = boost::multiprecision::exp2(sol.objective);
  return rep;
}

inline BoundReport min_cover_lp(const JoinQuery& q) {
  auto s = q.sizes();
  for (auto& x : s) x = std::max<std::uint64_t>(x, 1);
  return min_cover_lp(q.hypergraph, s);
}

struct Decomposition {
  Real lhs;
  Real rhs;
};

namespace detail {

/// Oracle join over relations whose attributes need not be dense: remaps
/// to [0, k) preserving order, joins, and maps back.
inline Relation oracle_join_sparse(const std::vector<Relation>& rels) {
  Schema attrs;
  for (const auto& r : rels) attrs.insert(attrs.end(), r.schema().begin(), r.schema().end());
  std::sort(attrs.begin(), attrs.end());
  attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
  auto dense = [&](Attr a) {
    return static_cast<Attr>(std::lower_bound(attrs.begin(), attrs.end(), a) - attrs.begin());
  };
  std::vector<Relation> mapped;
  for (const auto& r : rels) {
    Schema s;
    for (Attr a : r.schema()) s.push_back(dense(a));
    mapped.emplace_back(s, r.flat());
  }
  Relation out = oracle_join(make_query(std::move(mapped)));
  return Relation(attrs, out.flat());
}

}  // namespace detail

/// Both sides of the query decomposition inequality
///   Σ_{t∈L} Π_{F∈E_J} |R_F ⋉ t|^{x_F}  ≤  Π_F |R_F|^{x_F},
/// with L = ⋈_{F∈E_I} π_I(R_F) materialized by the oracle join.
inline Decomposition decomposition_check(const JoinQuery& q, const FractionalCover& x,
                                         Schema partition) {
  q.validate();
  if (!is_cover(q.hypergraph, x)) throw InfeasibleCover("weights do not cover every attribute");
  std::sort(partition.begin(), partition.end());
  partition.erase(std::unique(partition.begin(), partition.end()), partition.end());
  const std::size_t n = q.num_attributes();
  if (partition.empty() || partition.size() >= n || partition.back() >= n)
    throw InvalidPartition("need 1 <= |I| < |V| with I inside V");

  Schema rest;
  for (Attr v = 0; v < n; ++v)
    if (!std::binary_search(partition.begin(), partition.end(), v)) rest.push_back(v);
  const auto e_i = edge_subset(q.hypergraph, partition);
  const auto e_j = edge_subset(q.hypergraph, rest);

  std::vector<Relation> projected;
  for (auto e : e_i) {
    Schema s;
    for (Attr a : q.hypergraph.edges[e])
      if (std::binary_search(partition.begin(), partition.end(), a)) s.push_back(a);
    projected.push_back(project(q.relations[e], s));
  }
  Relation l = detail::oracle_join_sparse(projected);

  Decomposition out{Real(0), Real(1)};
  for (std::size_t i = 0; i < l.size(); ++i) {
    Assignment t;
    for (std::size_t c = 0; c < l.arity(); ++c) t.emplace(l.schema()[c], l.row(i)[c]);
    Real term = 1;
    for (auto e : e_j) term *= pow_size(semijoin(q.relations[e], t).size(), x[e]);
    out.lhs += term;
  }
  for (std::size_t e = 0; e < q.num_relations(); ++e)
    out.rhs *= pow_size(q.relations[e].size(), x[e]);
  return out;
}

}  // namespace wcoj
