#pragma once

// Deterministic instance generators: the adversarial families, clique and
// Loomis-Whitney queries over random data, and seeded random queries.

#include <cmath>
#include <optional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wcoj/core.hpp"
#include "wcoj/rewrite.hpp"

namespace wcoj {

struct InstanceBundle {
  std::string generator;
  std::vector<std::pair<std::string, std::string>> params;
  JoinQuery query;
  std::optional<std::uint64_t> expected_output;
  /// Set for families that are conjunctive queries rather than natural joins;
  /// `query` is then unused and the data lives in `data`.
  std::optional<ConjunctiveQuery> cq;
  Database data;
};

namespace detail {

/// One stream per (seed, tag): relations draw from their own stream.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

inline std::uint64_t saturating_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base) return std::numeric_limits<std::uint64_t>::max();
    r *= base;
  }
  return r;
}

/// `size` distinct uniform tuples over [0, domain)^arity.
inline Relation random_relation(Schema schema, std::uint64_t size, std::uint64_t domain, std::mt19937_64& g) {
  const std::size_t k = schema.size();
  const std::uint64_t cap = saturating_pow(domain, k);
  if (size > cap)
    throw ParameterError("cannot draw " + std::to_string(size) + " distinct tuples from domain^" + std::to_string(k) +
                         " = " + std::to_string(cap));
  std::vector<Value> flat;
  if (size * 2 > cap) {
    // Dense request: partial shuffle of all tuple codes.
    std::vector<std::uint64_t> codes(cap);
    std::iota(codes.begin(), codes.end(), 0);
    for (std::uint64_t i = 0; i < size; ++i) std::swap(codes[i], codes[i + g() % (cap - i)]);
    for (std::uint64_t i = 0; i < size; ++i) {
      std::uint64_t c = codes[i];
      std::vector<Value> t(k);
      for (std::size_t d = k; d-- > 0;) {
        t[d] = c % domain;
        c /= domain;
      }
      flat.insert(flat.end(), t.begin(), t.end());
    }
    return Relation(std::move(schema), std::move(flat));
  }
  std::set<std::vector<Value>> seen;
  while (seen.size() < size) {
    std::vector<Value> t(k);
    for (auto& v : t) v = g() % domain;
    if (seen.insert(t).second) flat.insert(flat.end(), t.begin(), t.end());
  }
  return Relation(std::move(schema), std::move(flat));
}

inline std::string letters(std::size_t i) {
  if (i < 26) return std::string(1, static_cast<char>('A' + i));
  return "A" + std::to_string(i);
}

}  // namespace detail

/// R = {a0}×{b0..bm} ∪ {a0..am}×{b0} and likewise for S and T, with a_i = b_i = c_i = i.
inline InstanceBundle gen_triangle_bad(std::uint64_t m) {
  if (m < 1) throw ParameterError("triangle-bad needs m >= 1");
  std::vector<Value> flat;
  for (Value i = 0; i <= m; ++i) flat.insert(flat.end(), {0, i});
  for (Value i = 1; i <= m; ++i) flat.insert(flat.end(), {i, 0});
  InstanceBundle b;
  b.generator = "triangle-bad";
  b.params = {{"m", std::to_string(m)}};
  b.query = make_query({Relation({0, 1}, flat), Relation({1, 2}, flat), Relation({0, 2}, flat)}, {"A", "B", "C"},
                       {"R", "S", "T"});
  b.expected_output = 3 * m + 1;
  return b;
}

/// Every tuple over `schema` with values in [0, d] and at most one nonzero entry.
inline Relation simple_relation(Schema schema, std::uint64_t d) {
  const std::size_t k = schema.size();
  std::vector<Value> flat(k, 0);
  for (std::size_t c = 0; c < k; ++c)
    for (Value v = 1; v <= d; ++v) {
      std::vector<Value> t(k, 0);
      t[c] = v;
      flat.insert(flat.end(), t.begin(), t.end());
    }
  return Relation(std::move(schema), std::move(flat));
}

/// Whether `r` is exactly the simple relation over its schema with values in [0, d].
inline bool is_simple(const Relation& r, std::uint64_t d) {
  if (r.arity() == 0) return r.size() == 1;
  if (r.size() != 1 + r.arity() * d) return false;
  for (std::size_t i = 0; i < r.size(); ++i) {
    std::size_t nonzero = 0;
    for (Value v : r.row(i)) {
      if (v > d) return false;
      nonzero += v != 0;
    }
    if (nonzero > 1) return false;
  }
  return true;  // distinct rows, all admissible, right count
}

/// n relations R_i on [n] − {i}, each the simple relation over [0, (N−1)/(n−1)].
inline InstanceBundle gen_lw_bad(std::uint64_t n, std::uint64_t N) {
  if (n < 2) throw ParameterError("lw-bad needs n >= 2");
  if (N < 2) throw ParameterError("lw-bad needs N >= 2");
  if ((N - 1) % (n - 1) != 0)
    throw ParameterError("lw-bad needs (N-1) divisible by (n-1); got N=" + std::to_string(N) + ", n=" + std::to_string(n));
  const std::uint64_t d = (N - 1) / (n - 1);
  std::vector<Relation> rels;
  std::vector<std::string> attrs, names;
  for (std::uint64_t i = 0; i < n; ++i) {
    Schema s;
    for (Attr a = 0; a < n; ++a)
      if (a != i) s.push_back(a);
    rels.push_back(simple_relation(s, d));
    attrs.push_back("A" + std::to_string(i + 1));
    names.push_back("R" + std::to_string(i + 1));
  }
  InstanceBundle b;
  b.generator = "lw-bad";
  b.params = {{"n", std::to_string(n)}, {"N", std::to_string(N)}};
  b.query = make_query(std::move(rels), std::move(attrs), std::move(names));
  b.expected_output = N + d;
  return b;
}

inline std::uint64_t default_clique_domain(std::uint64_t N) {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(2 * std::sqrt(static_cast<double>(N)))));
}

inline std::uint64_t default_lw_domain(std::uint64_t k, std::uint64_t N) {
  auto d = static_cast<std::uint64_t>(std::ceil(2 * std::pow(static_cast<double>(N), 1.0 / static_cast<double>(k - 1))));
  d = std::max<std::uint64_t>(d, 1);
  while (detail::saturating_pow(d, k - 1) < N) ++d;
  return d;
}

/// K_k: one binary relation per attribute pair, N random tuples each.
inline InstanceBundle gen_clique_query(std::uint64_t k, std::uint64_t N, std::uint64_t seed,
                                       std::optional<std::uint64_t> domain = {}) {
  if (k < 3) throw ParameterError("clique query needs k >= 3");
  const std::uint64_t dom = domain.value_or(default_clique_domain(N));
  std::vector<Relation> rels;
  std::vector<std::string> attrs, names;
  for (Attr a = 0; a < k; ++a) attrs.push_back(detail::letters(a));
  std::uint32_t tag = 0;
  for (Attr i = 0; i < k; ++i)
    for (Attr j = i + 1; j < k; ++j) {
      auto g = detail::stream(seed, tag++);
      rels.push_back(detail::random_relation({i, j}, N, dom, g));
      names.push_back("R" + attrs[i] + attrs[j]);
    }
  InstanceBundle b;
  b.generator = "clique";
  b.params = {{"k", std::to_string(k)}, {"N", std::to_string(N)}, {"seed", std::to_string(seed)},
              {"domain", std::to_string(dom)}};
  b.query = make_query(std::move(rels), std::move(attrs), std::move(names));
  return b;
}

/// LW_k: relation R_i on all attributes but the i-th, N random tuples each.
inline InstanceBundle gen_lw_query(std::uint64_t k, std::uint64_t N, std::uint64_t seed,
                                   std::optional<std::uint64_t> domain = {}) {
  if (k < 3) throw ParameterError("Loomis-Whitney query needs k >= 3");
  const std::uint64_t dom = domain.value_or(default_lw_domain(k, N));
  std::vector<Relation> rels;
  std::vector<std::string> attrs, names;
  for (Attr a = 0; a < k; ++a) attrs.push_back(detail::letters(a));
  for (Attr i = 0; i < k; ++i) {
    Schema s;
    for (Attr a = 0; a < k; ++a)
      if (a != i) s.push_back(a);
    auto g = detail::stream(seed, i);
    rels.push_back(detail::random_relation(s, N, dom, g));
    names.push_back("R" + std::to_string(i + 1));
  }
  InstanceBundle b;
  b.generator = "lw";
  b.params = {{"k", std::to_string(k)}, {"N", std::to_string(N)}, {"seed", std::to_string(seed)},
              {"domain", std::to_string(dom)}};
  b.query = make_query(std::move(rels), std::move(attrs), std::move(names));
  return b;
}

/// The chase example: Q(W,X,Y) :- R(W,X), R(W,W), S(X,Y) with
/// R = {(i,i), (i,0) | i ∈ 1..N/2} and S = {(0,j) | j ∈ 1..N}.
inline InstanceBundle gen_chase_witness(std::uint64_t N) {
  if (N < 2 || N % 2) throw ParameterError("chase witness needs an even N >= 2");
  std::vector<Value> r, s;
  for (Value i = 1; i <= N / 2; ++i) r.insert(r.end(), {i, i, i, 0});
  for (Value j = 1; j <= N; ++j) s.insert(s.end(), {0, j});
  InstanceBundle b;
  b.generator = "chase-witness";
  b.params = {{"N", std::to_string(N)}};
  ConjunctiveQuery c;
  c.head = {"Q", {0, 1, 2}};
  c.body = {BodyAtom("R", {0, 1}), BodyAtom("R", {0, 0}), BodyAtom("S", {1, 2})};
  c.var_names = {"W", "X", "Y"};
  b.cq = std::move(c);
  b.data = {{"R", Relation({0, 1}, std::move(r))}, {"S", Relation({0, 1}, std::move(s))}};
  b.expected_output = N * N / 2;
  return b;
}

struct RandomSpec {
  std::uint64_t seed = 0;
  std::size_t n = 3;                  // attributes
  std::size_t m = 3;                  // relations
  std::vector<std::uint64_t> sizes;   // per relation; a single entry applies to all
  std::uint64_t domain = 4;
  std::optional<std::vector<Schema>> edges;  // fixed hypergraph instead of a random one
};

namespace detail {

inline bool connected_cover(std::size_t n, const std::vector<Schema>& edges) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<bool> seen(n, false);
  for (const auto& e : edges)
    for (Attr a : e) {
      seen[a] = true;
      parent[find(a)] = find(e.front());
    }
  for (std::size_t v = 0; v < n; ++v)
    if (!seen[v] || find(v) != find(0)) return false;
  return true;
}

}  // namespace detail

inline InstanceBundle gen_random(const RandomSpec& spec) {
  if (spec.n == 0 || spec.m == 0 || spec.domain == 0) throw ParameterError("random instance needs n, m, domain >= 1");
  if (spec.sizes.size() != 1 && spec.sizes.size() != spec.m)
    throw ParameterError("sizes must have one entry or one per relation");
  std::vector<Schema> edges;
  if (spec.edges) {
    edges = *spec.edges;
    if (edges.size() != spec.m) throw ParameterError("edge list length differs from m");
    for (auto& e : edges) std::sort(e.begin(), e.end());
  } else {
    auto g = detail::stream(spec.seed, 0xFFFFFFFFu);
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) throw ParameterError("no connected covering hypergraph found for these n, m");
      edges.clear();
      for (std::size_t e = 0; e < spec.m; ++e) {
        Schema s;
        while (s.empty())
          for (Attr a = 0; a < spec.n; ++a)
            if (g() % 2) s.push_back(a);
        edges.push_back(s);
      }
      if (detail::connected_cover(spec.n, edges)) break;
    }
  }
  std::vector<Relation> rels;
  for (std::size_t e = 0; e < spec.m; ++e) {
    auto g = detail::stream(spec.seed, static_cast<std::uint32_t>(e));
    rels.push_back(detail::random_relation(edges[e], spec.sizes.size() == 1 ? spec.sizes[0] : spec.sizes[e],
                                           spec.domain, g));
  }
  InstanceBundle b;
  b.generator = "random";
  b.params = {{"seed", std::to_string(spec.seed)}, {"n", std::to_string(spec.n)}, {"m", std::to_string(spec.m)},
              {"domain", std::to_string(spec.domain)}};
  b.query = make_query(std::move(rels));
  return b;
}

}  // namespace wcoj
