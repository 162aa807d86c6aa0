#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "wcoj/gen.hpp"
#include "wcoj/io.hpp"
#include "wcoj/rewrite.hpp"

using namespace wcoj;

namespace {

double log2_bound(const std::string& text, std::uint64_t n, bool fds) {
  auto c = parse_query(text);
  if (!fds) c.fds.clear();
  std::map<std::string, std::uint64_t> sizes;
  for (const auto& a : c.body) sizes[a.symbol] = n;
  return cq_bound(c, sizes).log2_bound.convert_to<double>();
}

const char* projection = "Q(W) :- R(W,X), S(W,Y), T(W,Z).";
const char* repeated = "Q(W,Y) :- R(W,W), S(W,Y), T(Y,Y).";
const char* chase_example = "fd R: 1 -> 2\nQ(W,X,Y) :- R(W,X), R(W,W), S(X,Y).";
const char* fd_example =
    "fd R1: 1 -> 2\nfd R2: 1 -> 2\nfd R3: 1 -> 2\nfd S1: 1 -> 2\n"
    "Q(X,Y1,Y2,Y3,Z) :- R1(X,Y1), R2(X,Y2), R3(X,Y3), S1(Y1,Z), S2(Y2,Z), S3(Y3,Z).";

/// Positional evaluation by enumerating every variable assignment.
std::set<Tuple> brute_cq(const ConjunctiveQuery& c, const Database& db, Value domain) {
  std::set<Tuple> out;
  std::size_t nv = c.var_names.size();
  for (const auto& a : c.body)
    for (Var v : a.vars) nv = std::max<std::size_t>(nv, v + 1);
  Tuple val(nv);
  std::function<void(std::size_t)> rec = [&](std::size_t v) {
    if (v == nv) {
      for (const auto& a : c.body) {
        Tuple t;
        for (Var x : a.vars) t.push_back(val[x]);
        if (!db.at(a.symbol).contains(t)) return;
      }
      Tuple h;
      for (Var x : c.head.vars) h.push_back(val[x]);
      out.insert(h);
      return;
    }
    for (Value x = 0; x < domain; ++x) {
      val[v] = x;
      rec(v + 1);
    }
  };
  rec(0);
  return out;
}

/// Random positional relations; the FD's source column is made a key.
Database random_db(const ConjunctiveQuery& c, std::mt19937_64& g, Value domain) {
  std::map<std::string, std::size_t> arity;
  for (const auto& a : c.body) arity[a.symbol] = a.vars.size();
  Database db;
  for (const auto& [sym, k] : arity) {
    std::vector<Tuple> rows;
    std::size_t n = 1 + g() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      Tuple t(k);
      for (auto& x : t) x = g() % domain;
      rows.push_back(t);
    }
    for (const auto& fd : c.fds) {
      if (fd.symbol != sym) continue;
      std::map<Value, Value> key;
      for (auto& t : rows) {
        auto [it, fresh] = key.emplace(t[fd.from - 1], t[fd.to - 1]);
        t[fd.to - 1] = it->second;
      }
    }
    Schema s(k);
    std::iota(s.begin(), s.end(), 0);
    db.emplace(sym, Relation(s, rows));
  }
  return db;
}

}  // namespace

TEST(CqBound, ProjectionExample) {
  for (std::uint64_t k : {4, 10}) EXPECT_NEAR(log2_bound(projection, 1ull << k, false), k, 1e-9);
}

TEST(CqBound, RepeatedVariablesExample) {
  for (std::uint64_t k : {4, 10}) EXPECT_NEAR(log2_bound(repeated, 1ull << k, false), k, 1e-9);
}

TEST(CqBound, ChaseExample) {
  for (std::uint64_t k : {4, 10}) {
    EXPECT_NEAR(log2_bound(chase_example, 1ull << k, false), 2.0 * k, 1e-9);
    EXPECT_NEAR(log2_bound(chase_example, 1ull << k, true), k, 1e-9);
  }
}

TEST(CqBound, FunctionalDependencyExample) {
  for (std::uint64_t k : {4, 10}) {
    EXPECT_NEAR(log2_bound(fd_example, 1ull << k, false), 3.0 * k, 1e-9);
    EXPECT_NEAR(log2_bound(fd_example, 1ull << k, true), k, 1e-9);
  }
}

TEST(CqBound, BooleanQueryIsOne) {
  auto c = parse_query("Q() :- R(X,Y), S(Y,Z).");
  EXPECT_EQ(cq_bound(c, {{"R", 100}, {"S", 100}}).bound, 1);
  EXPECT_THROW(cq_bound(c, {{"R", 100}}), ParameterError);
}

TEST(Chase, UnifiesTargetsOfAgreeingAtoms) {
  auto c = chase(parse_query(chase_example));
  EXPECT_EQ(c.body.size(), 2u);  // R(W,X) and R(W,W) collapse
  EXPECT_EQ(c.head.vars[0], c.head.vars[1]);
  auto r = chase(parse_query(chase_example), ChaseOrder::reverse);
  EXPECT_EQ(r.body.size(), 2u);
  EXPECT_EQ(r.head.vars[0], r.head.vars[1]);
}

TEST(Chase, RejectsBadFds) {
  auto c = parse_query("Q(X) :- R(X,Y).");
  c.fds = {{"R", 1, 3}};
  EXPECT_THROW(chase(c), ParameterError);
}

TEST(Rewrite, DropsRepeatedVariablesIntoFilters) {
  auto c = drop_repeated_vars(parse_query(repeated));
  EXPECT_EQ(c.body[0].vars.size(), 1u);
  EXPECT_EQ(c.body[0].symbol, "R'");
  EXPECT_EQ(c.body[0].origin, "R");
}

TEST(Rewrite, PreservesAnswersAndRespectsBound) {
  std::mt19937_64 g(31);
  const std::vector<std::string> queries{
      projection,
      repeated,
      chase_example,
      fd_example,
      "fd R: 1 -> 2\nQ(X,Z) :- R(X,Y), S(Y,Z), R(X,W).",
      "fd R: 2 -> 1\nfd S: 1 -> 2\nQ(A,B,C) :- R(A,B), S(B,C), T(A,C).",
      "Q(X,Y) :- R(X,Y), R(Y,X).",
  };
  for (const auto& text : queries) {
    auto c = parse_query(text);
    for (int trial = 0; trial < 40; ++trial) {
      const Value domain = 3;
      auto db = random_db(c, g, domain);
      auto want = brute_cq(c, db, domain);
      auto got = evaluate_cq(c, db);
      EXPECT_EQ(std::set<Tuple>(got.begin(), got.end()), want) << text;

      for (auto order : {ChaseOrder::forward, ChaseOrder::reverse}) {
        auto chased = chase(c, order);
        auto cg = evaluate_cq(chased, db);
        EXPECT_EQ(std::set<Tuple>(cg.begin(), cg.end()), want) << "chase " << text;
      }

      // the rewritten join contains every answer (over distinct head variables)
      auto p = rewrite_cq(c);
      if (p.boolean) continue;
      auto joined = oracle_join(p.bind(db));
      for (const auto& t : want) {
        Tuple u(p.attribute_vars.size());
        for (std::size_t i = 0; i < c.head.vars.size(); ++i) {
          Var v = p.normalized.head.vars[i];
          u[std::find(p.attribute_vars.begin(), p.attribute_vars.end(), v) - p.attribute_vars.begin()] = t[i];
        }
        EXPECT_TRUE(joined.contains(u)) << text;
      }
      std::map<std::string, std::uint64_t> sizes;
      for (const auto& [name, rel] : db) sizes[name] = rel.size();
      EXPECT_LE(static_cast<double>(want.size()), cq_bound(c, sizes).bound.convert_to<double>() * (1 + 1e-9)) << text;
    }
  }
}

TEST(ChaseWitness, QuadraticWithoutTheKey) {
  for (std::uint64_t n : {8, 16, 64}) {
    auto b = gen_chase_witness(n);
    EXPECT_EQ(evaluate_cq(*b.cq, b.data).size(), n * n / 2);
  }
}
