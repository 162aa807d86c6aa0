#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wcoj/agm.hpp"
#include "wcoj/gen.hpp"

using namespace wcoj;

namespace {

double d(const Real& r) { return r.convert_to<double>(); }

Hypergraph triangle() { return Hypergraph{3, {{0, 1}, {1, 2}, {0, 2}}}; }

Hypergraph clique(std::size_t k) {
  Hypergraph h{k, {}};
  for (Attr i = 0; i < k; ++i)
    for (Attr j = i + 1; j < k; ++j) h.edges.push_back({i, j});
  return h;
}

Hypergraph loomis_whitney(std::size_t k) {
  Hypergraph h{k, {}};
  for (Attr i = 0; i < k; ++i) {
    Schema s;
    for (Attr a = 0; a < k; ++a)
      if (a != i) s.push_back(a);
    h.edges.push_back(s);
  }
  return h;
}

FractionalCover cover(std::initializer_list<Rational> w) { return {std::vector<Rational>(w)}; }

}  // namespace

TEST(Cover, FeasibilityIsExact) {
  auto h = triangle();
  EXPECT_TRUE(is_cover(h, FractionalCover::uniform(3, Rational(1, 2))));
  EXPECT_FALSE(is_cover(h, cover({Rational(1, 2), Rational(1, 2), Rational(499, 1000)})));
  EXPECT_TRUE(is_cover(h, cover({1, 0, 1})));
  EXPECT_THROW(is_cover(h, cover({1, 1})), MalformedCover);
  EXPECT_THROW(is_cover(h, cover({1, -1, 1})), MalformedCover);
}

TEST(AgmBound, TriangleHalfCover) {
  std::vector<std::uint64_t> n64{64, 64, 64};
  auto r = agm_bound(triangle(), n64, FractionalCover::uniform(3, Rational(1, 2)));
  EXPECT_NEAR(d(r.log2_bound), 9.0, 1e-9);
  EXPECT_NEAR(d(r.bound), 512.0, 1e-6);
  std::vector<std::uint64_t> n16{16, 16, 16};
  EXPECT_NEAR(d(agm_bound(triangle(), n16, FractionalCover::uniform(3, Rational(1, 2))).bound), 64.0, 1e-9);
  EXPECT_THROW(agm_bound(triangle(), n16, cover({1, 0, 0})), InfeasibleCover);
}

TEST(AgmBound, EmptyRelationGivesZero) {
  std::vector<std::uint64_t> s{0, 5, 5};
  EXPECT_EQ(d(agm_bound(triangle(), s, cover({1, 0, 1})).bound), 0.0);
}

TEST(CoverLp, TriangleEqualSizesIsHalfCover) {
  std::vector<std::uint64_t> s{16, 16, 16};
  auto r = min_cover_lp(triangle(), s);
  EXPECT_EQ(r.cover, FractionalCover::uniform(3, Rational(1, 2)));
  EXPECT_NEAR(d(r.bound), 64.0, 1e-9);
}

TEST(CoverLp, TriangleWithTwoSingletonRelations) {
  std::vector<std::uint64_t> s{1, 64, 1};
  auto r = min_cover_lp(triangle(), s);
  EXPECT_NEAR(d(r.log2_bound), 0.0, 1e-9);
  EXPECT_NEAR(d(r.bound), 1.0, 1e-9);
  EXPECT_EQ(r.cover[1], 0);
}

TEST(CoverLp, CliqueAndLoomisWhitney) {
  std::vector<std::uint64_t> k4(6, 16);
  EXPECT_NEAR(d(min_cover_lp(clique(4), k4).log2_bound), 8.0, 1e-9);  // 16^(4/2)
  std::vector<std::uint64_t> lw4(4, 8);
  EXPECT_NEAR(d(min_cover_lp(loomis_whitney(4), lw4).log2_bound), 4.0, 1e-9);  // 8^(1+1/3)
  std::vector<std::uint64_t> lw3(3, 27);
  EXPECT_NEAR(d(min_cover_lp(loomis_whitney(3), lw3).bound), std::pow(27.0, 1.5), 1e-6);
}

TEST(CoverLp, MatchesVertexEnumeration) {
  std::mt19937_64 g(2024);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 1 + g() % 5, m = 1 + g() % 5;
    Hypergraph h{n, std::vector<Schema>(m)};
    std::vector<bool> seen(n, false);
    for (auto& e : h.edges) {
      while (e.empty())
        for (Attr a = 0; a < n; ++a)
          if (g() % 2) e.push_back(a);
      for (Attr a : e) seen[a] = true;
    }
    for (Attr a = 0; a < n; ++a)
      if (!seen[a]) h.edges[g() % m].push_back(a);
    for (auto& e : h.edges) std::sort(e.begin(), e.end());
    std::vector<std::uint64_t> sizes(m);
    for (auto& s : sizes) s = 1 + g() % 1000;

    auto want = oracle::cover_lp(n, h.edges, sizes);
    auto got = solve_cover_lp(h, sizes);
    ASSERT_TRUE(is_cover(h, got.cover));
    EXPECT_NEAR(d(got.objective), want.objective, 1e-9) << "trial " << trial;
    EXPECT_GE(d(got.best_neighbor_change), -1e-12);
  }
}

TEST(CoverLp, BoundHoldsOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto q = oracle::random_instance(seed);
    auto out = oracle::brute_join(q).size();
    auto r = min_cover_lp(q);
    EXPECT_LE(static_cast<double>(out), std::ceil(d(r.bound) - 1e-9) + 1e-9) << "seed " << seed;
  }
}

TEST(CoverLp, TriangleBadFourWithinBound) {
  auto b = gen_triangle_bad(4);
  auto r = min_cover_lp(b.query);
  EXPECT_NEAR(d(r.bound), 27.0, 1e-9);  // 9^(3/2)
  EXPECT_LE(13.0, d(r.bound));
}

TEST(Decomposition, MatchesDirectSumAndHolds) {
  std::mt19937_64 g(5);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto q = oracle::random_instance(seed);
    if (q.num_attributes() < 2) continue;
    auto lp = min_cover_lp(q);
    for (Attr v = 0; v < q.num_attributes(); ++v) {
      auto dc = decomposition_check(q, lp.cover, {v});
      // direct: values of v that appear in every relation containing v
      std::set<Value> l;
      bool first = true;
      for (const auto& r : q.relations) {
        auto p = r.position_of(v);
        if (!p) continue;
        std::set<Value> col;
        for (std::size_t i = 0; i < r.size(); ++i) col.insert(r.row(i)[*p]);
        if (first) {
          l = col;
          first = false;
        } else {
          std::set<Value> keep;
          for (Value x : l)
            if (col.count(x)) keep.insert(x);
          l = keep;
        }
      }
      double lhs = 0;
      for (Value a : l) {
        double term = 1;
        for (std::size_t e = 0; e < q.num_relations(); ++e) {
          const auto& r = q.relations[e];
          bool meets_rest = false;
          for (Attr x : r.schema()) meets_rest |= x != v;
          if (!meets_rest) continue;
          std::size_t cnt = 0;
          auto p = r.position_of(v);
          for (std::size_t i = 0; i < r.size(); ++i) cnt += !p || r.row(i)[*p] == a;
          double w = lp.cover[e].convert_to<double>();
          term *= cnt == 0 ? 0.0 : (w == 0 ? 1.0 : std::pow(double(cnt), w));
        }
        lhs += term;
      }
      EXPECT_NEAR(d(dc.lhs), lhs, 1e-6 * std::max(1.0, lhs)) << "seed " << seed << " v " << v;
      EXPECT_LE(d(dc.lhs), d(dc.rhs) * (1 + 1e-9));
    }
  }
}

TEST(Decomposition, RejectsBadPartitions) {
  auto q = gen_triangle_bad(2).query;
  auto x = FractionalCover::uniform(3, Rational(1, 2));
  EXPECT_THROW(decomposition_check(q, x, {}), InvalidPartition);
  EXPECT_THROW(decomposition_check(q, x, {0, 1, 2}), InvalidPartition);
  EXPECT_THROW(decomposition_check(q, FractionalCover::uniform(3, Rational(1, 4)), {0}), InfeasibleCover);
}
