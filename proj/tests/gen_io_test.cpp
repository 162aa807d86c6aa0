#include <gtest/gtest.h>

#include <filesystem>

#include "json.hpp"
#include "oracles.hpp"
#include "wcoj/gen.hpp"
#include "wcoj/io.hpp"

using namespace wcoj;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("wcoj_gen_io_" + name);
  fs::remove_all(p);
  return p;
}

std::multiset<std::set<Tuple>> contents(const JoinQuery& q) {
  std::multiset<std::set<Tuple>> out;
  for (const auto& r : q.relations) out.insert(oracle::as_set(r));
  return out;
}

}  // namespace

TEST(Gen, TriangleBadMatchesConstruction) {
  auto b = gen_triangle_bad(4);
  ASSERT_EQ(b.query.num_relations(), 3u);
  for (const auto& r : b.query.relations) EXPECT_EQ(r.size(), 9u);
  EXPECT_EQ(oracle::brute_join(b.query).size(), 13u);
  EXPECT_EQ(b.expected_output, 13u);
  EXPECT_EQ(b.query.relation_names, (std::vector<std::string>{"R", "S", "T"}));
  for (std::uint64_t m : {1, 7, 20}) EXPECT_EQ(oracle::brute_join(gen_triangle_bad(m).query).size(), 3 * m + 1);
  EXPECT_THROW(gen_triangle_bad(0), ParameterError);
}

TEST(Gen, LoomisWhitneyBadSpecialisesToTriangle) {
  EXPECT_EQ(contents(gen_lw_bad(3, 9).query), contents(gen_triangle_bad(4).query));
}

TEST(Gen, LoomisWhitneyBadSizes) {
  for (std::uint64_t n : {3, 4, 5})
    for (std::uint64_t d : {1, 2, 3}) {
      std::uint64_t N = d * (n - 1) + 1;
      auto b = gen_lw_bad(n, N);
      for (const auto& r : b.query.relations) {
        EXPECT_EQ(r.size(), N);
        EXPECT_TRUE(is_simple(r, d));
      }
      EXPECT_EQ(oracle::brute_join(b.query).size(), N + d) << "n=" << n << " d=" << d;
    }
  EXPECT_THROW(gen_lw_bad(3, 10), ParameterError);
  EXPECT_THROW(gen_lw_bad(1, 10), ParameterError);
}

TEST(Gen, SimpleRelationShape) {
  auto r = simple_relation({0, 1, 2}, 4);
  EXPECT_EQ(r.size(), 13u);
  EXPECT_TRUE(is_simple(r, 4));
  EXPECT_FALSE(is_simple(r, 5));
  EXPECT_FALSE(is_simple(Relation(Schema{0, 1}, std::vector<Tuple>{{0, 0}, {1, 1}, {0, 1}}), 1));
}

TEST(Gen, SeededFamiliesAreDeterministic) {
  auto a = gen_clique_query(4, 50, 7), b = gen_clique_query(4, 50, 7), c = gen_clique_query(4, 50, 8);
  EXPECT_EQ(a.query.relations, b.query.relations);
  EXPECT_NE(a.query.relations, c.query.relations);
  EXPECT_EQ(a.query.num_relations(), 6u);
  for (const auto& r : a.query.relations) EXPECT_EQ(r.size(), 50u);
  auto l = gen_lw_query(4, 40, 3);
  EXPECT_EQ(l.query.num_relations(), 4u);
  for (const auto& r : l.query.relations) {
    EXPECT_EQ(r.size(), 40u);
    EXPECT_EQ(r.arity(), 3u);
  }
  EXPECT_THROW(gen_clique_query(4, 100, 1, 3), ParameterError);  // 3^2 < 100
}

TEST(Gen, RandomInstancesAreConnectedAndSized) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto b = gen_random({seed, 4, 3, {10}, 12, std::nullopt});
    b.query.validate();
    for (const auto& r : b.query.relations) EXPECT_EQ(r.size(), 10u);
    EXPECT_EQ(gen_random({seed, 4, 3, {10}, 12, std::nullopt}).query.relations, b.query.relations);
  }
}

TEST(Gen, RandomRejectsImpossibleSizes) {
  EXPECT_THROW(gen_random({1, 2, 2, {10}, 3, std::vector<Schema>{{0}, {0, 1}}}), ParameterError);
  EXPECT_THROW(gen_random({1, 0, 2, {10}, 3, std::nullopt}), ParameterError);
}

TEST(Gen, ForcedTriangleShape) {
  auto b = gen_random({5, 3, 3, {20}, 8, std::vector<Schema>{{0, 1}, {1, 2}, {0, 2}}});
  EXPECT_EQ(b.query.hypergraph.edges, (std::vector<Schema>{{0, 1}, {1, 2}, {0, 2}}));
  for (const auto& r : b.query.relations) EXPECT_EQ(r.size(), 20u);
}

TEST(Gen, ChaseWitness) {
  auto b = gen_chase_witness(8);
  ASSERT_TRUE(b.cq);
  EXPECT_EQ(b.data.at("R").size(), 8u);
  EXPECT_EQ(b.data.at("S").size(), 8u);
  EXPECT_EQ(b.expected_output, 32u);
  EXPECT_THROW(gen_chase_witness(7), ParameterError);
}

TEST(Io, RelationRoundTrip) {
  Relation r(Schema{0, 1}, std::vector<Tuple>{{3, 1}, {1, 2}, {1, 2}});
  auto text = format_relation("R", {"A", "B"}, r);
  EXPECT_EQ(text, "# relation R schema A,B\n1,2\n3,1\n");
  auto back = parse_relation(text);
  EXPECT_EQ(back.name, "R");
  EXPECT_EQ(back.columns, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(back.data, r);
}

TEST(Io, RelationErrorsCarryPositions) {
  try {
    parse_relation("# relation R schema A,B\n1,2\n3,x\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3u);
    EXPECT_EQ(e.column, 3u);
  }
  try {
    parse_relation("# relation R schema A,B\n1,2,3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2u);
  }
  EXPECT_THROW(parse_relation("1,2\n"), ParseError);
}

TEST(Io, QueryDsl) {
  auto c = parse_query("# triangle with a key\nfd R: 1 -> 2\nQ(A,B,C) :- R(A,B), S(B,C),\n  T(A,C).\n");
  EXPECT_EQ(c.head.symbol, "Q");
  EXPECT_EQ(c.var_names, (std::vector<std::string>{"A", "B", "C"}));
  ASSERT_EQ(c.body.size(), 3u);
  EXPECT_EQ(c.body[2].vars, (std::vector<Var>{0, 2}));
  ASSERT_EQ(c.fds.size(), 1u);
  EXPECT_EQ(c.fds[0], (SimpleFD{"R", 1, 2}));
  EXPECT_EQ(parse_query(format_query(c)).body, c.body);
  auto h = parse_query("Q(Y) :- R(X,Y).");
  EXPECT_EQ(h.var_names, (std::vector<std::string>{"Y", "X"}));
}

TEST(Io, QueryErrorsCarryPositions) {
  using Pos = std::pair<std::size_t, std::size_t>;
  auto where = [](const std::string& text) {
    try {
      parse_query(text);
    } catch (const ParseError& e) {
      return Pos{e.line, e.column};
    }
    return Pos{0, 0};
  };
  EXPECT_EQ(where("Q(A) :- R(A,\n"), Pos(2, 1));
  EXPECT_EQ(where("Q(A) :- R(A) S(A)."), Pos(1, 14));
  EXPECT_NE(where("Q(Z) :- R(A)."), Pos(0, 0));
  EXPECT_NE(where("fd R: 1 -> 3\nQ(A) :- R(A,B)."), Pos(0, 0));
  EXPECT_NE(where("Q(A) :- R(A). Q(A) :- R(A)."), Pos(0, 0));
}

TEST(Io, BundleRoundTrip) {
  auto dir = scratch("bundle");
  auto b = gen_triangle_bad(4);
  write_bundle(dir, b);
  auto c = parse_query(read_file(dir / "query.q"));
  auto db = load_database(dir, c);
  auto q = body_join_query(c, db);
  EXPECT_EQ(head_tuples(c, oracle_join(q)).size(), 13u);
  auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["generator"], "triangle-bad");
  EXPECT_EQ(manifest["expected_output"], 13);
  EXPECT_EQ(manifest["relations"].size(), 3u);

  auto again = scratch("bundle2");
  write_bundle(again, b);
  for (auto f : {"R.rel", "S.rel", "T.rel", "query.q", "manifest.json"})
    EXPECT_EQ(read_file(dir / f), read_file(again / f)) << f;
}

TEST(Io, ChaseWitnessBundleEvaluates) {
  auto dir = scratch("witness");
  write_bundle(dir, gen_chase_witness(8));
  auto c = parse_query(read_file(dir / "query.q"));
  auto db = load_database(dir, c);
  EXPECT_EQ(head_tuples(c, oracle_join(body_join_query(c, db))).size(), 32u);
}

TEST(Io, SchemaMismatchAndMissingFiles) {
  auto dir = scratch("mismatch");
  write_bundle(dir, gen_triangle_bad(2));
  EXPECT_THROW(load_database(dir, parse_query("Q(A) :- R(A,B,C).")), SchemaMismatch);
  EXPECT_THROW(load_database(dir, parse_query("Q(A) :- U(A).")), IoError);
}
