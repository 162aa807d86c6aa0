#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wcoj/baseline.hpp"
#include "wcoj/gen.hpp"

using namespace wcoj;

namespace {

std::uint64_t double_factorial(std::uint64_t k) { return k <= 1 ? 1 : k * double_factorial(k - 2); }

void leaves(const PlanTree& p, std::multiset<std::size_t>& out) {
  if (p->kind == PlanNode::Kind::leaf) {
    out.insert(p->atom);
    return;
  }
  leaves(p->left, out);
  leaves(p->right, out);
}

}  // namespace

TEST(Plans, CountIsDoubleFactorial) {
  for (std::size_t m = 1; m <= 5; ++m) {
    auto plans = all_join_plans(m);
    EXPECT_EQ(plans.size(), m == 1 ? 1 : double_factorial(2 * m - 3)) << "m=" << m;
    std::multiset<std::size_t> every;
    for (std::size_t i = 0; i < m; ++i) every.insert(i);
    std::set<std::string> distinct;
    for (const auto& p : plans) {
      distinct.insert(to_string(p));
      std::multiset<std::size_t> got;
      leaves(p, got);
      EXPECT_EQ(got, every);
    }
    EXPECT_EQ(distinct.size(), plans.size());
  }
}

TEST(Plans, TrianglePlansOnTriangleBadFour) {
  auto q = gen_triangle_bad(4).query;
  auto want = oracle::brute_join(q);
  for (const auto& p : triangle_plans()) {
    auto r = execute_plan(p, q);
    EXPECT_EQ(oracle::as_set(r.output), want) << to_string(p, q.relation_names);
    ASSERT_EQ(r.trace.joins.size(), 2u);
    // first join: two stars sharing the hub attribute, (m+1)^2 + m tuples
    EXPECT_EQ(r.trace.intermediate_max(), 29u);
    EXPECT_EQ(r.trace.joins.front().cardinality, 13u);  // root, preorder id 0
  }
}

TEST(Plans, IntermediateIsQuadraticOnTriangleBad) {
  for (std::uint64_t m : {16, 64, 256}) {
    auto q = gen_triangle_bad(m).query;
    for (const auto& p : triangle_plans()) {
      auto r = execute_plan(p, q);
      EXPECT_GE(r.trace.intermediate_max(), m * m);
      EXPECT_EQ(r.output.size(), 3 * m + 1);
    }
  }
}

TEST(Plans, EveryShapeMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    auto q = oracle::random_instance(seed);
    auto want = oracle::brute_join(q);
    for (const auto& p : all_join_plans(q.num_relations())) {
      auto r = execute_plan(p, q);
      EXPECT_EQ(oracle::as_set(r.output), want) << "seed " << seed << " " << to_string(p);
    }
    EXPECT_EQ(oracle::as_set(agm_join_project(q)), want) << "seed " << seed;
  }
}

TEST(Plans, TraceAccountsForEveryJoin) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto q = oracle::random_instance(seed);
    if (q.num_relations() < 2) continue;
    std::uint64_t seen = 0, work = 0;
    PlanOptions opt;
    opt.on_join = [&](const Relation& l, const Relation& r, std::uint64_t card) {
      ++seen;
      EXPECT_EQ(natural_join(l, r).size(), card);
      work += l.size() + r.size() + card;
    };
    auto res = execute_plan(left_deep_plan(q.num_relations()), q, opt);
    EXPECT_EQ(seen, q.num_relations() - 1);
    EXPECT_EQ(res.trace.joins.size(), seen);
    EXPECT_EQ(res.trace.total_work, work);
  }
}

TEST(Plans, ProjectionsAreApplied) {
  auto q = gen_triangle_bad(3).query;
  auto p = plan_join(plan_leaf(0, Schema{0}), plan_leaf(2), Schema{0, 2});
  auto r = execute_plan(p, q);
  EXPECT_EQ(r.output.schema(), (Schema{0, 2}));
  EXPECT_EQ(oracle::as_set(r.output), oracle::as_set(q.relations[2]));
}

TEST(Plans, RejectsMalformedPlans) {
  auto q = gen_triangle_bad(2).query;
  EXPECT_THROW(execute_plan(plan_leaf(7), q), PlanError);
  EXPECT_THROW(execute_plan(plan_leaf(0, Schema{2}), q), PlanError);
  EXPECT_THROW(execute_plan(plan_join(plan_leaf(0), plan_leaf(1), Schema{5}), q), PlanError);
}

TEST(AgmPlan, SimpleRelationJoinsAreLarge) {
  // every join of two simple relations on incomparable schemas is at least (1+d)^2
  for (std::uint64_t n : {3, 4}) {
    const std::uint64_t d = 8, N = d * (n - 1) + 1;
    auto q = gen_lw_bad(n, N).query;
    PlanOptions opt;
    std::uint64_t checked = 0;
    opt.on_join = [&](const Relation& l, const Relation& r, std::uint64_t card) {
      const auto& a = l.schema();
      const auto& b = r.schema();
      bool incomparable = !std::includes(a.begin(), a.end(), b.begin(), b.end()) &&
                          !std::includes(b.begin(), b.end(), a.begin(), a.end());
      if (incomparable && is_simple(l, d) && is_simple(r, d)) {
        ++checked;
        EXPECT_GE(card, (1 + d) * (1 + d));
      }
    };
    for (const auto& p : all_join_plans(q.num_relations())) {
      auto res = execute_plan(p, q, opt);
      EXPECT_EQ(res.output.size(), N + d);
    }
    EXPECT_GT(checked, 0u);
  }
}
