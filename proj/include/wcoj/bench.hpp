#pragma once

// Algorithm dispatch by name, benchmark suites, and log-log exponent fits.

#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wcoj/agm.hpp"
#include "wcoj/baseline.hpp"
#include "wcoj/core.hpp"
#include "wcoj/gen.hpp"
#include "wcoj/generic_join.hpp"
#include "wcoj/triangle.hpp"

namespace wcoj {

struct ExponentFit {
  double exponent = 0;
  double intercept = 0;
  double residual = 0;  // RMS of log2 residuals
  std::size_t points = 0;
};

/// Least-squares slope of log(ops) against log(size), over the points with
/// the largest ⌈k/2⌉ sizes.
inline ExponentFit fit_exponent(std::vector<std::pair<double, double>> points) {
  std::erase_if(points, [](const auto& p) { return !(p.first > 0 && p.second > 0); });
  std::sort(points.begin(), points.end());
  if (points.size() < 2) throw ParameterError("exponent fit needs at least two positive points");
  const std::size_t keep = std::max<std::size_t>(2, (points.size() + 1) / 2);
  points.erase(points.begin(), points.end() - static_cast<std::ptrdiff_t>(keep));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    double lx = std::log2(x), ly = std::log2(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points.size());
  ExponentFit f;
  f.points = points.size();
  const double den = n * sxx - sx * sx;
  if (den == 0) throw ParameterError("exponent fit needs distinct sizes");
  f.exponent = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.exponent * sx) / n;
  double ss = 0;
  for (const auto& [x, y] : points) {
    double r = std::log2(y) - (f.intercept + f.exponent * std::log2(x));
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

struct AlgoRun {
  std::string algo;
  Relation output;
  CostMeter meter;
  std::optional<PlanTrace> trace;

  /// Operation count used for scaling fits.
  std::uint64_t ops() const { return trace ? trace->total_work : meter.total(); }
  std::uint64_t intermediate_max() const { return trace ? trace->intermediate_max() : 0; }
};

namespace detail {

/// `expr := term ('*' term)*`, `term := name | index | '(' expr ')'`, joins left-associative.
class PlanExprParser {
 public:
  PlanExprParser(const std::string& s, const JoinQuery& q) : s_(s), q_(q) {}

  PlanTree parse() {
    PlanTree p = expr();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return p;
  }

 private:
  PlanTree expr() {
    PlanTree p = term();
    for (skip(); pos_ < s_.size() && s_[pos_] == '*'; skip()) {
      ++pos_;
      p = plan_join(p, term());
    }
    return p;
  }

  PlanTree term() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      PlanTree p = expr();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return p;
    }
    std::size_t b = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    std::string name = s_.substr(b, pos_ - b);
    if (name.empty()) fail("expected a relation");
    for (std::size_t e = 0; e < q_.relation_names.size(); ++e)
      if (q_.relation_names[e] == name) return plan_leaf(e);
    if (std::all_of(name.begin(), name.end(), [](unsigned char c) { return std::isdigit(c); })) {
      std::size_t e = std::stoul(name);
      if (e < q_.num_relations()) return plan_leaf(e);
    }
    fail("unknown relation " + name);
  }

  void skip() {
    while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw PlanError("plan expression '" + s_ + "' at " + std::to_string(pos_) + ": " + what);
  }

  const std::string& s_;
  const JoinQuery& q_;
  std::size_t pos_ = 0;
};

/// Indices of the relations over {0,1}, {1,2}, {0,2}, if the query is a triangle.
inline std::array<std::size_t, 3> triangle_atoms(const JoinQuery& q) {
  if (q.num_attributes() != 3 || q.num_relations() != 3) throw SchemaMismatch("query is not a triangle");
  const Schema want[3] = {{0, 1}, {1, 2}, {0, 2}};
  std::array<std::size_t, 3> idx{};
  for (int w = 0; w < 3; ++w) {
    bool found = false;
    for (std::size_t e = 0; e < 3 && !found; ++e)
      if (q.hypergraph.edges[e] == want[w]) {
        idx[w] = e;
        found = true;
      }
    if (!found) throw SchemaMismatch("query is not a triangle");
  }
  return idx;
}

}  // namespace detail

inline PlanTree parse_plan(const std::string& spec, const JoinQuery& q) {
  if (spec == "left") return left_deep_plan(q.num_relations());
  if (spec.size() == 1 && spec[0] >= '0' && spec[0] <= '2') {
    auto idx = detail::triangle_atoms(q);
    // triangle_plans() are written over R(A,B)=0, S(B,C)=1, T(A,C)=2; remap to the query's atom order.
    std::function<PlanTree(const PlanTree&)> remap = [&](const PlanTree& p) -> PlanTree {
      if (p->kind == PlanNode::Kind::leaf) return plan_leaf(idx[p->atom], p->projection);
      return plan_join(remap(p->left), remap(p->right), p->projection);
    };
    return remap(triangle_plans()[spec[0] - '0']);
  }
  return detail::PlanExprParser(spec, q).parse();
}

inline const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"nprr",        "leapfrog", "pairwise:<plan>", "oracle",
                                              "agm-plan",    "two-choices", "delay"};
  return names;
}

/// Runs the named algorithm; output schema is 0..n-1.
inline AlgoRun run_algorithm(const std::string& algo, const JoinQuery& q, unsigned threads = 1) {
  AlgoRun r;
  r.algo = algo;
  if (algo == "nprr" || algo == "leapfrog") {
    auto cover = min_cover_lp(q).cover;
    GenericJoinOptions opt;
    opt.threads = threads;
    auto run = run_generic_join(q, algo == "nprr" ? PartitionStrategy::nprr() : leapfrog_strategy(), cover, opt);
    r.output = std::move(run.output);
    r.meter = run.meter;
  } else if (algo == "oracle") {
    r.output = oracle_join(q);
  } else if (algo == "agm-plan") {
    auto res = run_agm_plan(q);
    r.output = std::move(res.output);
    r.trace = std::move(res.trace);
  } else if (algo.rfind("pairwise:", 0) == 0) {
    auto res = execute_plan(parse_plan(algo.substr(9), q), q);
    r.output = std::move(res.output);
    r.trace = std::move(res.trace);
  } else if (algo == "two-choices" || algo == "delay") {
    auto idx = detail::triangle_atoms(q);
    const auto& R = q.relations[idx[0]];
    const auto& S = q.relations[idx[1]];
    const auto& T = q.relations[idx[2]];
    r.output = algo == "delay" ? triangle_delay(R, S, T, r.meter) : triangle_two_choices(R, S, T, r.meter);
  } else {
    throw ParameterError("unknown algorithm " + algo);
  }
  return r;
}

/// One benchmark instance: the suite's size parameter and the generated query.
inline InstanceBundle bench_instance(const std::string& suite, std::uint64_t param, std::uint64_t seed,
                                     std::uint64_t arity = 3) {
  if (suite == "triangle-bad") return gen_triangle_bad(param);
  if (suite == "lw-bad") return gen_lw_bad(arity, param);
  if (suite == "random-equal") return gen_clique_query(3, param, seed);
  throw ParameterError("unknown suite " + suite);
}

inline std::uint64_t input_size(const JoinQuery& q) {
  std::uint64_t n = 0;
  for (const auto& r : q.relations) n = std::max<std::uint64_t>(n, r.size());
  return n;
}

}  // namespace wcoj
