#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include "wcoj/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

/// Runs the CLI with `args`, capturing stdout; stderr is discarded.
Result cli(const std::string& args) {
  std::string cmd = std::string(WCOJ_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("wcoj_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t rows(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n - 1;  // header
}

}  // namespace

TEST(Cli, RunTriangleBadFour) {
  auto d = dir("tbad4");
  ASSERT_EQ(cli("gen --family triangle-bad --m 4 --out " + d.string()).code, 0);
  for (auto f : {"R.rel", "S.rel", "T.rel"}) EXPECT_EQ(rows(wcoj::read_file(d / f)), 9u);
  auto r = cli("run " + (d / "query.q").string() + " " + d.string() + " --algo nprr");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(rows(r.out), 13u);
  EXPECT_EQ(r.out.rfind("# relation Q schema A,B,C\n", 0), 0u);
}

TEST(Cli, AllAlgorithmsAgreeByteForByte) {
  auto d = dir("agree");
  ASSERT_EQ(cli("gen --family clique --k 3 --N 60 --seed 4 --out " + d.string()).code, 0);
  const std::string base = "run " + (d / "query.q").string() + " " + d.string() + " --algo ";
  auto want = cli(base + "oracle");
  ASSERT_EQ(want.code, 0);
  for (auto algo : {"leapfrog", "nprr", "agm-plan", "pairwise:left", "pairwise:0", "two-choices", "delay"}) {
    auto got = cli(base + algo);
    EXPECT_EQ(got.code, 0) << algo;
    EXPECT_EQ(got.out, want.out) << algo;
  }
}

TEST(Cli, TinyTriangleHasOneTuple) {
  auto d = dir("tiny");
  wcoj::write_file(d / "q.q", "Q(A,B,C) :- R(A,B), S(B,C), T(A,C).\n");
  wcoj::write_file(d / "R.rel", "# relation R schema A,B\n1,2\n1,3\n");
  wcoj::write_file(d / "S.rel", "# relation S schema B,C\n2,5\n3,6\n");
  wcoj::write_file(d / "T.rel", "# relation T schema A,C\n1,5\n2,6\n");
  auto r = cli("run " + (d / "q.q").string() + " " + d.string() + " --algo nprr");
  EXPECT_EQ(r.out, "# relation Q schema A,B,C\n1,2,5\n");
}

TEST(Cli, StatsFile) {
  auto d = dir("stats");
  ASSERT_EQ(cli("gen --family triangle-bad --m 4 --out " + d.string()).code, 0);
  auto stats = d / "stats.csv";
  EXPECT_EQ(cli("run " + (d / "query.q").string() + " " + d.string() + " --algo pairwise:0 --out " +
                (d / "out.rel").string() + " --stats " + stats.string())
                .code,
            0);
  auto text = wcoj::read_file(stats);
  EXPECT_EQ(text.rfind("algo,rows,probes,advances,emits,recursions,intermediate_max,total_work\npairwise:0,13,", 0), 0u);
  EXPECT_EQ(rows(wcoj::read_file(d / "out.rel")), 13u);
}

TEST(Cli, ExitCodes) {
  auto d = dir("errors");
  ASSERT_EQ(cli("gen --family triangle-bad --m 2 --out " + d.string()).code, 0);
  wcoj::write_file(d / "bad.q", "Q(A) :- R(A,\n");
  wcoj::write_file(d / "arity.q", "Q(A) :- R(A,B,C).\n");
  EXPECT_EQ(cli("run " + (d / "bad.q").string() + " " + d.string()).code, 2);
  EXPECT_EQ(cli("run " + (d / "arity.q").string() + " " + d.string()).code, 3);
  EXPECT_EQ(cli("gen --family lw-bad --n 3 --N 10 --out " + d.string()).code, 4);
  EXPECT_EQ(cli("gen --family nonsense --out " + d.string()).code, 4);
  EXPECT_EQ(cli("run").code, 2);
  EXPECT_EQ(cli("bench --suite triangle-bad --ns 4,8").code, 2);
  EXPECT_EQ(cli("bound " + (d / "query.q").string() + " --sizes R=4").code, 2);
}

TEST(Cli, Bound) {
  auto d = dir("bound");
  wcoj::write_file(d / "tri.q", "Q(A,B,C) :- R(A,B), S(B,C), T(A,C).\n");
  auto r = cli("bound " + (d / "tri.q").string() + " --sizes R=16,S=16,T=16");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("cover: R=1/2, S=1/2, T=1/2"), std::string::npos);
  EXPECT_NE(r.out.find("bound: 64\n"), std::string::npos);

  wcoj::write_file(d / "lw.q", "Q(A,B,C,D) :- R(B,C,D), S(A,C,D), T(A,B,D), U(A,B,C).\n");
  EXPECT_NE(cli("bound " + (d / "lw.q").string() + " --sizes R=8,S=8,T=8,U=8").out.find("bound: 16\n"),
            std::string::npos);

  wcoj::write_file(d / "chase.q", "fd R: 1 -> 2\nQ(W,X,Y) :- R(W,X), R(W,W), S(X,Y).\n");
  EXPECT_NE(cli("bound " + (d / "chase.q").string() + " --sizes R=16,S=16").out.find("bound: 256\n"),
            std::string::npos);
  EXPECT_NE(cli("bound " + (d / "chase.q").string() + " --sizes R=16,S=16 --fds").out.find("bound: 16\n"),
            std::string::npos);
}

TEST(Cli, GenIsDeterministicAndRoundTrips) {
  auto a = dir("det_a"), b = dir("det_b");
  for (auto fam : {"clique --k 4 --N 30 --seed 2", "lw --k 3 --N 30 --seed 2", "random --seed 3 --n 3"}) {
    ASSERT_EQ(cli(std::string("gen --family ") + fam + " --out " + a.string()).code, 0);
    ASSERT_EQ(cli(std::string("gen --family ") + fam + " --out " + b.string()).code, 0);
    for (const auto& e : fs::directory_iterator(a))
      EXPECT_EQ(wcoj::read_file(e.path()), wcoj::read_file(b / e.path().filename())) << fam;
  }
  // generator formulas survive the round trip through files and the oracle
  struct Family {
    std::string args;
    std::size_t expected;
  };
  for (const auto& f : std::vector<Family>{{"triangle-bad --m 6", 19}, {"lw-bad --n 4 --N 13", 17},
                                           {"chase-witness --N 10", 50}}) {
    auto d = dir("formula");
    ASSERT_EQ(cli("gen --family " + f.args + " --out " + d.string()).code, 0);
    auto r = cli("run " + (d / "query.q").string() + " " + d.string() + " --algo oracle");
    EXPECT_EQ(rows(r.out), f.expected) << f.args;
  }
}

TEST(Cli, BenchCsvAndTimeouts) {
  auto r = cli("bench --suite triangle-bad --algos nprr,pairwise:0 --ns 8,16,32,64");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("suite,param,input_size,algo,status,rows,probes,advances,emits,intermediate_max,ops\n", 0), 0u);
  EXPECT_NE(r.out.find("\nsuite,algo,exponent,residual,points\ntriangle-bad,nprr,"), std::string::npos);
  EXPECT_NE(r.out.find("triangle-bad,64,129,pairwise:0,ok,193,"), std::string::npos);
  EXPECT_EQ(cli("bench --suite triangle-bad --algos nprr --ns 8,16,32,64").out,
            cli("bench --suite triangle-bad --algos nprr --ns 8,16,32,64").out);

  auto slow = cli("bench --suite random-equal --algos nprr --ns 1000000,2000000,3000000,4000000 --timeout-ms 50");
  EXPECT_EQ(slow.code, 0);
  EXPECT_NE(slow.out.find(",nprr,timeout,"), std::string::npos);
}
