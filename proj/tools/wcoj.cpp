// wcoj: run join queries, compute size bounds, generate instances, benchmark.

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wcoj/wcoj.hpp"

namespace {

using namespace wcoj;

enum Exit { ok = 0, failure = 1, parse = 2, schema = 3, precondition = 4 };

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, sep);)
    if (!part.empty()) out.push_back(part);
  return out;
}

std::uint64_t to_u64(const std::string& s, const std::string& what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw ParseError(1, 1, what + ": expected a nonnegative integer, got '" + s + "'");
  return std::stoull(s);
}

ConjunctiveQuery load_query(const std::string& path) {
  try {
    return parse_query(read_file(path));
  } catch (const ParseError& e) {
    std::cerr << path << ':';
    throw;
  }
}

const char* stats_header = "algo,rows,probes,advances,emits,recursions,intermediate_max,total_work";

std::string stats_row(const AlgoRun& r, std::size_t rows) {
  std::ostringstream s;
  s << r.algo << ',' << rows << ',' << r.meter.probes << ',' << r.meter.advances << ',' << r.meter.emits << ','
    << r.meter.recursions << ',' << r.intermediate_max() << ',' << r.ops();
  return s.str();
}

int cmd_run(const std::string& query_path, const std::string& data_dir, const std::string& algo,
            const std::string& out_path, const std::string& stats_path, unsigned threads) {
  ConjunctiveQuery c = load_query(query_path);
  Database db = load_database(data_dir, c);
  JoinQuery q = body_join_query(c, db);
  AlgoRun r = run_algorithm(algo, q, threads);
  auto rows = head_tuples(c, r.output);
  std::vector<std::string> cols;
  for (Var v : c.head.vars) cols.push_back(c.name(v));
  std::string text = format_tuples(c.head.symbol, cols, rows);
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    write_file(out_path, text);
  std::string stats = std::string(stats_header) + "\n" + stats_row(r, rows.size()) + "\n";
  if (stats_path.empty() || stats_path == "-")
    std::cerr << stats;
  else
    write_file(stats_path, stats);
  return ok;
}

int cmd_bound(const std::string& query_path, const std::string& sizes_arg, bool use_fds) {
  ConjunctiveQuery c = load_query(query_path);
  if (!use_fds) c.fds.clear();
  std::map<std::string, std::uint64_t> sizes;
  for (const auto& kv : split(sizes_arg, ',')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError(1, 1, "--sizes: expected name=value, got '" + kv + "'");
    sizes[kv.substr(0, eq)] = to_u64(kv.substr(eq + 1), "--sizes " + kv.substr(0, eq));
  }
  for (const auto& a : c.body)
    if (!sizes.count(a.symbol)) throw ParseError(1, 1, "--sizes: no size for relation " + a.symbol);
  ProjectedQuery p = rewrite_cq(c);
  BoundReport b = cq_bound(c, sizes);
  std::cout << "query: " << to_string(p.normalized) << "\n";
  std::cout << "cover:";
  for (std::size_t e = 0; e < b.cover.size(); ++e)
    std::cout << (e ? ", " : " ") << p.normalized.body[e].symbol << "=" << to_string(b.cover[e]);
  std::cout << "\n";
  std::cout << "rho_star_log2: " << b.log2_bound.str(12) << "\n";
  std::cout << "bound: " << b.bound.str(12) << "\n";
  return ok;
}

struct Cell {
  std::string status = "ok";
  std::uint64_t rows = 0, input = 0;
  AlgoRun run;
};

/// Runs one benchmark cell in a child process so a runaway cell can be killed.
Cell run_cell(const std::string& suite, std::uint64_t param, std::uint64_t seed, std::uint64_t arity,
              const std::string& algo, long timeout_ms) {
  int fds[2];
  if (pipe(fds) != 0) throw IoError("pipe failed");
  pid_t pid = fork();
  if (pid < 0) throw IoError("fork failed");
  if (pid == 0) {
    close(fds[0]);
    std::ostringstream s;
    try {
      auto b = bench_instance(suite, param, seed, arity);
      auto r = run_algorithm(algo, b.query);
      s << "ok " << r.output.size() << ' ' << input_size(b.query) << ' ' << r.meter.probes << ' ' << r.meter.advances
        << ' ' << r.meter.emits << ' ' << r.meter.recursions << ' ' << r.intermediate_max() << ' ' << r.ops() << '\n';
    } catch (const std::exception& e) {
      s << "error\n";
    }
    auto text = s.str();
    ssize_t w = write(fds[1], text.data(), text.size());
    (void)w;
    close(fds[1]);
    _exit(0);
  }
  close(fds[1]);
  Cell cell;
  cell.run.algo = algo;
  std::string buf;
  pollfd pfd{fds[0], POLLIN, 0};
  bool timed_out = false;
  for (;;) {
    int rc = poll(&pfd, 1, static_cast<int>(timeout_ms));
    if (rc == 0) {
      timed_out = true;
      break;
    }
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    char tmp[512];
    ssize_t n = read(fds[0], tmp, sizeof tmp);
    if (n <= 0) break;
    buf.append(tmp, static_cast<std::size_t>(n));
  }
  close(fds[0]);
  if (timed_out) kill(pid, SIGKILL);
  waitpid(pid, nullptr, 0);
  if (timed_out) {
    cell.status = "timeout";
    return cell;
  }
  std::istringstream in(buf);
  std::string status;
  in >> status;
  if (status != "ok") {
    cell.status = "error";
    return cell;
  }
  CostMeter& m = cell.run.meter;
  std::uint64_t inter = 0, ops = 0;
  in >> cell.rows >> cell.input >> m.probes >> m.advances >> m.emits >> m.recursions >> inter >> ops;
  // Carry the plan-side counters through a synthetic trace so ops() reports them.
  if (algo == "agm-plan" || algo.rfind("pairwise:", 0) == 0) {
    PlanTrace t;
    t.total_work = ops;
    t.joins.push_back(JoinTrace{});
    t.joins.back().cardinality = inter;
    cell.run.trace = t;
  }
  return cell;
}

int cmd_bench(const std::string& suite, const std::string& algos_arg, const std::string& ns_arg, std::uint64_t seed,
              std::uint64_t arity, long timeout_ms, const std::string& out_path) {
  auto algos = split(algos_arg, ',');
  std::vector<std::uint64_t> ns;
  for (const auto& s : split(ns_arg, ',')) ns.push_back(to_u64(s, "--ns"));
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.size() < 4) throw ParseError(1, 1, "--ns needs at least 4 distinct values");
  if (algos.empty()) throw ParseError(1, 1, "--algos is empty");
  for (auto n : ns) bench_instance(suite, n, seed, arity);  // precondition check before any work
  if (const char* env = std::getenv("WCOJ_BENCH_TIMEOUT_MS")) timeout_ms = static_cast<long>(to_u64(env, "WCOJ_BENCH_TIMEOUT_MS"));

  std::ostringstream csv;
  csv << "suite,param,input_size,algo,status,rows,probes,advances,emits,intermediate_max,ops\n";
  std::map<std::string, std::vector<std::pair<double, double>>> points;
  for (auto n : ns) {
    std::optional<std::uint64_t> agreed;
    for (const auto& algo : algos) {
      Cell c = run_cell(suite, n, seed, arity, algo, timeout_ms);
      csv << suite << ',' << n << ',' << c.input << ',' << algo << ',' << c.status << ',' << c.rows << ','
          << c.run.meter.probes << ',' << c.run.meter.advances << ',' << c.run.meter.emits << ','
          << c.run.intermediate_max() << ',' << c.run.ops() << '\n';
      if (c.status != "ok") continue;
      if (agreed && *agreed != c.rows)
        std::cerr << "warning: " << algo << " returned " << c.rows << " rows at " << n << ", expected " << *agreed << "\n";
      agreed = c.rows;
      if (algo != "oracle") points[algo].push_back({static_cast<double>(c.input), static_cast<double>(c.run.ops())});
    }
  }
  csv << "\nsuite,algo,exponent,residual,points\n";
  for (const auto& algo : algos) {
    auto it = points.find(algo);
    if (it == points.end() || it->second.size() < 2) continue;
    ExponentFit f = fit_exponent(it->second);
    csv << suite << ',' << algo << ',' << f.exponent << ',' << f.residual << ',' << f.points << '\n';
  }
  if (out_path.empty() || out_path == "-")
    std::cout << csv.str();
  else
    write_file(out_path, csv.str());
  return ok;
}

struct GenArgs {
  std::string family, out;
  std::uint64_t m = 4, n = 3, N = 9, k = 3, seed = 1, domain = 0, relations = 3, size = 10;
};

int cmd_gen(const GenArgs& a) {
  InstanceBundle b;
  if (a.family == "triangle-bad")
    b = gen_triangle_bad(a.m);
  else if (a.family == "lw-bad")
    b = gen_lw_bad(a.n, a.N);
  else if (a.family == "clique")
    b = gen_clique_query(a.k, a.N, a.seed, a.domain ? std::optional(a.domain) : std::nullopt);
  else if (a.family == "lw")
    b = gen_lw_query(a.k, a.N, a.seed, a.domain ? std::optional(a.domain) : std::nullopt);
  else if (a.family == "chase-witness")
    b = gen_chase_witness(a.N);
  else if (a.family == "random")
    b = gen_random({a.seed, a.n, a.relations, {a.size}, a.domain ? a.domain : 16, std::nullopt});
  else
    throw ParameterError("unknown family " + a.family);
  write_bundle(a.out, b);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case optimal joins: run, bound, generate, benchmark"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "evaluate a query over a data directory");
  std::string query_path, data_dir, algo = "nprr", out_path, stats_path;
  unsigned threads = 1;
  run->add_option("query", query_path, "query file")->required();
  run->add_option("datadir", data_dir, "directory of <relation>.rel files")->required();
  run->add_option("--algo", algo,
                  "nprr | leapfrog | pairwise:<0|1|2|left|expr> | oracle | agm-plan | two-choices | delay");
  run->add_option("--out", out_path, "output file (default stdout)");
  run->add_option("--stats", stats_path, "stats CSV file (default stderr)");
  run->add_option("--threads", threads, "workers for nprr/leapfrog");

  auto* bound = app.add_subcommand("bound", "optimal fractional cover and output size bound");
  std::string bound_query, sizes;
  bool fds = false;
  bound->add_option("query", bound_query, "query file")->required();
  bound->add_option("--sizes", sizes, "relation sizes, e.g. R=16,S=16,T=16")->required();
  bound->add_flag("--fds", fds, "apply the query's functional dependencies");

  auto* bench = app.add_subcommand("bench", "scaling benchmark with exponent fits");
  std::string suite, algos = "nprr,leapfrog", ns, bench_out;
  std::uint64_t seed = 1, arity = 3;
  long timeout_ms = 60000;
  bench->add_option("--suite", suite, "triangle-bad | lw-bad | random-equal")->required();
  bench->add_option("--algos", algos, "comma-separated algorithms");
  bench->add_option("--ns", ns, "size parameters: m (triangle-bad), N (lw-bad, random-equal)")->required();
  bench->add_option("--seed", seed, "random seed");
  bench->add_option("--n", arity, "number of attributes for lw-bad");
  bench->add_option("--timeout-ms", timeout_ms, "per-cell timeout (env WCOJ_BENCH_TIMEOUT_MS overrides)");
  bench->add_option("--out", bench_out, "CSV file (default stdout)");

  auto* gen = app.add_subcommand("gen", "write a generated instance");
  GenArgs g;
  gen->add_option("--family", g.family, "triangle-bad | lw-bad | clique | lw | chase-witness | random")->required();
  gen->add_option("--out", g.out, "output directory")->required();
  gen->add_option("--m", g.m, "triangle-bad size");
  gen->add_option("--n", g.n, "attributes (lw-bad, random)");
  gen->add_option("--N", g.N, "relation size");
  gen->add_option("--k", g.k, "clique / Loomis-Whitney order");
  gen->add_option("--seed", g.seed, "random seed");
  gen->add_option("--domain", g.domain, "value domain size (0 = family default)");
  gen->add_option("--relations", g.relations, "relations (random)");
  gen->add_option("--size", g.size, "tuples per relation (random)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return parse;
  }

  try {
    if (*run) return cmd_run(query_path, data_dir, algo, out_path, stats_path, threads);
    if (*bound) return cmd_bound(bound_query, sizes, fds);
    if (*bench) return cmd_bench(suite, algos, ns, seed, arity, timeout_ms, bench_out);
    if (*gen) return cmd_gen(g);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return parse;
  } catch (const PlanError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return parse;
  } catch (const SchemaMismatch& e) {
    std::cerr << "schema mismatch: " << e.what() << "\n";
    return schema;
  } catch (const ParameterError& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return precondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failure;
  }
  return failure;
}
