// Command-line front end. Talks to the solver only through the C API.
//
// Exit codes:
//   0  success (solve/free-support: converged)
//   1  error (bad arguments, unreadable or invalid input, numerical failure)
//   2  solve/free-support stopped at the iteration cap

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wbc/wbc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCap = 2;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(wbc_status status) {
  if (status != WBC_OK)
    throw Failure(std::string(wbc_status_name(status)) + ": " + wbc_last_error());
}

struct InstanceDeleter {
  void operator()(wbc_instance* p) const { wbc_instance_free(p); }
};
struct OptionsDeleter {
  void operator()(wbc_options* p) const { wbc_options_free(p); }
};
struct ResultDeleter {
  void operator()(wbc_result* p) const { wbc_result_free(p); }
};
using Instance = std::unique_ptr<wbc_instance, InstanceDeleter>;
using Options = std::unique_ptr<wbc_options, OptionsDeleter>;
using Result = std::unique_ptr<wbc_result, ResultDeleter>;

// Takes ownership of a library-allocated string.
std::string take(char* s) {
  std::string out = s ? s : "";
  wbc_string_free(s);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure("cannot open '" + path + "' for writing");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw Failure("failed writing '" + path + "'");
}

// Writes to `path`, or to stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_file(path, text);
  }
}

void require_distinct(const std::vector<std::string>& paths) {
  std::set<std::string> seen;
  for (const auto& p : paths) {
    if (p.empty() || p == "-") continue;
    const auto key = std::filesystem::weakly_canonical(p).string();
    if (!seen.insert(key).second) throw Failure("output path '" + p + "' is used twice");
  }
}

std::string number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

Instance load(const std::string& path) {
  wbc_instance* raw = nullptr;
  check(wbc_instance_load(path.c_str(), &raw));
  return Instance(raw);
}

// ---------------------------------------------------------------------------
// Solver flags shared by solve, compare and free-support.

struct SolverFlags {
  int threads = 0;
  double tol = 0;
  std::size_t max_iter = 0;
  double beta0 = 0, tau = 0, epsilon = 0, rho = 0;
  std::string ibp_mode, ibp_init, w_rule;
  bool presolve = false, no_presolve = false;
  std::map<std::string, CLI::Option*> given;

  void add(CLI::App* app) {
    given["threads"] = app->add_option("--threads", threads,
                                       "Thread budget (overrides WBC_THREADS)");
    given["tol"] = app->add_option("--tol", tol, "Stopping tolerance");
    given["max_iter"] = app->add_option("--max-iter", max_iter, "Iteration cap");
    given["beta0"] = app->add_option("--beta0", beta0, "Initial penalty (sgs)");
    given["tau"] = app->add_option("--tau", tau, "Dual step length (sgs)");
    given["epsilon"] = app->add_option("--epsilon", epsilon, "Entropic regularization (ibp)");
    given["ibp_mode"] = app->add_option("--ibp-mode", ibp_mode, "auto, standard or log (ibp)")
                            ->check(CLI::IsMember({"auto", "standard", "log"}));
    given["ibp_init"] = app->add_option("--ibp-init", ibp_init, "projected or uniform start (ibp)")
                            ->check(CLI::IsMember({"projected", "uniform"}));
    given["rho"] = app->add_option("--rho", rho, "Penalty (badmm)");
    given["w_rule"] = app->add_option("--w-rule", w_rule, "R1, R2 or geometric (badmm)")
                          ->check(CLI::IsMember({"R1", "R2", "geometric"}));
    auto* on = app->add_flag("--presolve", presolve, "Remove zero-weight columns first");
    auto* off = app->add_flag("--no-presolve", no_presolve, "Solve the instance as given");
    on->excludes(off);
  }

  bool has(const std::string& key) const {
    const auto it = given.find(key);
    return it != given.end() && it->second->count() > 0;
  }

  // Thread count: flag, then WBC_THREADS, then 1.
  int thread_budget() const {
    if (has("threads")) return threads;
    if (const char* env = std::getenv("WBC_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 1)
        throw Failure(std::string("WBC_THREADS must be a positive integer, got '") + env + "'");
      return int(v);
    }
    return 1;
  }
};

void set(wbc_options* o, const char* key, const std::string& value) {
  check(wbc_options_set(o, key, value.c_str()));
}

// Builds options for `method`. Method-specific flags are applied to every
// method when `strict`, so a mismatch is reported; otherwise only to the
// methods they belong to.
Options make_options(const std::string& method, const SolverFlags& f, bool strict,
                     bool trace = false) {
  wbc_options* raw = nullptr;
  check(wbc_options_create(method.c_str(), &raw));
  Options o(raw);
  set(o.get(), "threads", std::to_string(f.thread_budget()));
  set(o.get(), "trace", trace ? "1" : "0");
  if (f.has("tol")) set(o.get(), "tol", number(f.tol));
  if (f.has("max_iter")) set(o.get(), "max_iter", std::to_string(f.max_iter));
  const bool presolve =
      f.presolve || (!f.no_presolve && (method == "ibp" || method == "badmm"));
  set(o.get(), "presolve", presolve ? "1" : "0");

  struct Specific {
    const char* flag;
    const char* key;
    const char* owner;
    std::string value;
  };
  const std::vector<Specific> specific = {
      {"beta0", "beta0", "sgs", number(f.beta0)},
      {"tau", "tau", "sgs", number(f.tau)},
      {"epsilon", "epsilon", "ibp", number(f.epsilon)},
      {"ibp_mode", "ibp_mode", "ibp", f.ibp_mode},
      {"ibp_init", "ibp_init", "ibp", f.ibp_init},
      {"rho", "rho", "badmm", number(f.rho)},
      {"w_rule", "w_rule", "badmm", f.w_rule},
  };
  for (const auto& s : specific) {
    if (!f.has(s.flag)) continue;
    if (!strict && method != s.owner) continue;
    if (method != s.owner)
      throw Failure(std::string("option --") + f.given.at(s.flag)->get_name().substr(2) +
                    " applies to --method " + s.owner + ", not " + method);
    set(o.get(), s.key, s.value);
  }
  return o;
}

void print_summary(const wbc_result* res, const char* label) {
  wbc_summary s{};
  check(wbc_result_summary(res, &s));
  std::fprintf(stderr, "%s: %s after %zu iterations, objective %.10g, feasibility %.3e, %.3f s\n",
               label, s.converged ? "converged" : "stopped at cap", s.iterations, s.objective,
               s.eta_feas, s.wall_time);
}

// ---------------------------------------------------------------------------
// Subcommands.

struct GenerateArgs {
  std::string kind = "1";
  wbc_generate_params params{20, 50, 50, 2, 0.2, 100, 1};
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  wbc_instance* raw = nullptr;
  check(wbc_instance_generate(a.kind.c_str(), &a.params, &raw));
  Instance inst(raw);
  char* json = nullptr;
  check(wbc_instance_to_json(inst.get(), -1, &json));
  emit(a.out, take(json));
  return kExitOk;
}

struct SolveArgs {
  std::string instance;
  std::string method = "sgs";
  SolverFlags flags;
  std::string out, report, trace;
  bool emit_plans = false;
};

int run_solve(const SolveArgs& a) {
  require_distinct({a.instance, a.out, a.report, a.trace});
  Options opts = make_options(a.method, a.flags, true, !a.trace.empty());
  Instance inst = load(a.instance);
  wbc_result* raw = nullptr;
  check(wbc_solve(inst.get(), opts.get(), &raw));
  Result res(raw);

  char* text = nullptr;
  check(wbc_result_solution_json(res.get(), a.emit_plans ? 1 : 0, &text));
  const std::string solution = take(text);
  check(wbc_result_report_json(res.get(), &text));
  const std::string report = take(text);
  if (!a.out.empty()) write_file(a.out, solution);
  emit(a.report, report);
  if (!a.trace.empty()) {
    check(wbc_result_trace_csv(res.get(), &text));
    write_file(a.trace, take(text));
  }
  print_summary(res.get(), a.method.c_str());
  wbc_summary s{};
  check(wbc_result_summary(res.get(), &s));
  return s.converged ? kExitOk : kExitCap;
}

struct CompareArgs {
  std::vector<std::string> instances;
  std::string methods = "sgs,ibp@0.1,ibp@0.01,ibp@0.001,badmm,oracle";
  std::string kind = "1";
  wbc_generate_params params{20, 50, 50, 2, 0.2, 100, 1};
  std::size_t trials = 1;
  bool parallel_methods = false;
  SolverFlags flags;
  std::string csv, markdown;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

int run_compare(const CompareArgs& a) {
  require_distinct({a.csv, a.markdown});
  std::vector<Instance> instances;
  if (!a.instances.empty()) {
    for (const auto& path : a.instances) instances.push_back(load(path));
  } else {
    if (a.trials == 0) throw Failure("--trials must be at least 1");
    for (std::size_t k = 0; k < a.trials; ++k) {
      wbc_generate_params p = a.params;
      p.seed = a.params.seed + k;
      wbc_instance* raw = nullptr;
      check(wbc_instance_generate(a.kind.c_str(), &p, &raw));
      instances.emplace_back(raw);
    }
  }

  // "ibp@0.01" selects ibp with that epsilon.
  std::vector<Options> options;
  std::vector<std::string> labels;
  for (const auto& spec : split(a.methods, ',')) {
    const auto at = spec.find('@');
    const std::string method = spec.substr(0, at);
    Options o = make_options(method, a.flags, false);
    if (at != std::string::npos) {
      if (method != "ibp") throw Failure("'" + spec + "': only ibp takes an @epsilon suffix");
      set(o.get(), "epsilon", spec.substr(at + 1));
    }
    options.push_back(std::move(o));
    labels.push_back(spec);
  }
  for (const char* flag : {"beta0", "tau", "epsilon", "ibp_mode", "ibp_init", "rho", "w_rule"}) {
    static const std::map<std::string, std::string> owner = {
        {"beta0", "sgs"}, {"tau", "sgs"},   {"epsilon", "ibp"},
        {"ibp_mode", "ibp"}, {"ibp_init", "ibp"}, {"rho", "badmm"}, {"w_rule", "badmm"}};
    if (!a.flags.has(flag)) continue;
    bool used = false;
    for (const auto& l : labels) used |= l.substr(0, l.find('@')) == owner.at(flag);
    if (!used)
      throw Failure(std::string("option ") + a.flags.given.at(flag)->get_name() +
                    " applies to " + owner.at(flag) + ", which is not compared");
  }

  std::vector<const wbc_instance*> inst_ptrs;
  for (const auto& i : instances) inst_ptrs.push_back(i.get());
  std::vector<const wbc_options*> opt_ptrs;
  std::vector<const char*> label_ptrs;
  for (std::size_t k = 0; k < options.size(); ++k) {
    opt_ptrs.push_back(options[k].get());
    label_ptrs.push_back(labels[k].c_str());
  }
  char* csv = nullptr;
  char* md = nullptr;
  check(wbc_compare(inst_ptrs.data(), inst_ptrs.size(), opt_ptrs.data(), label_ptrs.data(),
                    opt_ptrs.size(), a.parallel_methods ? 1 : 0, &csv, &md));
  const std::string csv_text = take(csv);
  const std::string md_text = take(md);
  if (!a.csv.empty()) write_file(a.csv, csv_text);
  if (!a.markdown.empty()) write_file(a.markdown, md_text);
  if (a.csv.empty() && a.markdown.empty()) std::cout << md_text;
  return kExitOk;
}

struct FreeSupportArgs {
  std::string instance;
  std::string inner = "sgs";
  std::size_t m = 1;
  std::uint64_t seed = 1;
  double outer_tol = 1e-5;
  std::size_t max_outer = 100;
  std::size_t inner_max_iter = 0;
  bool cold = false;
  SolverFlags flags;
  std::string out, report, trace;
};

int run_free_support(const FreeSupportArgs& a) {
  require_distinct({a.instance, a.out, a.report, a.trace});
  Options opts = make_options(a.inner, a.flags, true, !a.trace.empty());
  set(opts.get(), "m", std::to_string(a.m));
  set(opts.get(), "seed", std::to_string(a.seed));
  set(opts.get(), "outer_tol", number(a.outer_tol));
  set(opts.get(), "max_outer", std::to_string(a.max_outer));
  if (a.inner_max_iter > 0) set(opts.get(), "inner_max_iter", std::to_string(a.inner_max_iter));
  set(opts.get(), "warm_start", a.cold ? "0" : "1");
  Instance inst = load(a.instance);
  wbc_result* raw = nullptr;
  check(wbc_free_support(inst.get(), opts.get(), &raw));
  Result res(raw);

  char* text = nullptr;
  check(wbc_result_solution_json(res.get(), 0, &text));
  const std::string bary = take(text);
  check(wbc_result_report_json(res.get(), &text));
  const std::string report = take(text);
  if (!a.out.empty()) write_file(a.out, bary);
  emit(a.report, report);
  if (!a.trace.empty()) {
    check(wbc_result_trace_csv(res.get(), &text));
    write_file(a.trace, take(text));
  }
  print_summary(res.get(), "free-support");
  wbc_summary s{};
  check(wbc_result_summary(res.get(), &s));
  return s.converged ? kExitOk : kExitCap;
}

struct BenchArgs {
  std::vector<std::size_t> Ns{50, 100, 200};
  std::size_t m = 20, m_prime = 10, d = 2;
  std::uint64_t seed = 1;
  std::size_t iterations = 200;
  std::size_t repeats = 3;
  SolverFlags flags;
  std::string out;
};

int run_bench(const BenchArgs& a) {
  Options opts = make_options("sgs", a.flags, true);
  set(opts.get(), "max_iter", std::to_string(a.iterations));
  char* csv = nullptr;
  double slope = 0;
  check(wbc_bench_scaling(a.Ns.data(), a.Ns.size(), a.m, a.m_prime, a.d, a.seed, opts.get(),
                          a.repeats, &csv, &slope));
  emit(a.out, take(csv));
  if (std::isfinite(slope))
    std::fprintf(stderr, "time per iteration grows by %.3e s per distribution\n", slope);
  else
    std::fprintf(stderr, "single N: no slope\n");
  return kExitOk;
}

void add_size_flags(CLI::App* app, std::string& kind, wbc_generate_params& p) {
  app->add_option("--case", kind, "Instance family: 1, 2, 3 or gauss-pair")
      ->check(CLI::IsMember({"1", "2", "3", "gauss-pair"}));
  app->add_option("--N", p.N, "Number of input distributions");
  app->add_option("--m", p.m, "Barycenter support size");
  app->add_option("--m-prime", p.m_prime, "Support size of each input distribution");
  app->add_option("--d", p.d, "Dimension of the support points");
  app->add_option("--sparsity", p.sparsity, "Fraction of nonzero weights (case 2)");
  app->add_option("--n", p.n, "Grid size (gauss-pair)");
  app->add_option("--seed", p.seed, "Random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein barycenters of discrete distributions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(wbc_version()));

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a random instance as JSON");
  add_size_flags(generate, gen.kind, gen.params);
  generate->add_option("--out", gen.out, "Output path (stdout when omitted)");

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "Solve a fixed-support instance");
  solve->add_option("instance", sol.instance, "Instance JSON")->required();
  solve->add_option("--method", sol.method, "sgs, ibp, badmm or oracle")
      ->check(CLI::IsMember({"sgs", "ibp", "badmm", "oracle"}));
  sol.flags.add(solve);
  solve->add_option("--out", sol.out, "Solution JSON path");
  solve->add_option("--report", sol.report, "Report JSON path (stdout when omitted)");
  solve->add_option("--trace", sol.trace, "Convergence trace CSV path");
  solve->add_flag("--emit-plans", sol.emit_plans, "Include the transport plans in the solution");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Tabulate several methods against the oracle");
  compare->add_option("instances", cmp.instances, "Instance files (generated when omitted)");
  compare->add_option("--methods", cmp.methods,
                      "Comma-separated methods; ibp@EPS sets epsilon per entry");
  add_size_flags(compare, cmp.kind, cmp.params);
  compare->add_option("--trials", cmp.trials, "Generated instances, seeds seed, seed+1, ...");
  compare->add_flag("--parallel-methods", cmp.parallel_methods,
                    "Run the methods of a trial concurrently (timings include contention)");
  cmp.flags.add(compare);
  compare->add_option("--out,--csv", cmp.csv, "CSV table path");
  compare->add_option("--markdown", cmp.markdown, "Markdown table path");

  FreeSupportArgs fs;
  auto* free_support =
      app.add_subcommand("free-support", "Optimize barycenter weights and support points");
  free_support->add_option("instance", fs.instance, "Instance JSON with support points")
      ->required();
  free_support->add_option("--inner", fs.inner, "Inner solver: sgs, badmm, ibp or oracle")
      ->check(CLI::IsMember({"sgs", "ibp", "badmm", "oracle"}));
  free_support->add_option("--m", fs.m, "Number of barycenter support points");
  free_support->add_option("--seed", fs.seed, "Seed of the k-means initialization");
  free_support->add_option("--outer-tol", fs.outer_tol, "Relative objective change to stop");
  free_support->add_option("--max-outer", fs.max_outer, "Cap on support updates");
  free_support->add_option("--inner-max-iter", fs.inner_max_iter, "Inner iteration cap");
  free_support->add_flag("--cold-start", fs.cold, "Restart the inner solver every round");
  fs.flags.add(free_support);
  free_support->add_option("--out", fs.out, "Barycenter JSON path");
  free_support->add_option("--report", fs.report, "Report JSON path (stdout when omitted)");
  free_support->add_option("--trace", fs.trace, "Outer-loop trace CSV path");

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "Time sGS-ADMM iterations against N");
  bench->add_option("--N", bn.Ns, "Ascending list of N")->delimiter(',');
  bench->add_option("--m", bn.m, "Barycenter support size");
  bench->add_option("--m-prime", bn.m_prime, "Input support size");
  bench->add_option("--d", bn.d, "Dimension");
  bench->add_option("--seed", bn.seed, "Random seed");
  bench->add_option("--iterations", bn.iterations, "Iterations timed per N");
  bench->add_option("--repeats", bn.repeats, "Timings per N; the best is kept");
  bn.flags.given["threads"] =
      bench->add_option("--threads", bn.flags.threads, "Thread budget (overrides WBC_THREADS)");
  bench->add_option("--out", bn.out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*solve) return run_solve(sol);
    if (*compare) return run_compare(cmp);
    if (*free_support) return run_free_support(fs);
    if (*bench) return run_bench(bn);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
