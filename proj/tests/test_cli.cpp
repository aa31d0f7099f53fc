#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "wbc/io.hpp"

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string("\"") + WBC_CLI_PATH + "\" " + args +
                          " > cli_stdout.txt 2> cli_stderr.txt";
  const int raw = std::system(cmd.c_str());
  Run r{WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, wbc::read_text_file("cli_stdout.txt"),
        wbc::read_text_file("cli_stderr.txt")};
  return r;
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("generate then solve with each method") {
  REQUIRE(cli("generate --case 1 --N 3 --m 5 --m-prime 6 --d 2 --seed 3 --out cli_inst.json").code == 0);
  const auto inst = wbc::load_instance("cli_inst.json");
  CHECK(inst.num_distributions() == 3);

  auto r = cli("solve cli_inst.json --method oracle --out cli_sol.json");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "\"status\": \"optimal\""));
  const auto sol = wbc::parse_solution(wbc::read_text_file("cli_sol.json"));
  CHECK(sol.w.size() == 5);

  r = cli("solve cli_inst.json --method sgs --tol 1e-4 --trace cli_trace.csv --emit-plans --out cli_sol.json");
  CHECK(r.code == 0);
  CHECK(wbc::read_text_file("cli_trace.csv").rfind("iter,", 0) == 0);
  CHECK(wbc::parse_solution(wbc::read_text_file("cli_sol.json")).plans.size() == 3);

  r = cli("solve cli_inst.json --method ibp --epsilon 0.001");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "mode auto-selected: log"));
  CHECK(cli("solve cli_inst.json --method badmm --w-rule geometric --max-iter 400").code <= 2);
}

TEST_CASE("stopping at the iteration cap exits with 2") {
  REQUIRE(cli("generate --case 1 --N 2 --m 4 --m-prime 4 --seed 5 --out cli_cap.json").code == 0);
  const auto r = cli("solve cli_cap.json --method sgs --max-iter 3");
  CHECK(r.code == 2);
  CHECK(contains(r.out, "\"converged\": false"));
}

TEST_CASE("errors exit with 1 and a message") {
  auto r = cli("solve cli_inst.json --method sgs --epsilon 0.01");
  CHECK(r.code == 1);
  CHECK(contains(r.err, "option --epsilon applies to --method ibp, not sgs"));

  {
    std::ofstream bad("cli_bad.json");
    bad << "{\n  \"N\": 1,\n  \"m\": [\n";
  }
  r = cli("solve cli_bad.json");
  CHECK(r.code == 1);
  CHECK(contains(r.err, "line"));
  CHECK(contains(r.err, "column"));

  r = cli("solve missing.json");
  CHECK(r.code == 1);
  CHECK(cli("solve cli_inst.json --method simplex").code == 1);
  CHECK(cli("solve cli_inst.json --presolve --no-presolve").code == 1);
  CHECK(cli("").code == 1);
}

TEST_CASE("compare, free-support and bench") {
  auto r = cli("compare --case 1 --N 2 --m 4 --m-prime 4 --trials 2 --seed 1 --methods sgs,ibp@0.01,oracle");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "| oracle |"));
  CHECK(contains(r.out, "| ibp@0.01 |"));

  r = cli("compare cli_inst.json --methods sgs,oracle --csv cli_cmp.csv");
  CHECK(r.code == 0);
  CHECK(wbc::read_text_file("cli_cmp.csv").rfind("method,normalized_obj", 0) == 0);
  CHECK(cli("compare cli_inst.json --methods sgs,oracle --rho 1").code == 1);
  r = cli("compare cli_inst.json --methods sgs,badmm,oracle --parallel-methods");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "| badmm |"));

  r = cli("free-support cli_inst.json --inner oracle --m 3 --max-outer 4 --out cli_fs.json");
  CHECK(r.code <= 2);
  CHECK(contains(wbc::read_text_file("cli_fs.json"), "supports"));

  r = cli("bench --N 2,3 --m 3 --m-prime 3 --iterations 3 --repeats 1");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "seconds_per_iteration"));
  CHECK(contains(r.err, "per distribution"));

  for (const char* f : {"cli_inst.json", "cli_sol.json", "cli_trace.csv", "cli_cap.json", "cli_bad.json",
                        "cli_cmp.csv", "cli_fs.json", "cli_stdout.txt", "cli_stderr.txt"})
    std::remove(f);
}
