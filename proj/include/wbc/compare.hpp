#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wbc/solver.hpp"

namespace wbc {

struct CompareEntry {
  std::string label;
  SolverConfig config;
};

/// One table row, averaged over trials.
struct CompareRow {
  std::string label;
  double normalized_obj = 0;  // |F - F_ref| / F_ref
  double feasibility = 0;     // eta_feas
  double iterations = 0;
  double seconds = 0;
  std::size_t trials = 0;
  std::size_t converged = 0;
};

struct CompareTable {
  std::vector<CompareRow> rows;
  // False when some trial exceeded the oracle size guard and its reference
  // objective is the best objective found by the compared methods.
  bool oracle_reference = true;
  std::vector<std::string> notes;

  std::string to_csv() const;
  std::string to_markdown() const;
};

/// Runs every entry on every instance, sequentially unless
/// `parallel_methods` is set, in which case the entries of one trial run on
/// concurrent threads (timings then include contention). The reference
/// objective of a trial is the oracle's when the instance passes the size
/// guard; an "oracle" entry then reuses that solve.
CompareTable compare_methods(const std::vector<BarycenterInstance>& instances,
                             const std::vector<CompareEntry>& entries,
                             const LpOptions& lp = {}, bool parallel_methods = false);

struct BenchPoint {
  std::size_t N = 0;
  std::size_t iterations = 0;
  double seconds = 0;
  double seconds_per_iteration = 0;
};

struct BenchResult {
  std::vector<BenchPoint> points;
  // Least-squares slope of seconds_per_iteration against N; empty for a
  // single N.
  std::optional<double> slope;
  std::optional<double> intercept;

  std::string to_csv() const;
};

/// Times sGS-ADMM on Case 1 instances of each N (ascending), fixed (m, m').
/// Every point runs exactly `options.max_iter` iterations with the
/// tolerance disabled; the best of `repeats` timings is kept.
BenchResult bench_scaling(const std::vector<std::size_t>& Ns, std::size_t m,
                          std::size_t m_prime, std::size_t d, std::uint64_t seed,
                          SgsOptions options, std::size_t repeats = 3);

/// Least-squares fit y = slope * x + intercept.
std::pair<double, double> least_squares_line(const std::vector<double>& x,
                                             const std::vector<double>& y);

}  // namespace wbc
