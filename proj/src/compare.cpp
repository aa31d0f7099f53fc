#include "wbc/compare.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "wbc/datagen.hpp"

namespace wbc {

std::string CompareTable::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "method,normalized_obj,feasibility,iter,time,trials,converged\n";
  for (const auto& r : rows)
    os << r.label << ',' << r.normalized_obj << ',' << r.feasibility << ',' << r.iterations << ','
       << r.seconds << ',' << r.trials << ',' << r.converged << '\n';
  return os.str();
}

std::string CompareTable::to_markdown() const {
  std::ostringstream os;
  os << "| method | normalized obj | feasibility | iter | time (s) | converged |\n";
  os << "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << r.label << " | " << std::scientific << std::setprecision(2) << r.normalized_obj
       << " | " << r.feasibility << " | " << std::defaultfloat << std::setprecision(6)
       << r.iterations << " | " << std::fixed << std::setprecision(3) << r.seconds << " | "
       << std::defaultfloat << r.converged << "/" << r.trials << " |\n";
  }
  if (!oracle_reference) os << "\nReference objective: best found (oracle size guard exceeded).\n";
  for (const auto& n : notes) os << "\n" << n << "\n";
  return os.str();
}

CompareTable compare_methods(const std::vector<BarycenterInstance>& instances,
                             const std::vector<CompareEntry>& entries, const LpOptions& lp,
                             bool parallel_methods) {
  if (instances.empty()) throw InvalidArgument("compare needs at least one instance");
  if (entries.size() < 2) throw InvalidArgument("compare needs at least two methods");
  CompareTable table;
  for (const auto& e : entries) table.rows.push_back({e.label, 0, 0, 0, 0, 0, 0});

  for (std::size_t k = 0; k < instances.size(); ++k) {
    const auto& inst = instances[k];
    std::optional<SolveOutcome> oracle;
    try {
      SolverConfig cfg;
      cfg.method = Method::Oracle;
      cfg.lp = lp;
      oracle = solve(inst, cfg);
    } catch (const SizeLimitExceeded&) {
      table.oracle_reference = false;
    }
    std::vector<SolveOutcome> outcomes(entries.size());
    detail::parallel_for(entries.size(), parallel_methods ? int(entries.size()) : 1,
                         [&](std::size_t i) {
                           const auto& e = entries[i];
                           if (e.config.method == Method::Oracle && oracle && !e.config.presolve)
                             outcomes[i] = *oracle;
                           else
                             outcomes[i] = solve(inst, e.config);
                         });
    double reference = 0;
    if (oracle) {
      reference = oracle->report.objective;
    } else {
      reference = std::numeric_limits<double>::infinity();
      for (const auto& o : outcomes) reference = std::min(reference, o.report.objective);
      table.notes.push_back("trial " + std::to_string(k) +
                            ": normalized against the best objective found");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& rep = outcomes[i].report;
      auto& row = table.rows[i];
      const double diff = std::abs(rep.objective - reference);
      row.normalized_obj += reference != 0 ? diff / std::abs(reference) : diff;
      row.feasibility += rep.residuals.eta_feas;
      row.iterations += double(rep.iterations);
      row.seconds += rep.wall_time;
      row.trials += 1;
      row.converged += rep.converged ? 1 : 0;
    }
  }
  for (auto& row : table.rows) {
    const double n = double(row.trials);
    row.normalized_obj /= n;
    row.feasibility /= n;
    row.iterations /= n;
    row.seconds /= n;
  }
  return table;
}

std::string BenchResult::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(8);
  os << "N,iterations,seconds,seconds_per_iteration\n";
  for (const auto& p : points)
    os << p.N << ',' << p.iterations << ',' << p.seconds << ',' << p.seconds_per_iteration << '\n';
  if (slope) os << "# slope," << *slope << ",intercept," << *intercept << '\n';
  return os.str();
}

std::pair<double, double> least_squares_line(const std::vector<double>& x,
                                             const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("a line fit needs at least two points");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0) throw InvalidArgument("a line fit needs distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

BenchResult bench_scaling(const std::vector<std::size_t>& Ns, std::size_t m, std::size_t m_prime,
                          std::size_t d, std::uint64_t seed, SgsOptions options,
                          std::size_t repeats) {
  if (Ns.empty()) throw InvalidArgument("bench needs at least one N");
  if (!std::is_sorted(Ns.begin(), Ns.end()) ||
      std::adjacent_find(Ns.begin(), Ns.end()) != Ns.end())
    throw InvalidArgument("bench N list must be strictly ascending");
  if (repeats == 0) throw InvalidArgument("repeats must be at least 1");
  options.tol = std::numeric_limits<double>::min();
  options.record_trace = false;

  BenchResult out;
  for (const std::size_t N : Ns) {
    const auto inst = gen_case1(N, m, m_prime, d, seed);
    BenchPoint p;
    p.N = N;
    p.seconds = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto res = solve_sgs(inst, options);
      p.iterations = res.report.iterations;
      p.seconds = std::min(p.seconds, res.report.wall_time);
    }
    p.seconds_per_iteration = p.seconds / double(std::max<std::size_t>(p.iterations, 1));
    out.points.push_back(p);
  }
  if (out.points.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& p : out.points) {
      x.push_back(double(p.N));
      y.push_back(p.seconds_per_iteration);
    }
    const auto [slope, intercept] = least_squares_line(x, y);
    out.slope = slope;
    out.intercept = intercept;
  }
  return out;
}

}  // namespace wbc
