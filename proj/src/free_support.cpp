#include "wbc/free_support.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "wbc/kmeans.hpp"

namespace wbc {

namespace {

using Clock = std::chrono::steady_clock;

Vector resolve_gammas(const Vector& gammas, std::size_t N) {
  if (gammas.size() == 0) return Vector::Constant(static_cast<Eigen::Index>(N), 1.0 / double(N));
  if (static_cast<std::size_t>(gammas.size()) != N)
    throw ShapeMismatch("gamma count does not match the distribution count");
  return gammas;
}

}  // namespace

void FreeSupportOptions::validate() const {
  if (m == 0) throw InvalidArgument("free support needs m >= 1");
  if (!(tol > 0)) throw InvalidArgument("tol must be positive");
  if (max_outer == 0) throw InvalidArgument("max_outer must be at least 1");
  if (inner_max_iter && *inner_max_iter == 0)
    throw InvalidArgument("inner max_iter must be at least 1");
  if (initial_supports && static_cast<std::size_t>(initial_supports->cols()) != m)
    throw ShapeMismatch("initial supports must have m columns");
}

std::size_t default_inner_max_iter(const SolverConfig& inner) {
  switch (inner.method) {
    case Method::Sgs:
    case Method::Badmm: return 10;
    case Method::Ibp: return inner.ibp.epsilon <= 1e-3 ? 1000 : 100;
    case Method::Oracle: return 0;
  }
  return 10;
}

Matrix init_supports_kmeans(const std::vector<DiscreteDistribution>& distributions,
                            std::size_t m, std::uint64_t seed) {
  if (distributions.empty()) throw InvalidArgument("no distributions given");
  Eigen::Index total = 0;
  for (const auto& d : distributions) total += d.supports.cols();
  if (static_cast<std::size_t>(total) < m)
    throw InvalidArgument("support pool has " + std::to_string(total) + " points, fewer than m = " +
                          std::to_string(m));
  Matrix pool(distributions.front().supports.rows(), total);
  Eigen::Index col = 0;
  for (const auto& d : distributions) {
    if (d.supports.rows() != pool.rows()) throw ShapeMismatch("support dimension mismatch");
    pool.middleCols(col, d.supports.cols()) = d.supports;
    col += d.supports.cols();
  }
  return kmeans(pool, m, seed);
}

Matrix update_supports(const MatrixList& plans,
                       const std::vector<DiscreteDistribution>& distributions,
                       const Vector& gammas, const Matrix& previous,
                       std::vector<std::size_t>* stalled) {
  if (plans.size() != distributions.size())
    throw ShapeMismatch("plan count does not match the distribution count");
  const Vector g = resolve_gammas(gammas, distributions.size());
  Matrix num = Matrix::Zero(previous.rows(), previous.cols());
  Vector mass = Vector::Zero(previous.cols());
  for (std::size_t t = 0; t < plans.size(); ++t) {
    const Matrix& P = plans[t];
    const Matrix& Q = distributions[t].supports;
    if (P.rows() != previous.cols() || P.cols() != Q.cols() || Q.rows() != previous.rows())
      throw ShapeMismatch("plan " + std::to_string(t) + " does not match the supports");
    const double gt = g[Eigen::Index(t)];
    num.noalias() += gt * Q * P.transpose();
    mass += gt * P.rowwise().sum();
  }
  Matrix X = previous;
  if (stalled) stalled->clear();
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    if (mass[i] > 0) {
      X.col(i) = num.col(i) / mass[i];
    } else if (stalled) {
      stalled->push_back(static_cast<std::size_t>(i));
    }
  }
  return X;
}

FreeSupportResult solve_free(const std::vector<DiscreteDistribution>& distributions,
                             const Vector& gammas, const FreeSupportOptions& options) {
  options.validate();
  if (distributions.empty()) throw InvalidArgument("no distributions given");
  const auto start = Clock::now();
  const Vector g = resolve_gammas(gammas, distributions.size());

  SolverConfig inner = options.inner;
  const std::size_t cap = options.inner_max_iter.value_or(default_inner_max_iter(inner));
  if (cap > 0) {
    inner.sgs.max_iter = cap;
    inner.badmm.max_iter = cap;
    inner.ibp.max_iter = cap;
  }
  inner.sgs.record_trace = inner.badmm.record_trace = inner.ibp.record_trace = false;

  FreeSupportResult result;
  SolveReport& report = result.report;
  report.method = std::string("free-support/") + to_string(inner.method);
  report.trace.columns = {"outer", "objective", "relative_change", "inner_iterations", "elapsed"};
  if (options.warm_start && inner.method == Method::Ibp)
    report.notes.push_back("ibp inner solves start cold (no warm start for ibp)");

  Matrix X = options.initial_supports ? *options.initial_supports
                                      : init_supports_kmeans(distributions, options.m, options.seed);
  WarmStart warm;
  SolveOutcome last;
  bool converged = false;
  std::size_t outer = 0;
  double previous = 0;
  while (outer < options.max_outer) {
    ++outer;
    const auto instance = BarycenterInstance::from_distributions(distributions, X, 2.0, g);
    try {
      last = solve(instance, inner, options.warm_start ? &warm : nullptr);
    } catch (const Error& e) {
      throw Error("free support, outer iteration " + std::to_string(outer) + ": " + e.what());
    }
    if (options.warm_start) warm = last.state;
    X = update_supports(last.primal.plans, distributions, g, X, &result.stalled_rows);
    const auto moved = BarycenterInstance::from_distributions(distributions, X, 2.0, g);
    const double objective = primal_objective(moved, last.primal.plans);
    result.objectives.push_back(objective);
    double change = 0;
    if (outer > 1) {
      const double diff = std::abs(objective - previous);
      change = diff == 0 ? 0 : diff / std::abs(previous);
    }
    report.trace.add({double(outer), objective, outer > 1 ? change : std::nan(""),
                      double(last.report.iterations),
                      std::chrono::duration<double>(Clock::now() - start).count()});
    if (outer > 1 && change < options.tol) {
      converged = true;
      break;
    }
    previous = objective;
  }

  const auto final_instance = BarycenterInstance::from_distributions(distributions, X, 2.0, g);
  // Inexact inner solves leave w slightly off the simplex; the returned
  // distribution is its clipped, renormalized version.
  Vector w = last.primal.w.cwiseMax(0.0);
  if (!(w.sum() > 0)) throw NumericalInstability("free support: barycenter weights vanished");
  result.barycenter.weights = w / w.sum();
  result.barycenter.supports = X;
  result.plans = last.primal.plans;
  report.residuals = primal_residuals(final_instance, last.primal);
  report.termination_residuals = report.residuals;
  report.objective = result.objectives.back();
  report.iterations = outer;
  report.converged = converged;
  report.status = converged ? "converged" : "max_iter";
  if (!result.stalled_rows.empty()) {
    std::ostringstream os;
    os << result.stalled_rows.size() << " support point(s) carried no mass and kept their position";
    report.notes.push_back(os.str());
  }
  report.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

}  // namespace wbc
