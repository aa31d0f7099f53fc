#include "wbc/badmm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace wbc {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double relative_change(const MatrixList& next, const MatrixList& prev) {
  double diff = 0;
  for (std::size_t t = 0; t < next.size(); ++t) diff += (next[t] - prev[t]).squaredNorm();
  return std::sqrt(diff) / (1.0 + set_norm(next) + set_norm(prev));
}

double inf_relative(const Vector& computed, const Vector& target) {
  const double scale = target.cwiseAbs().maxCoeff();
  return (computed - target).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
}

[[noreturn]] void degenerate(const std::string& what, std::size_t t) {
  throw NumericalInstability("BADMM: " + what + " for distribution " + std::to_string(t));
}

// log(sum exp(x)) over a range of values, -inf for an empty or all -inf range.
double lse(const Vector& x) {
  const double shift = x.maxCoeff();
  if (shift == kNegInf) return kNegInf;
  return shift + std::log((x.array() - shift).exp().sum());
}

}  // namespace

const char* to_string(WRule rule) {
  switch (rule) {
    case WRule::R1: return "R1";
    case WRule::R2: return "R2";
    case WRule::Geometric: return "geometric";
  }
  return "R2";
}

WRule parse_w_rule(const std::string& name) {
  if (name == "R1" || name == "r1") return WRule::R1;
  if (name == "R2" || name == "r2") return WRule::R2;
  if (name == "geometric") return WRule::Geometric;
  throw InvalidArgument("unknown w-rule '" + name + "' (expected R1, R2 or geometric)");
}

void BadmmOptions::validate() const {
  if (!std::isfinite(rho)) throw InvalidArgument("rho must be finite");
  if (!(tol > 0)) throw InvalidArgument("tol must be positive");
  if (max_iter == 0) throw InvalidArgument("max_iter must be at least 1");
  if (check_every == 0) throw InvalidArgument("check_every must be at least 1");
}

double default_rho(const BarycenterInstance& instance) {
  double sum = 0;
  double count = 0;
  for (const auto& D : instance.costs()) {
    sum += D.sum();
    count += double(D.size());
  }
  const double mean = count > 0 ? sum / count : 0;
  return mean > 0 ? 2.0 * mean : 1.0;
}

BadmmState badmm_initial_state(const BarycenterInstance& instance) {
  BadmmState s;
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  s.w = Vector::Constant(m, 1.0 / double(m));
  for (std::size_t t = 0; t < instance.num_distributions(); ++t) {
    s.Gamma.push_back(s.w * instance.marginal(t).transpose());
    s.Pi.push_back(s.Gamma.back());
    s.Lambda.push_back(Matrix::Zero(m, instance.marginal(t).size()));
  }
  return s;
}

void badmm_pi_update(const BarycenterInstance& instance, BadmmState& state, double rho,
                     int threads) {
  detail::parallel_for(instance.num_distributions(), threads, [&](std::size_t t) {
    const Matrix& D = instance.cost(t);
    const Vector& a = instance.marginal(t);
    const Matrix& G = state.Gamma[t];
    const Matrix& L = state.Lambda[t];
    Matrix& P = state.Pi[t];
    for (Eigen::Index j = 0; j < D.cols(); ++j) {
      if (a[j] == 0) {
        P.col(j).setZero();
        continue;
      }
      // Shift by the column max over the support of Gamma.
      double shift = kNegInf;
      for (Eigen::Index i = 0; i < D.rows(); ++i)
        if (G(i, j) > 0) shift = std::max(shift, -(D(i, j) + L(i, j)) / rho);
      if (shift == kNegInf) degenerate("Gamma column " + std::to_string(j) + " is zero", t);
      P.col(j) = G.col(j).array() * (-(D.col(j) + L.col(j)).array() / rho - shift).exp();
      const double s = P.col(j).sum();
      if (!(s > 0) || !std::isfinite(s))
        degenerate("column " + std::to_string(j) + " of the Pi-update has zero sum", t);
      P.col(j) *= a[j] / s;
    }
  });
}

Vector combine_row_sums(const VectorList& log_row_sums, WRule rule) {
  const std::size_t N = log_row_sums.size();
  const Eigen::Index m = log_row_sums.front().size();
  Vector log_w(m);
  Vector column(static_cast<Eigen::Index>(N));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < N; ++t) column[Eigen::Index(t)] = log_row_sums[t][i];
    switch (rule) {
      case WRule::R1: log_w[i] = lse(column); break;
      case WRule::R2: log_w[i] = 2.0 * lse(0.5 * column); break;
      case WRule::Geometric:
        log_w[i] = column.minCoeff() == kNegInf ? kNegInf : column.mean();
        break;
    }
  }
  const double shift = log_w.maxCoeff();
  if (shift == kNegInf || !std::isfinite(shift))
    throw NumericalInstability("BADMM: all barycenter row sums vanished");
  Vector w = (log_w.array() - shift).exp();
  return w / w.sum();
}

void badmm_gamma_w_update(const BarycenterInstance& instance, BadmmState& state, double rho,
                          WRule rule, int threads) {
  const std::size_t N = instance.num_distributions();
  VectorList log_row_sums(N);
  VectorList row_sums(N);
  detail::parallel_for(N, threads, [&](std::size_t t) {
    const Matrix& P = state.Pi[t];
    const Matrix& L = state.Lambda[t];
    Matrix& G = state.Gamma[t];
    // Row shift over the support of Pi, so Gamma holds Pi .* exp(Lambda/rho - r).
    Vector shift = Vector::Constant(P.rows(), kNegInf);
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      for (Eigen::Index i = 0; i < P.rows(); ++i)
        if (P(i, j) > 0) shift[i] = std::max(shift[i], L(i, j) / rho);
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      G.col(j) = P.col(j).array() * (L.col(j).array() / rho - shift.array()).exp();
    for (Eigen::Index i = 0; i < P.rows(); ++i)
      if (shift[i] == kNegInf) G.row(i).setZero();
    row_sums[t] = G.rowwise().sum();
    log_row_sums[t] = shift + row_sums[t].array().log().matrix();
  });
  state.w = combine_row_sums(log_row_sums, rule);
  detail::parallel_for(N, threads, [&](std::size_t t) {
    Matrix& G = state.Gamma[t];
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
      const double s = row_sums[t][i];
      if (s > 0) {
        G.row(i) *= state.w[i] / s;
      } else if (state.w[i] > 0) {
        degenerate("zero row sum at barycenter point " + std::to_string(i), t);
      }
    }
  });
}

void badmm_multiplier_update(BadmmState& state, double rho) {
  for (std::size_t t = 0; t < state.Lambda.size(); ++t)
    state.Lambda[t] += rho * (state.Pi[t] - state.Gamma[t]);
}

BadmmResult solve_badmm(const BarycenterInstance& instance, const BadmmOptions& options,
                        const BadmmState* warm_start) {
  options.validate();
  const auto start = Clock::now();
  const double rho = options.rho > 0 ? options.rho : default_rho(instance);

  BadmmResult result;
  SolveReport& report = result.report;
  report.method = "badmm";
  report.rho = rho;
  report.notes.push_back(std::string("w-rule ") + to_string(options.w_rule));
  if (options.record_trace)
    report.trace.columns = {"iter", "feas", "dw", "pi_gamma_gap", "dPi", "dGamma", "dLambda",
                            "elapsed"};

  BadmmState& state = result.state;
  state = badmm_initial_state(instance);
  if (warm_start) {
    bool ok = warm_start->w.size() == state.w.size() &&
              warm_start->Pi.size() == state.Pi.size() &&
              warm_start->Gamma.size() == state.Gamma.size() &&
              warm_start->Lambda.size() == state.Lambda.size();
    for (std::size_t t = 0; ok && t < state.Pi.size(); ++t)
      ok = warm_start->Gamma[t].rows() == state.Gamma[t].rows() &&
           warm_start->Gamma[t].cols() == state.Gamma[t].cols() &&
           warm_start->Lambda[t].rows() == state.Lambda[t].rows() &&
           warm_start->Lambda[t].cols() == state.Lambda[t].cols() &&
           warm_start->Pi[t].rows() == state.Pi[t].rows() &&
           warm_start->Pi[t].cols() == state.Pi[t].cols();
    if (!ok) throw ShapeMismatch("BADMM warm start does not match the instance");
    state = *warm_start;
  }

  bool converged = false;
  std::size_t iter = 0;
  while (iter < options.max_iter) {
    ++iter;
    const bool check = iter % options.check_every == 0 || iter == options.max_iter;
    BadmmState prev;
    if (check) prev = state;

    badmm_pi_update(instance, state, rho, options.threads);
    double column_error = 0;
    if (check && options.record_marginals)
      for (std::size_t t = 0; t < instance.num_distributions(); ++t)
        column_error = std::max(column_error,
                                inf_relative(state.Pi[t].colwise().sum().transpose(),
                                             instance.marginal(t)));
    badmm_gamma_w_update(instance, state, rho, options.w_rule, options.threads);
    badmm_multiplier_update(state, rho);
    if (!check) continue;

    if (options.record_marginals) {
      double row_error = 0;
      for (const auto& G : state.Gamma)
        row_error = std::max(row_error, inf_relative(G.rowwise().sum(), state.w));
      result.marginal_checks.push_back({iter, column_error, row_error});
    }

    double gap = 0;
    for (std::size_t t = 0; t < state.Pi.size(); ++t)
      gap += (state.Pi[t] - state.Gamma[t]).squaredNorm();
    gap = std::sqrt(gap) / (1.0 + set_norm(state.Pi) + set_norm(state.Gamma));
    const double feas = std::max(row_marginal_residual(state.w, state.Gamma),
                                 column_marginal_residual(instance, state.Pi));
    const double dw = (state.w - prev.w).norm() / (1.0 + state.w.norm() + prev.w.norm());
    const double dPi = relative_change(state.Pi, prev.Pi);
    const double dGamma = relative_change(state.Gamma, prev.Gamma);
    const double dLambda = relative_change(state.Lambda, prev.Lambda);
    if (options.record_trace)
      report.trace.add({double(iter), feas, dw, gap, dPi, dGamma, dLambda, seconds_since(start)});
    if (std::max({feas, dw, gap, dPi, dGamma, dLambda}) < options.tol) {
      converged = true;
      break;
    }
  }

  result.primal.w = state.w;
  result.primal.plans = state.Pi;
  report.residuals = primal_residuals(instance, result.primal);
  report.termination_residuals = report.residuals;
  report.objective = report.residuals.obj_P;
  report.iterations = iter;
  report.converged = converged;
  report.status = converged ? "converged" : "max_iter";
  if (!converged) report.notes.push_back("iteration cap reached before the six criteria");
  report.wall_time = seconds_since(start);
  return result;
}

}  // namespace wbc
