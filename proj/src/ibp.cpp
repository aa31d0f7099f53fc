#include "wbc/ibp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "parallel.hpp"

namespace wbc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double relative_change(const Vector& next, const Vector& prev) {
  return (next - prev).norm() / (1.0 + next.norm() + prev.norm());
}

double relative_change(const VectorList& next, const VectorList& prev) {
  double diff = 0;
  for (std::size_t t = 0; t < next.size(); ++t) diff += (next[t] - prev[t]).squaredNorm();
  return std::sqrt(diff) / (1.0 + set_norm(next) + set_norm(prev));
}

double inf_relative(const Vector& computed, const Vector& target) {
  const double scale = target.cwiseAbs().maxCoeff();
  return (computed - target).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
}

void require_positive_marginals(const BarycenterInstance& instance) {
  for (std::size_t t = 0; t < instance.num_distributions(); ++t)
    if ((instance.marginal(t).array() <= 0).any())
      throw InvalidArgument("IBP needs strictly positive marginals; distribution " +
                            std::to_string(t) +
                            " has zero weights (run presolve reduction first)");
}

[[noreturn]] void unstable(const std::string& what, std::size_t t) {
  throw NumericalInstability("IBP standard mode: " + what + " for distribution " +
                             std::to_string(t) +
                             "; epsilon is too small for this cost range, use the "
                             "log-domain mode");
}

void check_denominator(const Vector& x, const std::string& what, std::size_t t) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x[i] > 0) || !std::isfinite(x[i])) unstable(what + " has a zero or non-finite entry", t);
}

// log sum_j exp((s_j - D_ij) / eps) for every row i, max-shifted.
Vector row_lse(const Matrix& D, const Vector& s, double eps) {
  Vector shift = Vector::Constant(D.rows(), -std::numeric_limits<double>::infinity());
  for (Eigen::Index j = 0; j < D.cols(); ++j)
    shift = shift.cwiseMax((s[j] - D.col(j).array()).matrix());
  Vector acc = Vector::Zero(D.rows());
  for (Eigen::Index j = 0; j < D.cols(); ++j)
    acc.array() += ((s[j] - D.col(j).array() - shift.array()) / eps).exp();
  return shift / eps + acc.array().log().matrix();
}

// log sum_i exp((r_i - D_ij) / eps) for every column j, max-shifted.
Vector col_lse(const Matrix& D, const Vector& r, double eps) {
  Vector out(D.cols());
  for (Eigen::Index j = 0; j < D.cols(); ++j) {
    const auto arg = (r - D.col(j)).array();
    const double shift = arg.maxCoeff();
    out[j] = shift / eps + std::log(((arg - shift) / eps).exp().sum());
  }
  return out;
}

Matrix log_plan(const Matrix& D, const Vector& u, const Vector& v, double eps) {
  Matrix P(D.rows(), D.cols());
  for (Eigen::Index j = 0; j < D.cols(); ++j)
    P.col(j) = ((u.array() + v[j] - D.col(j).array()) / eps).exp();
  return P;
}

struct Marginals {
  double column = 0;
  double row = 0;
};

Marginals standard_marginals(const BarycenterInstance& inst, const MatrixList& K,
                             const IbpState& prev, const IbpState& next) {
  Marginals out;
  for (std::size_t t = 0; t < K.size(); ++t) {
    const Matrix after_v = next.u[t].asDiagonal() * K[t] * next.v[t].asDiagonal();
    const Matrix after_u = next.u[t].asDiagonal() * K[t] * prev.v[t].asDiagonal();
    out.column = std::max(out.column,
                          inf_relative(after_v.colwise().sum().transpose(), inst.marginal(t)));
    out.row = std::max(out.row, inf_relative(after_u.rowwise().sum(), prev.w));
  }
  return out;
}

Marginals log_marginals(const BarycenterInstance& inst, double eps, const IbpLogState& prev,
                        const IbpLogState& next) {
  Marginals out;
  const Vector w_prev = (prev.w / eps).array().exp();
  for (std::size_t t = 0; t < inst.num_distributions(); ++t) {
    const Matrix after_v = log_plan(inst.cost(t), next.u[t], next.v[t], eps);
    const Matrix after_u = log_plan(inst.cost(t), next.u[t], prev.v[t], eps);
    out.column = std::max(out.column,
                          inf_relative(after_v.colwise().sum().transpose(), inst.marginal(t)));
    out.row = std::max(out.row, inf_relative(after_u.rowwise().sum(), w_prev));
  }
  return out;
}

}  // namespace

const char* to_string(IbpMode mode) {
  switch (mode) {
    case IbpMode::Automatic: return "auto";
    case IbpMode::Standard: return "standard";
    case IbpMode::LogDomain: return "log";
  }
  return "auto";
}

IbpMode parse_ibp_mode(const std::string& name) {
  if (name == "auto") return IbpMode::Automatic;
  if (name == "standard") return IbpMode::Standard;
  if (name == "log" || name == "log_domain") return IbpMode::LogDomain;
  throw InvalidArgument("unknown IBP mode '" + name + "' (expected auto, standard or log)");
}

const char* to_string(IbpInit init) {
  return init == IbpInit::Uniform ? "uniform" : "projected";
}

IbpInit parse_ibp_init(const std::string& name) {
  if (name == "projected") return IbpInit::Projected;
  if (name == "uniform") return IbpInit::Uniform;
  throw InvalidArgument("unknown IBP start '" + name + "' (expected projected or uniform)");
}

void IbpOptions::validate() const {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be positive");
  if (!(tol > 0)) throw InvalidArgument("tol must be positive");
  if (max_iter == 0) throw InvalidArgument("max_iter must be at least 1");
  if (check_every == 0) throw InvalidArgument("check_every must be at least 1");
}

MatrixList gibbs_kernels(const BarycenterInstance& instance, double epsilon) {
  MatrixList K;
  K.reserve(instance.num_distributions());
  // std::exp per entry: Eigen's vectorized exp clamps its argument and never
  // underflows to zero, which would hide the instability.
  for (const auto& D : instance.costs())
    K.push_back((-D / epsilon).unaryExpr([](double x) { return std::exp(x); }));
  return K;
}

IbpState ibp_initial_state(const BarycenterInstance& instance, const MatrixList& kernels,
                           IbpInit init) {
  IbpState s;
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  const std::size_t N = instance.num_distributions();
  for (std::size_t t = 0; t < N; ++t) {
    s.u.push_back(Vector::Ones(m));
    s.v.push_back(Vector::Ones(instance.marginal(t).size()));
  }
  if (init == IbpInit::Uniform) {
    s.w = Vector::Constant(m, 1.0 / double(m));
    return s;
  }
  if (kernels.size() != N) throw ShapeMismatch("kernel count does not match the instance");
  Vector acc = Vector::Zero(m);
  for (std::size_t t = 0; t < N; ++t) acc.array() += (kernels[t].rowwise().sum()).array().log();
  s.w = (acc / double(N)).array().exp();
  return s;
}

IbpLogState ibp_initial_log_state(const BarycenterInstance& instance, double epsilon,
                                  IbpInit init) {
  IbpLogState s;
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  const std::size_t N = instance.num_distributions();
  for (std::size_t t = 0; t < N; ++t) {
    s.u.push_back(Vector::Zero(m));
    s.v.push_back(Vector::Zero(instance.marginal(t).size()));
  }
  if (init == IbpInit::Uniform) {
    s.w = Vector::Constant(m, epsilon * std::log(1.0 / double(m)));
    return s;
  }
  s.w = Vector::Zero(m);
  for (std::size_t t = 0; t < N; ++t)
    s.w += epsilon * row_lse(instance.cost(t), Vector::Zero(instance.marginal(t).size()), epsilon);
  s.w /= double(N);
  return s;
}

void ibp_iteration(const BarycenterInstance& instance, const MatrixList& kernels,
                   IbpState& state, int threads) {
  const std::size_t N = instance.num_distributions();
  VectorList terms(N);
  detail::parallel_for(N, threads, [&](std::size_t t) {
    const Matrix& K = kernels[t];
    const Vector Kv = K * state.v[t];
    check_denominator(Kv, "Xi v", t);
    state.u[t] = state.w.cwiseQuotient(Kv);
    const Vector Ktu = K.transpose() * state.u[t];
    check_denominator(Ktu, "Xi^T u", t);
    state.v[t] = instance.marginal(t).cwiseQuotient(Ktu);
    terms[t] = state.u[t].cwiseProduct(K * state.v[t]);
    if (!terms[t].allFinite()) unstable("u * (Xi v) is not finite", t);
  });
  // Geometric mean accumulated as a sum of logs, in index order.
  Vector acc = Vector::Zero(state.w.size());
  for (std::size_t t = 0; t < N; ++t) acc.array() += terms[t].array().log();
  state.w = (acc / double(N)).array().exp();
}

void ibp_log_iteration(const BarycenterInstance& instance, double epsilon,
                       IbpLogState& state, int threads) {
  const std::size_t N = instance.num_distributions();
  VectorList terms(N);
  detail::parallel_for(N, threads, [&](std::size_t t) {
    const Matrix& D = instance.cost(t);
    // u + w - eps * lse((u + v - D) / eps) with u pulled out of the lse.
    state.u[t] = state.w - epsilon * row_lse(D, state.v[t], epsilon);
    const Vector a_tilde = epsilon * instance.marginal(t).array().log();
    state.v[t] = a_tilde - epsilon * col_lse(D, state.u[t], epsilon);
    terms[t] = state.u[t] + epsilon * row_lse(D, state.v[t], epsilon);
  });
  Vector acc = Vector::Zero(state.w.size());
  for (std::size_t t = 0; t < N; ++t) acc += terms[t];
  state.w = acc / double(N);
}

MatrixList ibp_plans(const MatrixList& kernels, const IbpState& state) {
  MatrixList plans;
  plans.reserve(kernels.size());
  for (std::size_t t = 0; t < kernels.size(); ++t)
    plans.push_back(state.u[t].asDiagonal() * kernels[t] * state.v[t].asDiagonal());
  return plans;
}

MatrixList ibp_log_plans(const BarycenterInstance& instance, double epsilon,
                         const IbpLogState& state) {
  MatrixList plans;
  plans.reserve(instance.num_distributions());
  for (std::size_t t = 0; t < instance.num_distributions(); ++t)
    plans.push_back(log_plan(instance.cost(t), state.u[t], state.v[t], epsilon));
  return plans;
}

IbpResult solve_ibp(const BarycenterInstance& instance, const IbpOptions& options) {
  options.validate();
  require_positive_marginals(instance);
  const auto start = Clock::now();

  IbpResult result;
  SolveReport& report = result.report;
  report.method = "ibp";
  report.epsilon = options.epsilon;

  IbpMode mode = options.mode;
  if (mode == IbpMode::Automatic) {
    mode = options.epsilon <= 1e-3 ? IbpMode::LogDomain : IbpMode::Standard;
    report.notes.push_back(std::string("mode auto-selected: ") + to_string(mode));
  }
  result.mode_used = mode;

  BarycenterInstance work = instance;
  double cost_scale = 1.0;
  if (options.normalize_costs) {
    double largest = 0;
    for (const auto& D : instance.costs()) largest = std::max(largest, D.maxCoeff());
    if (largest > 0) {
      cost_scale = largest;
      MatrixList scaled;
      for (const auto& D : instance.costs()) scaled.push_back(D / largest);
      work = instance.with_costs(std::move(scaled));
    }
  }
  report.kappa = cost_scale;
  {
    std::ostringstream os;
    os << "solves the entropy-regularized problem (epsilon = " << options.epsilon
       << " relative to costs divided by " << cost_scale << "), not the LP";
    report.notes.push_back(os.str());
  }
  if (options.record_trace) report.trace.columns = {"iter", "dw", "du", "dv", "elapsed"};

  const double eps = options.epsilon;
  const bool log_mode = mode == IbpMode::LogDomain;
  MatrixList kernels;
  IbpState state;
  IbpLogState log_state;
  if (log_mode) {
    log_state = ibp_initial_log_state(work, eps, options.init);
  } else {
    kernels = gibbs_kernels(work, eps);
    state = ibp_initial_state(work, kernels, options.init);
  }

  bool converged = false;
  std::size_t iter = 0;
  while (iter < options.max_iter) {
    ++iter;
    const bool check = iter % options.check_every == 0 || iter == options.max_iter;
    double dw = 0, du = 0, dv = 0;
    if (log_mode) {
      IbpLogState prev;
      if (check) prev = log_state;
      ibp_log_iteration(work, eps, log_state, options.threads);
      if (!log_state.w.allFinite())
        throw NumericalInstability("IBP log mode produced a non-finite iterate");
      if (check) {
        dw = relative_change(log_state.w, prev.w);
        du = relative_change(log_state.u, prev.u);
        dv = relative_change(log_state.v, prev.v);
        if (options.record_marginals) {
          const auto mc = log_marginals(work, eps, prev, log_state);
          result.marginal_checks.push_back({iter, mc.column, mc.row});
        }
      }
    } else {
      IbpState prev;
      if (check) prev = state;
      ibp_iteration(work, kernels, state, options.threads);
      if (check) {
        dw = relative_change(state.w, prev.w);
        du = relative_change(state.u, prev.u);
        dv = relative_change(state.v, prev.v);
        if (options.record_marginals) {
          const auto mc = standard_marginals(work, kernels, prev, state);
          result.marginal_checks.push_back({iter, mc.column, mc.row});
        }
      }
    }
    if (!check) continue;
    if (options.record_trace) report.trace.add({double(iter), dw, du, dv, seconds_since(start)});
    if (dw < options.tol && du < options.tol && dv < options.tol) {
      converged = true;
      break;
    }
  }

  if (log_mode) {
    result.primal.w = (log_state.w / eps).array().exp();
    result.primal.plans = ibp_log_plans(work, eps, log_state);
  } else {
    result.primal.w = state.w;
    result.primal.plans = ibp_plans(kernels, state);
  }

  report.residuals = primal_residuals(instance, result.primal);
  report.termination_residuals = report.residuals;
  report.objective = report.residuals.obj_P;
  report.iterations = iter;
  report.converged = converged;
  report.status = converged ? "converged" : "max_iter";
  if (!converged) report.notes.push_back("iteration cap reached before the change criteria");
  report.wall_time = seconds_since(start);
  return result;
}

}  // namespace wbc
