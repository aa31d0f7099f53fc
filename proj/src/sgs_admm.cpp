#include "wbc/sgs_admm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <tuple>
#include <sstream>

#include "parallel.hpp"
#include "wbc/simplex.hpp"

namespace wbc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector sum_of(const VectorList& vs, Eigen::Index m) {
  Vector s = Vector::Zero(m);
  for (const auto& v : vs) s += v;
  return s;
}

// Multiplies the cost-unit blocks (u, V, y, z) by `factor`; lambda and
// Lambda are unit-free.
DualIterate rescaled(const DualIterate& it, double factor) {
  DualIterate out = it;
  if (factor == 1.0) return out;
  out.u *= factor;
  for (auto& v : out.V) v *= factor;
  for (auto& v : out.y) v *= factor;
  for (auto& v : out.z) v *= factor;
  return out;
}

void check_iterate_shape(const BarycenterInstance& instance, const DualIterate& it) {
  const auto n = instance.num_distributions();
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  bool ok = it.u.size() == m && it.lambda.size() == m && it.V.size() == n &&
            it.y.size() == n && it.z.size() == n && it.Lambda.size() == n;
  for (std::size_t t = 0; ok && t < n; ++t) {
    const auto mt = instance.cost(t).cols();
    ok = it.V[t].rows() == m && it.V[t].cols() == mt && it.Lambda[t].rows() == m &&
         it.Lambda[t].cols() == mt && it.y[t].size() == m && it.z[t].size() == mt;
  }
  if (!ok) throw ShapeMismatch("dual iterate does not match the instance");
}

double max_eta(const ResidualReport& r) {
  return std::max({r.eta_P, r.eta_D, r.eta_gap});
}

}  // namespace

DualIterate DualIterate::zeros(const BarycenterInstance& instance) {
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  DualIterate it;
  it.u = Vector::Zero(m);
  it.lambda = Vector::Zero(m);
  for (const auto& d : instance.costs()) {
    it.V.push_back(Matrix::Zero(m, d.cols()));
    it.Lambda.push_back(Matrix::Zero(m, d.cols()));
    it.y.push_back(Vector::Zero(m));
    it.z.push_back(Vector::Zero(d.cols()));
  }
  return it;
}

IterationWorkspace IterationWorkspace::init(const BarycenterInstance& instance,
                                            const DualIterate& it) {
  check_iterate_shape(instance, it);
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  IterationWorkspace ws;
  for (std::size_t t = 0; t < instance.num_distributions(); ++t) {
    const Matrix& d = instance.cost(t);
    Matrix dt = d;
    dt.colwise() += it.y[t];
    dt.rowwise() += it.z[t].transpose();
    ws.D_tilde.push_back(std::move(dt));
    ws.B.push_back(Matrix::Zero(m, d.cols()));
    ws.B_row.push_back(Vector::Zero(m));
    ws.B_col.push_back(Vector::Zero(d.cols()));
    ws.Bt_e.push_back(Vector::Zero(m));
    ws.z_tilde.push_back(it.z[t]);
  }
  ws.h = Vector::Zero(m);
  ws.b_tilde = Vector::Zero(m);
  return ws;
}

void SgsOptions::validate() const {
  if (!(beta0 > 0) || !std::isfinite(beta0))
    throw InvalidArgument("beta0 must be positive and finite");
  if (!(tau > 0) || !(tau < 0.5 * (1.0 + std::sqrt(5.0))))
    throw InvalidArgument("tau must lie in (0, (1 + sqrt(5)) / 2)");
  if (!(tol > 0)) throw InvalidArgument("tol must be positive");
  if (max_iter == 0) throw InvalidArgument("max_iter must be at least 1");
  if (check_every == 0) throw InvalidArgument("check_every must be at least 1");
  if (threads < 1) throw InvalidArgument("threads must be at least 1");
}

std::pair<BarycenterInstance, double> scale_instance(
    const BarycenterInstance& instance) {
  const double kappa = set_norm(instance.costs());
  if (kappa == 0.0) return {instance, 1.0};
  MatrixList scaled;
  scaled.reserve(instance.num_distributions());
  for (const auto& d : instance.costs()) scaled.push_back(d / kappa);
  return {instance.with_costs(std::move(scaled)), kappa};
}

void step1(const BarycenterInstance& instance, DualIterate& it,
           IterationWorkspace& ws, double beta, int threads) {
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  const double inv_beta = 1.0 / beta;
  const Vector x = inv_beta * it.lambda + sum_of(it.y, m);
  it.u = prox_support_function(x, beta);

  detail::parallel_for(instance.num_distributions(), threads, [&](std::size_t t) {
    const Matrix& dt = ws.D_tilde[t];
    const Matrix& lam = it.Lambda[t];
    Matrix& v = it.V[t];
    Matrix& b = ws.B[t];
    Vector& row = ws.B_row[t];
    Vector& col = ws.B_col[t];
    row.setZero();
    for (Eigen::Index j = 0; j < dt.cols(); ++j) {
      double col_sum = 0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double s = dt(i, j) - inv_beta * lam(i, j);
        if (s > 0) {
          v(i, j) = s;
          b(i, j) = 0;
        } else {
          v(i, j) = 0;
          b(i, j) = s;
          col_sum += s;
          row[i] += s;
        }
      }
      col[j] = col_sum;
    }
  });
}

void step2a(const BarycenterInstance& instance, const DualIterate& it,
            IterationWorkspace& ws, double beta, int threads) {
  const double inv_m = 1.0 / double(instance.support_size());
  const double inv_beta = 1.0 / beta;
  detail::parallel_for(instance.num_distributions(), threads, [&](std::size_t t) {
    ws.z_tilde[t] = it.z[t] - inv_m * (inv_beta * instance.marginal(t) + ws.B_col[t]);
  });
}

void step2b(const BarycenterInstance& instance, DualIterate& it,
            IterationWorkspace& ws, double beta, int threads) {
  const auto n = instance.num_distributions();
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  const double inv_m = 1.0 / double(m);
  const double inv_beta = 1.0 / beta;

  ws.h = inv_beta * it.lambda - it.u + sum_of(it.y, m);
  detail::parallel_for(n, threads, [&](std::size_t t) {
    const double shift =
        inv_m * (ws.B_row[t].sum() + inv_beta * instance.marginal(t).sum());
    ws.Bt_e[t] = ws.B_row[t].array() - shift;
  });

  double s = 0;
  Vector weighted = Vector::Zero(m);
  for (std::size_t t = 0; t < n; ++t) {
    const double inv_mt = 1.0 / double(instance.marginal_size(t));
    s += inv_mt;
    weighted += inv_mt * ws.Bt_e[t];
  }
  ws.b_tilde = -(s * ws.h + weighted) / (1.0 + s);

  detail::parallel_for(n, threads, [&](std::size_t t) {
    const double inv_mt = 1.0 / double(instance.marginal_size(t));
    it.y[t] -= inv_mt * (ws.b_tilde + ws.h + ws.Bt_e[t]);
  });
}

void step2c(const BarycenterInstance& instance, DualIterate& it,
            const VectorList& y_prev, IterationWorkspace& ws, int threads) {
  const double inv_m = 1.0 / double(instance.support_size());
  detail::parallel_for(instance.num_distributions(), threads, [&](std::size_t t) {
    const double shift = inv_m * (it.y[t] - y_prev[t]).sum();
    it.z[t] = ws.z_tilde[t].array() - shift;
  });
}

void step3(const BarycenterInstance& instance, DualIterate& it,
           IterationWorkspace& ws, double beta, double tau, int threads) {
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  const double step = tau * beta;
  it.lambda += step * (sum_of(it.y, m) - it.u);

  detail::parallel_for(instance.num_distributions(), threads, [&](std::size_t t) {
    const Matrix& d = instance.cost(t);
    const Vector& y = it.y[t];
    const Vector& z = it.z[t];
    Matrix& dt = ws.D_tilde[t];
    Matrix& lam = it.Lambda[t];
    const Matrix& v = it.V[t];
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      const double zj = z[j];
      for (Eigen::Index i = 0; i < m; ++i) {
        const double fresh = d(i, j) + y[i] + zj;
        dt(i, j) = fresh;
        lam(i, j) += step * (v(i, j) - fresh);
      }
    }
  });
}

void sgs_iteration(const BarycenterInstance& instance, DualIterate& it,
                   IterationWorkspace& ws, double beta, double tau, int threads) {
  step1(instance, it, ws, beta, threads);
  step2a(instance, it, ws, beta, threads);
  const VectorList y_prev = it.y;
  step2b(instance, it, ws, beta, threads);
  step2c(instance, it, y_prev, ws, threads);
  step3(instance, it, ws, beta, tau, threads);
}

std::vector<double> step2b_stationarity(const BarycenterInstance& instance,
                                        const VectorList& y_prev,
                                        const VectorList& y_next,
                                        const IterationWorkspace& ws) {
  const auto n = instance.num_distributions();
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  Vector total = Vector::Zero(m);
  for (std::size_t t = 0; t < n; ++t) total += y_next[t] - y_prev[t];
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double mt = double(instance.marginal_size(t));
    const Vector dy = y_next[t] - y_prev[t];
    const Vector r = total + mt * dy + ws.h + ws.Bt_e[t];
    const double scale =
        1.0 + total.norm() + mt * dy.norm() + ws.h.norm() + ws.Bt_e[t].norm();
    out[t] = r.norm() / scale;
  }
  return out;
}

ResidualReport kkt_residuals(const BarycenterInstance& instance, const DualIterate& it) {
  check_iterate_shape(instance, it);
  const auto n = instance.num_distributions();
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  ResidualReport r;

  const Vector& lambda = it.lambda;
  const Vector sum_y = sum_of(it.y, m);
  const double norm_lambda = lambda.norm();
  const double norm_u = it.u.norm();
  const double norm_V = set_norm(it.V);
  const double norm_Lambda = set_norm(it.Lambda);

  r.eta[0] = (lambda - project_simplex(lambda + it.u)).norm() /
             (1.0 + norm_lambda + norm_u);

  double comp = 0;
  double dual_cons = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const Matrix& v = it.V[t];
    comp += (v - (v - it.Lambda[t]).cwiseMax(0.0)).squaredNorm();
    Matrix resid = v - instance.cost(t);
    resid.colwise() -= it.y[t];
    resid.rowwise() -= it.z[t].transpose();
    dual_cons += resid.squaredNorm();
  }
  r.eta[1] = std::sqrt(comp) / (1.0 + norm_V + norm_Lambda);
  r.eta[2] = row_marginal_residual(lambda, it.Lambda);
  r.eta[3] = column_marginal_residual(instance, it.Lambda);
  r.eta[4] = (sum_y - it.u).norm() / (1.0 + sum_y.norm() + norm_u);
  r.eta[5] = std::sqrt(dual_cons) /
             (1.0 + set_norm(instance.costs()) + norm_V + set_norm(it.y) + set_norm(it.z));
  r.eta[6] = simplex_residual(lambda);
  r.eta[7] = nonnegativity_residual(it.Lambda);

  r.eta_P = std::max({r.eta[0], r.eta[1], r.eta[2], r.eta[3]});
  r.eta_D = std::max({r.eta[4], r.eta[5], r.eta[6], r.eta[7]});
  r.eta_feas = std::max({r.eta[2], r.eta[3], r.eta[6], r.eta[7]});

  r.obj_P = primal_objective(instance, it.Lambda);
  // Max-form dual value: -(delta*(sum y) + sum <z, a>), equal to obj_P at a
  // KKT point.
  double za = 0;
  for (std::size_t t = 0; t < n; ++t) za += it.z[t].dot(instance.marginal(t));
  r.obj_D = -(sum_y.maxCoeff() + za);
  r.eta_gap = std::abs(r.obj_P - r.obj_D) / (1.0 + std::abs(r.obj_P) + std::abs(r.obj_D));
  return r;
}

double update_penalty(double beta, double eta_P, double eta_D) {
  if (!(eta_P > 0) || !(eta_D > 0)) return beta;
  const double chi = eta_D / eta_P;
  const double spread = std::max(chi, 1.0 / chi);
  double sigma = 1.5;
  if (spread <= 50) sigma = 1.1;
  else if (spread > 500) sigma = 2.0;
  if (chi > 2) return beta * sigma;
  if (1.0 / chi > 2) return beta / sigma;
  return beta;
}

SgsResult solve_sgs(const BarycenterInstance& instance, const SgsOptions& options,
                    const DualIterate* warm_start) {
  options.validate();
  const auto start = Clock::now();

  BarycenterInstance work = instance;
  double kappa = 1.0;
  if (options.scaling) std::tie(work, kappa) = scale_instance(instance);

  DualIterate it;
  if (warm_start) {
    check_iterate_shape(instance, *warm_start);
    it = rescaled(*warm_start, 1.0 / kappa);
  } else {
    it = DualIterate::zeros(work);
  }
  IterationWorkspace ws = IterationWorkspace::init(work, it);

  SgsResult result;
  SolveReport& report = result.report;
  report.method = "sgs";
  report.beta_initial = options.beta0;
  report.kappa = kappa;
  if (options.record_trace) {
    report.trace.columns = {"iter", "eta1", "eta2", "eta3", "eta4", "eta5", "eta6",
                            "eta7", "eta8", "eta_P", "eta_D", "eta_gap", "beta",
                            "elapsed"};
  }

  double beta = options.beta0;
  bool warned_beta = false;
  bool converged = false;
  std::size_t iter = 0;

  DualIterate best;
  ResidualReport best_res, best_scaled;
  double best_err = std::numeric_limits<double>::infinity();
  std::size_t best_iter = 0;
  ResidualReport last_res, last_scaled;

  VectorList y_prev;
  for (iter = 1; iter <= options.max_iter; ++iter) {
    const bool checkpoint = iter % options.check_every == 0 || iter == options.max_iter;

    step1(work, it, ws, beta, options.threads);
    step2a(work, it, ws, beta, options.threads);
    y_prev = it.y;
    step2b(work, it, ws, beta, options.threads);
    if (checkpoint && options.record_stationarity) {
      const auto st = step2b_stationarity(work, y_prev, it.y, ws);
      result.stationarity.push_back(*std::max_element(st.begin(), st.end()));
    }
    step2c(work, it, y_prev, ws, options.threads);
    step3(work, it, ws, beta, options.tau, options.threads);

    if (!checkpoint) continue;

    last_scaled = kkt_residuals(work, it);
    last_res = kappa == 1.0 ? last_scaled : kkt_residuals(instance, rescaled(it, kappa));
    if (!std::isfinite(max_eta(last_res)) || !std::isfinite(max_eta(last_scaled)))
      throw NumericalInstability("sGS-ADMM residuals became non-finite at iteration " +
                                 std::to_string(iter));
    if (options.record_trace) {
      std::vector<double> row{double(iter)};
      for (double e : last_scaled.eta) row.push_back(e);
      row.insert(row.end(), {last_scaled.eta_P, last_scaled.eta_D, last_scaled.eta_gap, beta,
                             seconds_since(start)});
      report.trace.add(std::move(row));
    }

    // The stopping rule and best-iterate bookkeeping use the problem the
    // method actually iterates on (the scaled one when scaling is enabled).
    const double err = max_eta(last_scaled);
    if (err < options.tol) {
      converged = true;
      break;
    }
    if (err < best_err) {
      best_err = err;
      best = it;
      best_res = last_res;
      best_scaled = last_scaled;
      best_iter = iter;
    }
    if (options.penalty_update && iter < options.max_iter) {
      beta = update_penalty(beta, last_scaled.eta_P, last_scaled.eta_D);
      if (!warned_beta && (beta < 1e-8 || beta > 1e8)) {
        warned_beta = true;
        std::ostringstream os;
        os << "warning: beta left [1e-8, 1e8] (beta = " << beta << " at iteration "
           << iter << ")";
        report.notes.push_back(os.str());
      }
    }
  }

  if (converged) {
    report.iterations = iter;
    report.status = "converged";
    report.residuals = last_res;
    report.termination_residuals = last_scaled;
  } else {
    report.iterations = options.max_iter;
    report.status = "max_iter";
    it = std::move(best);
    report.residuals = best_res;
    report.termination_residuals = best_scaled;
    report.notes.push_back("iteration cap reached; returning the best checkpoint iterate "
                           "(iteration " + std::to_string(best_iter) + ")");
  }
  result.scaled_residuals = report.termination_residuals;
  report.converged = converged;
  report.beta_final = beta;

  result.dual = rescaled(it, kappa);
  result.primal.w = result.dual.lambda;
  result.primal.plans = result.dual.Lambda;
  report.objective = primal_objective(instance, result.primal.plans);
  report.wall_time = seconds_since(start);
  return result;
}

}  // namespace wbc
