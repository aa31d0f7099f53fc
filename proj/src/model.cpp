#include "wbc/model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace wbc {

namespace {

void normalize_probability(Vector& weights, const std::string& what) {
  if (weights.size() == 0) throw InvalidArgument(what + ": empty weight vector");
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]))
      throw InvalidArgument(what + ": non-finite weight");
    if (weights[i] < 0)
      throw InvalidArgument(what + ": negative weight at index " +
                            std::to_string(i));
  }
  const double sum = weights.sum();
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    std::ostringstream os;
    os << what << ": weights sum to " << std::setprecision(17) << sum
       << ", expected 1";
    throw InvalidArgument(os.str());
  }
  weights /= sum;
}

}  // namespace

void DiscreteDistribution::validate() {
  if (supports.cols() != weights.size())
    throw ShapeMismatch("distribution has " + std::to_string(weights.size()) +
                        " weights but " + std::to_string(supports.cols()) +
                        " support points");
  if (!supports.allFinite())
    throw InvalidArgument("distribution has non-finite support points");
  normalize_probability(weights, "distribution");
}

std::size_t BarycenterInstance::total_marginal_size() const {
  std::size_t total = 0;
  for (const auto& a : marginals_) total += static_cast<std::size_t>(a.size());
  return total;
}

BarycenterInstance BarycenterInstance::from_costs(MatrixList costs,
                                                  VectorList marginals,
                                                  Vector gammas) {
  BarycenterInstance inst;
  inst.costs_ = std::move(costs);
  inst.marginals_ = std::move(marginals);
  inst.gammas_ = std::move(gammas);
  inst.validate();
  return inst;
}

BarycenterInstance BarycenterInstance::from_distributions(
    const std::vector<DiscreteDistribution>& distributions,
    const Matrix& barycenter_supports, double p, Vector gammas) {
  if (distributions.empty())
    throw InvalidArgument("at least one distribution is required");
  const std::size_t n = distributions.size();
  if (gammas.size() == 0) gammas = Vector::Constant(n, 1.0 / double(n));
  if (static_cast<std::size_t>(gammas.size()) != n)
    throw ShapeMismatch("gammas length does not match the distribution count");

  BarycenterInstance inst;
  inst.p_ = p;
  inst.barycenter_supports_ = barycenter_supports;
  for (std::size_t t = 0; t < n; ++t) {
    DiscreteDistribution dist = distributions[t];
    dist.validate();
    inst.costs_.push_back(
        build_cost_matrix(barycenter_supports, dist.supports, p, gammas[t]));
    inst.marginals_.push_back(dist.weights);
    inst.supports_.push_back(dist.supports);
  }
  inst.gammas_ = std::move(gammas);
  inst.validate();
  return inst;
}

BarycenterInstance BarycenterInstance::with_costs(MatrixList costs) const {
  BarycenterInstance copy = *this;
  copy.costs_ = std::move(costs);
  copy.validate();
  return copy;
}

void BarycenterInstance::validate() {
  const std::size_t n = costs_.size();
  if (n == 0) throw InvalidArgument("instance has no distributions");
  if (marginals_.size() != n)
    throw ShapeMismatch("cost matrix count does not match marginal count");
  m_ = static_cast<std::size_t>(costs_[0].rows());
  if (m_ == 0) throw InvalidArgument("barycenter support size must be >= 1");
  for (std::size_t t = 0; t < n; ++t) {
    const auto& d = costs_[t];
    if (static_cast<std::size_t>(d.rows()) != m_)
      throw ShapeMismatch("cost matrix " + std::to_string(t) + " has " +
                          std::to_string(d.rows()) + " rows, expected " +
                          std::to_string(m_));
    if (d.cols() != marginals_[t].size())
      throw ShapeMismatch("cost matrix " + std::to_string(t) + " has " +
                          std::to_string(d.cols()) + " columns but marginal has " +
                          std::to_string(marginals_[t].size()) + " entries");
    if (!d.allFinite())
      throw InvalidArgument("cost matrix " + std::to_string(t) +
                            " has non-finite entries");
    normalize_probability(marginals_[t], "marginal " + std::to_string(t));
  }
  if (gammas_.size() == 0) gammas_ = Vector::Constant(n, 1.0 / double(n));
  if (static_cast<std::size_t>(gammas_.size()) != n)
    throw ShapeMismatch("gammas length does not match the distribution count");
  for (Eigen::Index t = 0; t < gammas_.size(); ++t)
    if (!(gammas_[t] > 0) || !std::isfinite(gammas_[t]))
      throw InvalidArgument("gammas must be positive and finite");
  if (std::abs(gammas_.sum() - 1.0) > kWeightSumTolerance)
    throw InvalidArgument("gammas must sum to 1");
  gammas_ /= gammas_.sum();
  if (barycenter_supports_ &&
      static_cast<std::size_t>(barycenter_supports_->cols()) != m_)
    throw ShapeMismatch("barycenter_supports count does not match m");
}

std::string Trace::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(10);
  for (std::size_t i = 0; i < columns.size(); ++i)
    os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

Matrix build_cost_matrix(const Matrix& X, const Matrix& Q, double p,
                         double gamma) {
  if (X.rows() != Q.rows())
    throw ShapeMismatch("support dimension mismatch: " +
                        std::to_string(X.rows()) + " vs " +
                        std::to_string(Q.rows()));
  if (!(p >= 1.0)) throw InvalidArgument("cost exponent p must be >= 1");
  if (!X.allFinite() || !Q.allFinite())
    throw InvalidArgument("support points must be finite");
  Matrix D(X.cols(), Q.cols());
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
      double acc = 0;
      if (p == 2.0) {
        acc = (X.col(i) - Q.col(j)).squaredNorm();
      } else if (p == 1.0) {
        acc = (X.col(i) - Q.col(j)).cwiseAbs().sum();
      } else {
        acc = (X.col(i) - Q.col(j)).cwiseAbs().array().pow(p).sum();
      }
      D(i, j) = gamma * acc;
    }
  }
  return D;
}

void check_solution_shape(const BarycenterInstance& instance,
                          const PrimalSolution& solution) {
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  if (solution.w.size() != m)
    throw ShapeMismatch("w has length " + std::to_string(solution.w.size()) +
                        ", expected " + std::to_string(m));
  if (solution.plans.size() != instance.num_distributions())
    throw ShapeMismatch("plan count does not match the distribution count");
  for (std::size_t t = 0; t < solution.plans.size(); ++t) {
    const auto& plan = solution.plans[t];
    if (plan.rows() != m || plan.cols() != instance.cost(t).cols())
      throw ShapeMismatch("plan " + std::to_string(t) + " has wrong shape");
  }
}

double primal_objective(const BarycenterInstance& instance,
                        const MatrixList& plans) {
  if (plans.size() != instance.num_distributions())
    throw ShapeMismatch("plan count does not match the distribution count");
  double obj = 0;
  for (std::size_t t = 0; t < plans.size(); ++t) {
    if (plans[t].rows() != instance.cost(t).rows() ||
        plans[t].cols() != instance.cost(t).cols())
      throw ShapeMismatch("plan " + std::to_string(t) + " has wrong shape");
    obj += instance.cost(t).cwiseProduct(plans[t]).sum();
  }
  return obj;
}

double primal_objective(const BarycenterInstance& instance,
                        const PrimalSolution& solution) {
  return primal_objective(instance, solution.plans);
}

double set_norm(const MatrixList& mats) {
  double s = 0;
  for (const auto& a : mats) s += a.squaredNorm();
  return std::sqrt(s);
}

double set_norm(const VectorList& vecs) {
  double s = 0;
  for (const auto& a : vecs) s += a.squaredNorm();
  return std::sqrt(s);
}

double row_marginal_residual(const Vector& w, const MatrixList& plans) {
  double num = 0;
  for (const auto& plan : plans) num += (plan.rowwise().sum() - w).squaredNorm();
  return std::sqrt(num) / (1.0 + w.norm() + set_norm(plans));
}

double column_marginal_residual(const BarycenterInstance& instance,
                                const MatrixList& plans) {
  double num = 0;
  for (std::size_t t = 0; t < plans.size(); ++t)
    num += (plans[t].colwise().sum().transpose() - instance.marginal(t))
               .squaredNorm();
  return std::sqrt(num) /
         (1.0 + set_norm(instance.marginals()) + set_norm(plans));
}

double simplex_residual(const Vector& w) {
  return (std::abs(w.sum() - 1.0) + w.cwiseMin(0.0).norm()) / (1.0 + w.norm());
}

double nonnegativity_residual(const MatrixList& plans) {
  double num = 0;
  for (const auto& plan : plans) num += plan.cwiseMin(0.0).squaredNorm();
  return std::sqrt(num) / (1.0 + set_norm(plans));
}

double feasibility_residual(const BarycenterInstance& instance,
                            const PrimalSolution& solution) {
  check_solution_shape(instance, solution);
  return std::max({row_marginal_residual(solution.w, solution.plans),
                   column_marginal_residual(instance, solution.plans),
                   simplex_residual(solution.w),
                   nonnegativity_residual(solution.plans)});
}

ResidualReport primal_residuals(const BarycenterInstance& instance,
                                const PrimalSolution& solution) {
  check_solution_shape(instance, solution);
  ResidualReport r;
  r.eta[2] = row_marginal_residual(solution.w, solution.plans);
  r.eta[3] = column_marginal_residual(instance, solution.plans);
  r.eta[6] = simplex_residual(solution.w);
  r.eta[7] = nonnegativity_residual(solution.plans);
  r.eta_feas = std::max({r.eta[2], r.eta[3], r.eta[6], r.eta[7]});
  r.obj_P = primal_objective(instance, solution);
  return r;
}

PrimalSolution product_solution(const BarycenterInstance& instance,
                                const Vector& w) {
  PrimalSolution sol;
  sol.w = w;
  for (std::size_t t = 0; t < instance.num_distributions(); ++t)
    sol.plans.push_back(w * instance.marginal(t).transpose());
  return sol;
}

}  // namespace wbc
