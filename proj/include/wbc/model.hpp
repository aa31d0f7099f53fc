#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wbc/types.hpp"

namespace wbc {

/// Tolerance on |sum(weights) - 1| accepted by input validation. Weights
/// within tolerance are renormalized by dividing by their sum.
inline constexpr double kWeightSumTolerance = 1e-12;

/// A finitely supported probability distribution in R^d.
struct DiscreteDistribution {
  Vector weights;   // length m_t, on the simplex
  Matrix supports;  // d x m_t, one point per column

  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(supports.rows()); }

  /// Checks the invariants, renormalizing weights that are within tolerance.
  /// Throws InvalidArgument otherwise.
  void validate();
};

/// Data of the fixed-support barycenter LP: N cost matrices D^(t) (m x m_t,
/// already multiplied by gamma_t) and marginals a^(t).
class BarycenterInstance {
 public:
  BarycenterInstance() = default;

  /// Builds from precomputed costs. Gammas default to 1/N when empty.
  static BarycenterInstance from_costs(MatrixList costs, VectorList marginals,
                                       Vector gammas = {});

  /// Builds D^(t) = gamma_t * ||x_i - q_j||_p^p from support points.
  /// `barycenter_supports` is d x m.
  static BarycenterInstance from_distributions(
      const std::vector<DiscreteDistribution>& distributions,
      const Matrix& barycenter_supports, double p = 2.0, Vector gammas = {});

  std::size_t num_distributions() const { return costs_.size(); }
  std::size_t support_size() const { return m_; }
  std::size_t marginal_size(std::size_t t) const {
    return static_cast<std::size_t>(marginals_[t].size());
  }
  std::size_t total_marginal_size() const;

  const MatrixList& costs() const { return costs_; }
  const Matrix& cost(std::size_t t) const { return costs_[t]; }
  const VectorList& marginals() const { return marginals_; }
  const Vector& marginal(std::size_t t) const { return marginals_[t]; }
  const Vector& gammas() const { return gammas_; }
  double p() const { return p_; }

  const std::optional<Matrix>& barycenter_supports() const {
    return barycenter_supports_;
  }
  /// Support points of each input distribution (empty when the instance was
  /// built from precomputed costs).
  const MatrixList& distribution_supports() const { return supports_; }

  /// Replaces every cost matrix; used by scaling and tests.
  BarycenterInstance with_costs(MatrixList costs) const;

 private:
  void validate();

  std::size_t m_ = 0;
  MatrixList costs_;
  VectorList marginals_;
  Vector gammas_;
  double p_ = 2.0;
  std::optional<Matrix> barycenter_supports_;
  MatrixList supports_;
};

/// Barycenter weights together with one transport plan per distribution.
struct PrimalSolution {
  Vector w;
  MatrixList plans;
};

/// Normalized KKT residuals of the dual barycenter problem.
struct ResidualReport {
  double eta[8] = {0, 0, 0, 0, 0, 0, 0, 0};  // eta_1 ... eta_8
  double eta_P = 0;
  double eta_D = 0;
  double eta_gap = 0;
  double eta_feas = 0;
  double obj_P = 0;
  double obj_D = 0;
};

/// Rows of a convergence trace, written as CSV.
struct Trace {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
  std::string to_csv() const;
};

/// Marginal identities that a scaling method enforces by construction,
/// measured on explicitly formed plans at one iteration. Errors are
/// max_t ||computed - target||_inf / ||target||_inf.
struct MarginalCheck {
  std::size_t iteration = 0;
  double column_error = 0;  // Pi^T e = a after the column scaling
  double row_error = 0;     // row sums = w after the row scaling
};

struct SolveReport {
  std::string method;
  double objective = 0;
  ResidualReport residuals;  // original cost units
  // Residuals the stopping rule was evaluated on; differs from `residuals`
  // only when the solver iterates on a rescaled problem.
  ResidualReport termination_residuals;
  std::size_t iterations = 0;
  double wall_time = 0;  // seconds
  bool converged = false;
  std::string status;
  // Parameter echo. Unused fields stay at zero.
  double beta_initial = 0;
  double beta_final = 0;
  double epsilon = 0;
  double rho = 0;
  double kappa = 1;
  std::vector<std::string> notes;
  Trace trace;
};

// ---------------------------------------------------------------------------
// Shared evaluation helpers.

/// gamma * ||x_i - q_j||_p^p for all pairs; X is d x m, Q is d x m_t.
Matrix build_cost_matrix(const Matrix& X, const Matrix& Q, double p = 2.0,
                         double gamma = 1.0);

/// sum_t <D^(t), Pi^(t)>.
double primal_objective(const BarycenterInstance& instance,
                        const PrimalSolution& solution);
double primal_objective(const BarycenterInstance& instance,
                        const MatrixList& plans);

/// sqrt of the sum of squared Frobenius norms.
double set_norm(const MatrixList& mats);
double set_norm(const VectorList& vecs);

// Primal feasibility residuals, named after the dual KKT blocks they measure
// when (w, Pi) plays the role of the multipliers (lambda, Lambda).
double row_marginal_residual(const Vector& w, const MatrixList& plans);     // eta_3
double column_marginal_residual(const BarycenterInstance& instance,
                                const MatrixList& plans);                 // eta_4
double simplex_residual(const Vector& w);                                 // eta_7
double nonnegativity_residual(const MatrixList& plans);                   // eta_8

/// max{eta_3, eta_4, eta_7, eta_8} at (w, {Pi}).
double feasibility_residual(const BarycenterInstance& instance,
                            const PrimalSolution& solution);

/// Report holding only the primal quantities: eta_3, eta_4, eta_7, eta_8,
/// eta_feas and obj_P. Used by the solvers that have no dual iterate.
ResidualReport primal_residuals(const BarycenterInstance& instance,
                                const PrimalSolution& solution);

/// Product coupling Pi^(t) = w (a^(t))^T, feasible for any w on the simplex.
PrimalSolution product_solution(const BarycenterInstance& instance,
                                const Vector& w);

void check_solution_shape(const BarycenterInstance& instance,
                          const PrimalSolution& solution);

}  // namespace wbc
