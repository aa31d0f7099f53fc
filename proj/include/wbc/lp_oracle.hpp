#pragma once

#include "wbc/model.hpp"
#include "wbc/sgs_admm.hpp"

namespace wbc {

/// Largest m * sum(m_t) the oracle accepts.
inline constexpr double kOracleMaxVariables = 2e5;

struct LpOptions {
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t refactor_every = 100;
  std::size_t max_pivots = 2000000;
};

struct LpResult {
  PrimalSolution primal;
  // Multipliers in the sign convention of the dual ADMM:
  // D + y e^T + e z^T >= 0 and w supported on argmax(sum_t y).
  VectorList y;
  VectorList z;
  double objective = 0;
  double dual_objective = 0;
  std::size_t pivots = 0;
  std::size_t bland_pivots = 0;
  double wall_time = 0;
};

/// Solves the fixed-support barycenter LP exactly with a revised simplex
/// method started from a feasible crash basis (every plan routes its mass
/// through a single barycenter point), Dantzig pricing, and Bland's rule
/// after 10 * rows pivots without objective progress. The final basis is
/// refactorized and both primal and dual solves are refined.
LpResult solve_lp_exact(const BarycenterInstance& instance, const LpOptions& options = {});

/// Max relative violation over primal feasibility, dual feasibility,
/// complementary slackness and the simplex stationarity block
/// w = Pr(w + sum_t y).
double verify_kkt(const BarycenterInstance& instance, const PrimalSolution& primal,
                  const VectorList& y, const VectorList& z);

/// A KKT point of the dual ADMM built from an oracle solution: u = sum y,
/// V = D + y e^T + e z^T, lambda = w, Lambda = plans.
DualIterate oracle_dual_iterate(const BarycenterInstance& instance, const LpResult& lp);

}  // namespace wbc
