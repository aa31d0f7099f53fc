#pragma once

#include <string>
#include <vector>

#include "wbc/model.hpp"

namespace wbc {

/// Barycenter weight update. R1 averages the row sums, R2 averages their
/// square roots and squares, Geometric takes the geometric mean.
enum class WRule { R1, R2, Geometric };

const char* to_string(WRule rule);
WRule parse_w_rule(const std::string& name);

struct BadmmOptions {
  double rho = 0;  // <= 0 selects default_rho(instance)
  double tol = 1e-5;
  std::size_t max_iter = 3000;
  std::size_t check_every = 200;
  WRule w_rule = WRule::R2;
  int threads = 1;
  bool record_trace = true;
  // Records the marginal identities at every checkpoint.
  bool record_marginals = false;

  void validate() const;
};

struct BadmmState {
  MatrixList Pi;
  MatrixList Gamma;
  MatrixList Lambda;
  Vector w;
};

struct BadmmResult {
  PrimalSolution primal;  // (w, Pi)
  SolveReport report;
  BadmmState state;
  std::vector<MarginalCheck> marginal_checks;
};

/// 2 * mean of all cost entries, or 1 when every cost is zero.
double default_rho(const BarycenterInstance& instance);

/// Gamma = w0 a^T with w0 = e/m, Pi = Gamma, Lambda = 0.
BadmmState badmm_initial_state(const BarycenterInstance& instance);

/// Pi = (Gamma .* exp(-(D + Lambda)/rho)) Diag(u) with u fixing the column
/// sums to a. Columns with a_j = 0 are set to zero.
void badmm_pi_update(const BarycenterInstance& instance, BadmmState& state, double rho,
                     int threads = 1);

/// Row sums w~_t of Pi .* exp(Lambda/rho), the new w by `rule`, and
/// Gamma = Diag(w ./ w~_t)(Pi .* exp(Lambda/rho)).
void badmm_gamma_w_update(const BarycenterInstance& instance, BadmmState& state, double rho,
                          WRule rule, int threads = 1);

/// Lambda += rho (Pi - Gamma).
void badmm_multiplier_update(BadmmState& state, double rho);

/// Barycenter weights from per-distribution row sums, combined in the log
/// domain and normalized onto the simplex.
Vector combine_row_sums(const VectorList& log_row_sums, WRule rule);

/// Runs from badmm_initial_state, or from `warm_start` when given.
BadmmResult solve_badmm(const BarycenterInstance& instance, const BadmmOptions& options = {},
                        const BadmmState* warm_start = nullptr);

}  // namespace wbc
