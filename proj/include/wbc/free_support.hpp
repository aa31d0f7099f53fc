#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wbc/model.hpp"
#include "wbc/solver.hpp"

namespace wbc {

struct FreeSupportOptions {
  std::size_t m = 1;
  // Inner fixed-support solver. Its max_iter is replaced by
  // default_inner_max_iter unless inner_max_iter is set.
  SolverConfig inner;
  std::optional<std::size_t> inner_max_iter;
  double tol = 1e-5;  // relative successive change of the objective
  std::size_t max_outer = 100;
  bool warm_start = true;
  std::uint64_t seed = 1;
  std::optional<Matrix> initial_supports;  // d x m; k-means when absent

  void validate() const;
};

/// 10 for sgs and badmm, 100 for ibp with epsilon > 1e-3, 1000 for smaller
/// epsilon; 0 for the oracle (no iteration count).
std::size_t default_inner_max_iter(const SolverConfig& inner);

struct FreeSupportResult {
  DiscreteDistribution barycenter;
  MatrixList plans;
  SolveReport report;
  std::vector<double> objectives;  // after each support update
  std::vector<std::size_t> stalled_rows;  // rows with zero mass at the last update
};

/// k-means++ seeded Lloyd centroids of all support points pooled.
Matrix init_supports_kmeans(const std::vector<DiscreteDistribution>& distributions,
                            std::size_t m, std::uint64_t seed);

/// x_i = sum_t gamma_t sum_j pi_ij q_j / sum_t gamma_t sum_j pi_ij. Rows with
/// zero mass keep their previous point and are listed in `stalled`.
Matrix update_supports(const MatrixList& plans,
                       const std::vector<DiscreteDistribution>& distributions,
                       const Vector& gammas, const Matrix& previous,
                       std::vector<std::size_t>* stalled = nullptr);

/// Alternates the fixed-support solve and the support update (p = 2 only).
FreeSupportResult solve_free(const std::vector<DiscreteDistribution>& distributions,
                             const Vector& gammas, const FreeSupportOptions& options);

}  // namespace wbc
