#pragma once

#include <optional>
#include <vector>

#include "wbc/model.hpp"

namespace wbc {

/// State W = (u, {V}, {y}, {z}, lambda, {Lambda}) of the dual ADMM.
struct DualIterate {
  Vector u;           // m
  MatrixList V;       // m x m_t, nonnegative
  VectorList y;       // m
  VectorList z;       // m_t
  Vector lambda;      // m, converges to w
  MatrixList Lambda;  // m x m_t, converges to the plans

  /// All-zero iterate shaped for `instance`.
  static DualIterate zeros(const BarycenterInstance& instance);
};

/// Per-iteration caches shared between the steps.
struct IterationWorkspace {
  MatrixList D_tilde;  // D + y e^T + e z^T at the current (y, z)
  MatrixList B;        // min(D_tilde - Lambda / beta, 0)
  VectorList B_row;    // B e
  VectorList B_col;    // B^T e
  VectorList Bt_e;     // B~ e, the z-corrected row sums used by step 2b
  VectorList z_tilde;  // step 2a output
  Vector h;
  Vector b_tilde;

  static IterationWorkspace init(const BarycenterInstance& instance,
                                 const DualIterate& iterate);
};

struct SgsOptions {
  double beta0 = 1.0;
  double tau = 1.618;
  double tol = 1e-5;
  std::size_t max_iter = 3000;
  std::size_t check_every = 50;
  bool penalty_update = true;
  bool scaling = true;
  int threads = 1;
  bool record_trace = true;
  // Evaluates the step-2b stationarity residual at every checkpoint.
  bool record_stationarity = false;

  void validate() const;
};

struct SgsResult {
  PrimalSolution primal;
  DualIterate dual;  // original cost units
  SolveReport report;
  ResidualReport scaled_residuals;  // residuals of the scaled problem
  std::vector<double> stationarity;  // max over t, one entry per checkpoint
};

/// kappa = ||[D1, ..., DN]||_F and the instance with every cost divided by
/// kappa. All-zero costs return the instance unchanged with kappa = 1.
std::pair<BarycenterInstance, double> scale_instance(const BarycenterInstance& instance);

// Individual steps, exposed for testing. All operate on the instance the
// iterate belongs to (the scaled one inside solve).
void step1(const BarycenterInstance& instance, DualIterate& it,
           IterationWorkspace& ws, double beta, int threads = 1);
void step2a(const BarycenterInstance& instance, const DualIterate& it,
            IterationWorkspace& ws, double beta, int threads = 1);
void step2b(const BarycenterInstance& instance, DualIterate& it,
            IterationWorkspace& ws, double beta, int threads = 1);
void step2c(const BarycenterInstance& instance, DualIterate& it,
            const VectorList& y_prev, IterationWorkspace& ws, int threads = 1);
void step3(const BarycenterInstance& instance, DualIterate& it,
           IterationWorkspace& ws, double beta, double tau, int threads = 1);

/// One full pass of steps 1, 2a, 2b, 2c, 3.
void sgs_iteration(const BarycenterInstance& instance, DualIterate& it,
                   IterationWorkspace& ws, double beta, double tau, int threads = 1);

/// Relative residual of the step-2b optimality condition
///   sum_l dy_l + m_t dy_t + h + B~_t e = 0
/// for every t, given y before and after step 2b.
std::vector<double> step2b_stationarity(const BarycenterInstance& instance,
                                        const VectorList& y_prev,
                                        const VectorList& y_next,
                                        const IterationWorkspace& ws);

/// eta_1 ... eta_8, eta_P, eta_D, eta_gap, eta_feas and both objectives.
ResidualReport kkt_residuals(const BarycenterInstance& instance,
                             const DualIterate& it);

/// Adaptive penalty rule on chi = eta_D / eta_P. Returns beta unchanged when
/// either residual is zero.
double update_penalty(double beta, double eta_P, double eta_D);

/// Runs the method from the origin, or from `warm_start` (original units).
SgsResult solve_sgs(const BarycenterInstance& instance, const SgsOptions& options = {},
                    const DualIterate* warm_start = nullptr);

}  // namespace wbc
