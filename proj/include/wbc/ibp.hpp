#pragma once

#include <vector>

#include "wbc/model.hpp"

namespace wbc {

enum class IbpMode { Automatic, Standard, LogDomain };

const char* to_string(IbpMode mode);
IbpMode parse_ibp_mode(const std::string& name);

// Starting barycenter. Uniform is w = e/m with u = v = e. Its first u-update
// projects onto rows = e/m, a set outside the iteration, and the fixed point
// then carries a linear bias in w that does not vanish as epsilon -> 0.
// Projected starts from one w-update at u = v = e, the geometric mean of the
// rows of Xi_t, which keeps the limit at the regularized optimum.
enum class IbpInit { Projected, Uniform };

const char* to_string(IbpInit init);
IbpInit parse_ibp_init(const std::string& name);

struct IbpOptions {
  double epsilon = 0.01;
  double tol = 1e-8;
  std::size_t max_iter = 10000;
  std::size_t check_every = 10;
  // Automatic picks the log domain when epsilon <= 1e-3.
  IbpMode mode = IbpMode::Automatic;
  IbpInit init = IbpInit::Projected;
  // Divide every cost by the largest entry so that epsilon is relative to
  // the cost range. Plans are invariant to this apart from the meaning of
  // epsilon; objectives are always reported on the original costs.
  bool normalize_costs = true;
  int threads = 1;
  bool record_trace = true;
  // Forms the plans explicitly at every checkpoint and records the
  // marginal identities.
  bool record_marginals = false;

  void validate() const;
};

/// Standard-domain state: Pi_t = Diag(u_t) Xi_t Diag(v_t).
struct IbpState {
  Vector w;
  VectorList u;
  VectorList v;
};

/// Log-domain state: tilde variables are epsilon * log of the standard ones.
struct IbpLogState {
  Vector w;
  VectorList u;
  VectorList v;
};

struct IbpResult {
  PrimalSolution primal;
  SolveReport report;
  IbpMode mode_used = IbpMode::Standard;
  std::vector<MarginalCheck> marginal_checks;
};

/// exp(-D_t / epsilon) for every t.
MatrixList gibbs_kernels(const BarycenterInstance& instance, double epsilon);

IbpState ibp_initial_state(const BarycenterInstance& instance, const MatrixList& kernels,
                           IbpInit init = IbpInit::Projected);
IbpLogState ibp_initial_log_state(const BarycenterInstance& instance, double epsilon,
                                  IbpInit init = IbpInit::Projected);

/// One pass of the u, v and w updates. Throws NumericalInstability when a
/// scaling denominator vanishes or an entry stops being finite.
void ibp_iteration(const BarycenterInstance& instance, const MatrixList& kernels,
                   IbpState& state, int threads = 1);

/// Log-sum-exp form of the same pass, max-shifted.
void ibp_log_iteration(const BarycenterInstance& instance, double epsilon,
                       IbpLogState& state, int threads = 1);

/// Plans of a state, Diag(u) Xi Diag(v).
MatrixList ibp_plans(const MatrixList& kernels, const IbpState& state);
MatrixList ibp_log_plans(const BarycenterInstance& instance, double epsilon,
                         const IbpLogState& state);

/// Solves the entropy-regularized problem. The plans are approximate
/// solutions of the LP only.
IbpResult solve_ibp(const BarycenterInstance& instance, const IbpOptions& options = {});

}  // namespace wbc
