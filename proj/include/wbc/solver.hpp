#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wbc/badmm.hpp"
#include "wbc/ibp.hpp"
#include "wbc/lp_oracle.hpp"
#include "wbc/model.hpp"
#include "wbc/sgs_admm.hpp"

namespace wbc {

enum class Method { Sgs, Ibp, Badmm, Oracle };

const char* to_string(Method method);
Method parse_method(const std::string& name);

/// Method selector plus the options of every method; only the selected
/// method's options are read.
struct SolverConfig {
  Method method = Method::Sgs;
  SgsOptions sgs;
  IbpOptions ibp;
  BadmmOptions badmm;
  LpOptions lp;
  // Solve the instance with zero-weight columns removed, then re-expand.
  bool presolve = false;
};

/// Starting points for the methods that accept one. Ignored by the others.
struct WarmStart {
  std::optional<DualIterate> sgs;
  std::optional<BadmmState> badmm;
};

struct SolveOutcome {
  PrimalSolution primal;
  SolveReport report;
  // Final state of the methods that expose one, in the coordinates of the
  // instance actually solved (the reduced one under presolve).
  WarmStart state;
  std::vector<MarginalCheck> marginal_checks;
};

/// Runs the configured method. With presolve on, the reduced instance is
/// solved and the plans are re-expanded; residuals and objective are then
/// evaluated on the original instance.
SolveOutcome solve(const BarycenterInstance& instance, const SolverConfig& config,
                   const WarmStart* warm_start = nullptr);

}  // namespace wbc
