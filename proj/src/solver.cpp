#include "wbc/solver.hpp"

#include "wbc/presolve.hpp"

namespace wbc {

namespace {

SolveOutcome run_method(const BarycenterInstance& instance, const SolverConfig& config,
                        const WarmStart* warm) {
  SolveOutcome out;
  switch (config.method) {
    case Method::Sgs: {
      const DualIterate* start = warm && warm->sgs ? &*warm->sgs : nullptr;
      auto res = solve_sgs(instance, config.sgs, start);
      out.primal = std::move(res.primal);
      out.report = std::move(res.report);
      out.state.sgs = std::move(res.dual);
      break;
    }
    case Method::Ibp: {
      auto res = solve_ibp(instance, config.ibp);
      out.primal = std::move(res.primal);
      out.report = std::move(res.report);
      out.marginal_checks = std::move(res.marginal_checks);
      break;
    }
    case Method::Badmm: {
      const BadmmState* start = warm && warm->badmm ? &*warm->badmm : nullptr;
      auto res = solve_badmm(instance, config.badmm, start);
      out.primal = std::move(res.primal);
      out.report = std::move(res.report);
      out.state.badmm = std::move(res.state);
      out.marginal_checks = std::move(res.marginal_checks);
      break;
    }
    case Method::Oracle: {
      auto res = solve_lp_exact(instance, config.lp);
      out.primal = std::move(res.primal);
      out.report.method = "oracle";
      out.report.iterations = res.pivots;
      out.report.wall_time = res.wall_time;
      out.report.converged = true;
      out.report.status = "optimal";
      out.report.residuals = primal_residuals(instance, out.primal);
      out.report.residuals.obj_D = res.dual_objective;
      out.report.termination_residuals = out.report.residuals;
      out.report.objective = res.objective;
      out.report.notes.push_back("revised simplex, " + std::to_string(res.pivots) + " pivots (" +
                                 std::to_string(res.bland_pivots) + " under Bland's rule)");
      break;
    }
  }
  return out;
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::Sgs: return "sgs";
    case Method::Ibp: return "ibp";
    case Method::Badmm: return "badmm";
    case Method::Oracle: return "oracle";
  }
  return "sgs";
}

Method parse_method(const std::string& name) {
  if (name == "sgs") return Method::Sgs;
  if (name == "ibp") return Method::Ibp;
  if (name == "badmm") return Method::Badmm;
  if (name == "oracle") return Method::Oracle;
  throw InvalidArgument("unknown method '" + name + "' (expected sgs, ibp, badmm or oracle)");
}

SolveOutcome solve(const BarycenterInstance& instance, const SolverConfig& config,
                   const WarmStart* warm_start) {
  if (!config.presolve) return run_method(instance, config, warm_start);

  const Reduction red = reduce(instance);
  if (red.map.is_identity()) {
    SolveOutcome out = run_method(instance, config, warm_start);
    out.report.notes.push_back("presolve: nothing to remove");
    return out;
  }
  SolveOutcome out = run_method(red.instance, config, warm_start);
  out.primal = expand(out.primal, red.map);
  const double objective = primal_objective(instance, out.primal);
  const double obj_D = out.report.residuals.obj_D;
  out.report.residuals = primal_residuals(instance, out.primal);
  out.report.residuals.obj_D = obj_D;
  out.report.objective = objective;
  std::size_t before = 0, after = 0;
  for (std::size_t t = 0; t < red.map.kept.size(); ++t) {
    before += red.map.original_sizes[t];
    after += red.map.kept[t].size();
  }
  out.report.notes.push_back("presolve: " + std::to_string(before) + " columns reduced to " +
                             std::to_string(after) +
                             "; residuals of the reduced solve are in termination_residuals "
                             "for sgs");
  return out;
}

}  // namespace wbc
