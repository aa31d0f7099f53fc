#pragma once

#include <string>
#include <vector>

#include "wbc/model.hpp"

namespace wbc {

// Instance files come in two layouts:
//   {"N", "m", "p", "gammas", "distributions": [{"weights": [...],
//    "supports": [[x, ...], ...]}, ...], "barycenter_supports": [[x, ...], ...]}
// with one inner array per point, or precomputed costs
//   {"cost_matrices": [[[row], ...], ...], "marginals": [[...], ...],
//    "gammas": [...]}
// with each cost matrix given as m rows. Costs of the second layout are used
// as given (already multiplied by gamma).

BarycenterInstance parse_instance(const std::string& text);
BarycenterInstance load_instance(const std::string& path);

/// Writes the support-point layout when the instance carries supports,
/// otherwise the cost layout.
std::string instance_to_json(const BarycenterInstance& instance, int indent = -1);

std::string report_to_json(const SolveReport& report, int indent = 2);

/// {"w", "objective", "residuals", "method", "status", ...}; plans only
/// when `emit_plans` (they hold m * sum m_t numbers).
std::string solution_to_json(const PrimalSolution& solution, const SolveReport& report,
                             bool emit_plans, int indent = 2);

/// Reads a solution file back. Plans are empty when the file has none.
PrimalSolution parse_solution(const std::string& text);

std::string distribution_to_json(const DiscreteDistribution& distribution, int indent = 2);

/// Input distributions of a support-point instance file (for free support).
/// Gammas are returned through `gammas`, empty when absent.
std::vector<DiscreteDistribution> load_distributions(const std::string& path, Vector* gammas);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace wbc
