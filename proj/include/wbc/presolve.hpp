#pragma once

#include <vector>

#include "wbc/model.hpp"

namespace wbc {

/// Marginal entries at or below this are structural zeros.
inline constexpr double kStructuralZero = 1e-15;

/// Columns kept per distribution, strictly increasing, plus the original
/// column counts.
struct ReductionMap {
  std::vector<std::vector<std::size_t>> kept;
  std::vector<std::size_t> original_sizes;

  bool is_identity() const;
};

struct Reduction {
  BarycenterInstance instance;
  ReductionMap map;
};

/// Drops the zero-weight columns of every cost matrix and marginal. Throws
/// InvalidArgument when a marginal has no positive entry.
Reduction reduce(const BarycenterInstance& instance);

/// Re-inserts zero columns at the dropped positions; w passes through.
PrimalSolution expand(const PrimalSolution& reduced, const ReductionMap& map);

}  // namespace wbc
