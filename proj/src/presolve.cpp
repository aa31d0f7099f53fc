#include "wbc/presolve.hpp"

namespace wbc {

bool ReductionMap::is_identity() const {
  for (std::size_t t = 0; t < kept.size(); ++t)
    if (kept[t].size() != original_sizes[t]) return false;
  return true;
}

Reduction reduce(const BarycenterInstance& instance) {
  Reduction out;
  MatrixList costs;
  VectorList marginals;
  for (std::size_t t = 0; t < instance.num_distributions(); ++t) {
    const Vector& a = instance.marginal(t);
    std::vector<std::size_t> kept;
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if (a[j] > kStructuralZero) kept.push_back(static_cast<std::size_t>(j));
    if (kept.empty())
      throw InvalidArgument("distribution " + std::to_string(t) + " has no positive weight");
    const auto k = static_cast<Eigen::Index>(kept.size());
    Matrix D(instance.cost(t).rows(), k);
    Vector b(k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const auto j = static_cast<Eigen::Index>(kept[std::size_t(c)]);
      D.col(c) = instance.cost(t).col(j);
      b[c] = a[j];
    }
    costs.push_back(std::move(D));
    marginals.push_back(std::move(b));
    out.map.kept.push_back(std::move(kept));
    out.map.original_sizes.push_back(static_cast<std::size_t>(a.size()));
  }
  out.instance =
      BarycenterInstance::from_costs(std::move(costs), std::move(marginals), instance.gammas());
  return out;
}

PrimalSolution expand(const PrimalSolution& reduced, const ReductionMap& map) {
  if (reduced.plans.size() != map.kept.size())
    throw ShapeMismatch("plan count does not match the reduction map");
  PrimalSolution full;
  full.w = reduced.w;
  for (std::size_t t = 0; t < map.kept.size(); ++t) {
    const Matrix& P = reduced.plans[t];
    if (P.rows() != reduced.w.size() || static_cast<std::size_t>(P.cols()) != map.kept[t].size())
      throw ShapeMismatch("reduced plan " + std::to_string(t) + " does not match the map");
    Matrix F = Matrix::Zero(P.rows(), static_cast<Eigen::Index>(map.original_sizes[t]));
    for (std::size_t c = 0; c < map.kept[t].size(); ++c)
      F.col(static_cast<Eigen::Index>(map.kept[t][c])) = P.col(static_cast<Eigen::Index>(c));
    full.plans.push_back(std::move(F));
  }
  return full;
}

}  // namespace wbc
