#pragma once

// Small random instances shared by the tests.

#include <cstdint>

#include "wbc/model.hpp"
#include "wbc/random.hpp"

namespace wbc::testing {

// Costs uniform on [0, scale), marginals uniform then normalized.
inline BarycenterInstance random_costs_instance(std::size_t N, std::size_t m, std::size_t mt,
                                                std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  MatrixList D;
  VectorList a;
  for (std::size_t t = 0; t < N; ++t) {
    Matrix C(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(mt));
    for (Eigen::Index k = 0; k < C.size(); ++k) C(k) = scale * rng.uniform();
    Vector w(static_cast<Eigen::Index>(mt));
    for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = rng.uniform();
    D.push_back(C);
    a.push_back(w / w.sum());
  }
  return BarycenterInstance::from_costs(D, a);
}

// Squared-Euclidean costs between random points in the plane.
inline BarycenterInstance random_points_instance(std::size_t N, std::size_t m, std::size_t mt,
                                                 std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DiscreteDistribution> dists;
  for (std::size_t t = 0; t < N; ++t) {
    DiscreteDistribution d;
    d.supports.resize(2, Eigen::Index(mt));
    for (Eigen::Index k = 0; k < d.supports.size(); ++k) d.supports(k) = rng.normal();
    d.weights.resize(Eigen::Index(mt));
    for (Eigen::Index k = 0; k < d.weights.size(); ++k) d.weights[k] = rng.uniform();
    d.weights /= d.weights.sum();
    dists.push_back(d);
  }
  Matrix X(2, Eigen::Index(m));
  for (Eigen::Index k = 0; k < X.size(); ++k) X(k) = rng.normal();
  return BarycenterInstance::from_distributions(dists, X);
}

}  // namespace wbc::testing
