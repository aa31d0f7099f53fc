#pragma once

#include <cstdint>
#include <vector>

#include "wbc/model.hpp"

namespace wbc {

class Rng;

/// One-dimensional Gaussian mixture: means (-20, -10, 0, 10, 20), common
/// variance 5, component weights drawn uniform(0, 1) and normalized.
struct GaussianMixture1D {
  std::vector<double> means{-20, -10, 0, 10, 20};
  double variance = 5.0;
  std::vector<double> weights;

  static GaussianMixture1D random(Rng& rng);
  double sample(Rng& rng) const;
};

// Random draw order for every generator: mixture weights (5 uniforms), then
// for each t the support coordinates (column by column), then the weights.
// Barycenter supports come from k-means over the pooled points with a seed
// derived from the same stream.

/// Case 1: dense uniform weights, distinct supports per distribution.
BarycenterInstance gen_case1(std::size_t N, std::size_t m, std::size_t m_prime,
                             std::size_t d, std::uint64_t seed);

/// Case 2: s = floor(m' * sr) nonzero weights per distribution on a random
/// index set; k-means runs on the nonzero-weight points only.
BarycenterInstance gen_case2(std::size_t N, std::size_t m, std::size_t m_prime,
                             double sr, std::size_t d, std::uint64_t seed);

/// Case 3: one support set of m points shared by every distribution and the
/// barycenter; dense uniform weights.
BarycenterInstance gen_case3(std::size_t N, std::size_t m, std::size_t d,
                             std::uint64_t seed);

/// n uniform grid points on [lo, hi] with weights proportional to the normal
/// density, normalized.
DiscreteDistribution discretize_gaussian(double mu, double sigma, double lo, double hi,
                                         std::size_t n);

struct GaussianPair {
  BarycenterInstance instance;
  Vector true_barycenter;  // discretized N(0, (5/8)^2) on the same grid
};

/// N(-2, (1/4)^2) and N(2, 1) discretized on [-4, 5] with n points; the grid
/// is also the barycenter support.
GaussianPair gaussian_pair_instance(std::size_t n);

}  // namespace wbc
