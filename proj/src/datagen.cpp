#include "wbc/datagen.hpp"

#include <cmath>
#include <numeric>

#include "wbc/kmeans.hpp"
#include "wbc/random.hpp"

namespace wbc {

namespace {

Vector uniform_weights(Rng& rng, std::size_t n) {
  Vector w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.uniform();
  return w / w.sum();
}

Matrix mixture_points(Rng& rng, const GaussianMixture1D& gm, std::size_t d, std::size_t n) {
  Matrix pts(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < pts.cols(); ++j)
    for (Eigen::Index r = 0; r < pts.rows(); ++r) pts(r, j) = gm.sample(rng);
  return pts;
}

void require_positive(std::size_t v, const char* name) {
  if (v == 0) throw InvalidArgument(std::string(name) + " must be >= 1");
}

BarycenterInstance assemble(std::vector<DiscreteDistribution> dists, const Matrix& pool,
                            std::size_t m, Rng& rng) {
  const Matrix centers = kmeans(pool, m, rng.derive());
  return BarycenterInstance::from_distributions(dists, centers, 2.0);
}

}  // namespace

GaussianMixture1D GaussianMixture1D::random(Rng& rng) {
  GaussianMixture1D gm;
  double total = 0;
  for (std::size_t c = 0; c < gm.means.size(); ++c) {
    gm.weights.push_back(rng.uniform());
    total += gm.weights.back();
  }
  for (double& w : gm.weights) w /= total;
  return gm;
}

double GaussianMixture1D::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0;
  std::size_t c = means.size() - 1;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) {
      c = k;
      break;
    }
  }
  return means[c] + std::sqrt(variance) * rng.normal();
}

BarycenterInstance gen_case1(std::size_t N, std::size_t m, std::size_t m_prime,
                             std::size_t d, std::uint64_t seed) {
  require_positive(N, "N");
  require_positive(m, "m");
  require_positive(m_prime, "m'");
  require_positive(d, "d");
  Rng rng(seed);
  const auto gm = GaussianMixture1D::random(rng);
  std::vector<DiscreteDistribution> dists;
  Matrix pool(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(N * m_prime));
  for (std::size_t t = 0; t < N; ++t) {
    DiscreteDistribution dist;
    dist.supports = mixture_points(rng, gm, d, m_prime);
    dist.weights = uniform_weights(rng, m_prime);
    pool.middleCols(static_cast<Eigen::Index>(t * m_prime), dist.supports.cols()) = dist.supports;
    dists.push_back(std::move(dist));
  }
  return assemble(std::move(dists), pool, m, rng);
}

BarycenterInstance gen_case2(std::size_t N, std::size_t m, std::size_t m_prime,
                             double sr, std::size_t d, std::uint64_t seed) {
  require_positive(N, "N");
  require_positive(m, "m");
  require_positive(m_prime, "m'");
  require_positive(d, "d");
  if (!(sr > 0 && sr <= 1)) throw InvalidArgument("sparsity ratio must lie in (0, 1]");
  const auto s = static_cast<std::size_t>(std::floor(double(m_prime) * sr));
  if (s == 0) throw InvalidArgument("floor(m' * sr) must be at least 1");

  Rng rng(seed);
  const auto gm = GaussianMixture1D::random(rng);
  std::vector<DiscreteDistribution> dists;
  Matrix pool(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(N * s));
  for (std::size_t t = 0; t < N; ++t) {
    DiscreteDistribution dist;
    dist.supports = mixture_points(rng, gm, d, m_prime);
    // Partial Fisher-Yates: the first s entries form a uniform random subset.
    std::vector<std::size_t> idx(m_prime);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t k = 0; k < s; ++k)
      std::swap(idx[k], idx[k + rng.below(m_prime - k)]);
    dist.weights = Vector::Zero(static_cast<Eigen::Index>(m_prime));
    for (std::size_t k = 0; k < s; ++k)
      dist.weights[static_cast<Eigen::Index>(idx[k])] = rng.uniform();
    dist.weights /= dist.weights.sum();
    for (std::size_t k = 0; k < s; ++k)
      pool.col(static_cast<Eigen::Index>(t * s + k)) =
          dist.supports.col(static_cast<Eigen::Index>(idx[k]));
    dists.push_back(std::move(dist));
  }
  return assemble(std::move(dists), pool, m, rng);
}

BarycenterInstance gen_case3(std::size_t N, std::size_t m, std::size_t d, std::uint64_t seed) {
  require_positive(N, "N");
  require_positive(m, "m");
  require_positive(d, "d");
  Rng rng(seed);
  const auto gm = GaussianMixture1D::random(rng);
  const Matrix shared = mixture_points(rng, gm, d, m);
  std::vector<DiscreteDistribution> dists;
  for (std::size_t t = 0; t < N; ++t) dists.push_back({uniform_weights(rng, m), shared});
  return BarycenterInstance::from_distributions(dists, shared, 2.0);
}

DiscreteDistribution discretize_gaussian(double mu, double sigma, double lo, double hi,
                                         std::size_t n) {
  if (n < 2) throw InvalidArgument("discretization needs n >= 2");
  if (!(sigma > 0)) throw InvalidArgument("sigma must be positive");
  if (!(lo < hi)) throw InvalidArgument("interval must satisfy lo < hi");
  DiscreteDistribution dist;
  dist.supports.resize(1, static_cast<Eigen::Index>(n));
  dist.weights.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < dist.weights.size(); ++k) {
    const double x = lo + (hi - lo) * double(k) / double(n - 1);
    dist.supports(0, k) = x;
    const double r = (x - mu) / sigma;
    dist.weights[k] = std::exp(-0.5 * r * r);
  }
  dist.weights /= dist.weights.sum();
  return dist;
}

GaussianPair gaussian_pair_instance(std::size_t n) {
  const double lo = -4.0;
  const double hi = 5.0;
  const auto first = discretize_gaussian(-2.0, 0.25, lo, hi, n);
  const auto second = discretize_gaussian(2.0, 1.0, lo, hi, n);
  const auto truth = discretize_gaussian(0.0, 0.625, lo, hi, n);
  GaussianPair out{BarycenterInstance::from_distributions({first, second}, first.supports, 2.0),
                   truth.weights};
  return out;
}

}  // namespace wbc
