#include "wbc/kmeans.hpp"

#include <limits>
#include <vector>

#include "wbc/random.hpp"

namespace wbc {

Matrix kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
              std::size_t max_iter) {
  const Eigen::Index n = points.cols();
  if (k == 0) throw InvalidArgument("k-means needs k >= 1");
  if (static_cast<std::size_t>(n) < k)
    throw InvalidArgument("k-means pool has " + std::to_string(n) +
                          " points, fewer than k = " + std::to_string(k));
  if (!points.allFinite()) throw InvalidArgument("k-means points must be finite");

  Rng rng(seed);
  const auto kk = static_cast<Eigen::Index>(k);
  Matrix centers(points.rows(), kk);

  // k-means++ seeding.
  centers.col(0) = points.col(static_cast<Eigen::Index>(rng.below(std::uint64_t(n))));
  Vector dist2(n);
  for (Eigen::Index p = 0; p < n; ++p) dist2[p] = (points.col(p) - centers.col(0)).squaredNorm();
  for (Eigen::Index c = 1; c < kk; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick = n - 1;
    if (total > 0) {
      const double target = rng.uniform() * total;
      double acc = 0;
      for (Eigen::Index p = 0; p < n; ++p) {
        acc += dist2[p];
        if (acc >= target && dist2[p] > 0) {
          pick = p;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(std::uint64_t(n)));
    }
    centers.col(c) = points.col(pick);
    for (Eigen::Index p = 0; p < n; ++p)
      dist2[p] = std::min(dist2[p], (points.col(p) - centers.col(c)).squaredNorm());
  }

  // Lloyd iterations.
  std::vector<Eigen::Index> label(static_cast<std::size_t>(n), -1);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Eigen::Index p = 0; p < n; ++p) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < kk; ++c) {
        const double d = (points.col(p) - centers.col(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (label[static_cast<std::size_t>(p)] != best) {
        label[static_cast<std::size_t>(p)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(points.rows(), kk);
    std::vector<std::size_t> counts(k, 0);
    for (Eigen::Index p = 0; p < n; ++p) {
      sums.col(label[static_cast<std::size_t>(p)]) += points.col(p);
      ++counts[static_cast<std::size_t>(label[static_cast<std::size_t>(p)])];
    }
    for (Eigen::Index c = 0; c < kk; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centers.col(c) = sums.col(c) / double(counts[static_cast<std::size_t>(c)]);
  }
  return centers;
}

}  // namespace wbc
