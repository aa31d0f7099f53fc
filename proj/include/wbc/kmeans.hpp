#pragma once

#include <cstdint>

#include "wbc/types.hpp"

namespace wbc {

/// Lloyd's algorithm with k-means++ seeding, one replicate, at most
/// `max_iter` iterations. `points` is d x P; returns d x k centroids.
/// Empty clusters keep their previous centroid.
Matrix kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
              std::size_t max_iter = 100);

}  // namespace wbc
