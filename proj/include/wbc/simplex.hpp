#pragma once

#include "wbc/types.hpp"

namespace wbc {

/// Euclidean projection onto the probability simplex
/// {w : w >= 0, sum(w) = 1}, using Condat's scan-based algorithm (linear
/// time in practice). After thresholding, the residual (sum - 1) is
/// subtracted once, evenly over the active set.
Vector project_simplex(const Vector& v);

/// Sort-and-threshold projection, O(m log m). Same contract as
/// project_simplex; kept as the reference the fast path is tested against.
Vector project_simplex_reference(const Vector& v);

/// Proximal map of beta^{-1} times the support function of the simplex,
/// computed through the Moreau decomposition:
///   y - beta^{-1} * project_simplex(beta * y).
Vector prox_support_function(const Vector& y, double beta);

}  // namespace wbc
