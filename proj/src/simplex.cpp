#include "wbc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace wbc {

namespace {

void require_finite(const Vector& v) {
  if (v.size() == 0) throw InvalidArgument("cannot project an empty vector");
  if (!v.allFinite()) throw InvalidArgument("simplex projection of non-finite input");
}

// Thresholds at tau and spreads the leftover (sum - 1) over the active set.
Vector threshold(const Vector& v, double tau) {
  Vector x = (v.array() - tau).cwiseMax(0.0);
  Eigen::Index active = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) active += x[i] > 0;
  if (active == 0) {
    // Only reachable through round-off with a single dominant entry.
    Eigen::Index k = 0;
    v.maxCoeff(&k);
    x.setZero();
    x[k] = 1.0;
    return x;
  }
  const double excess = (x.sum() - 1.0) / double(active);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] > 0) x[i] = std::max(x[i] - excess, 0.0);
  return x;
}

}  // namespace

Vector project_simplex(const Vector& y) {
  require_finite(y);
  const Eigen::Index n = y.size();

  // Condat (2016), Algorithm 2 with the online filtering of Algorithm 3.
  std::vector<double> v;
  std::vector<double> v_tilde;
  v.reserve(static_cast<std::size_t>(n));
  v.push_back(y[0]);
  double rho = y[0] - 1.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    const double yk = y[k];
    if (yk > rho) {
      rho += (yk - rho) / double(v.size() + 1);
      if (rho > yk - 1.0) {
        v.push_back(yk);
      } else {
        v_tilde.insert(v_tilde.end(), v.begin(), v.end());
        v.assign(1, yk);
        rho = yk - 1.0;
      }
    }
  }
  for (double yk : v_tilde) {
    if (yk > rho) {
      v.push_back(yk);
      rho += (yk - rho) / double(v.size());
    }
  }
  for (;;) {
    const std::size_t before = v.size();
    std::vector<double> kept;
    kept.reserve(before);
    for (double yk : v)
      if (yk > rho) kept.push_back(yk);
    if (kept.size() == before) break;
    // Exact recompute of the threshold on the surviving set.
    double sum = 0;
    for (double yk : kept) sum += yk;
    rho = (sum - 1.0) / double(kept.size());
    v.swap(kept);
  }
  return threshold(y, rho);
}

Vector project_simplex_reference(const Vector& y) {
  require_finite(y);
  std::vector<double> u(y.data(), y.data() + y.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0;
  double tau = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double candidate = (cumulative - 1.0) / double(k + 1);
    if (u[k] - candidate > 0) tau = candidate;
  }
  return threshold(y, tau);
}

Vector prox_support_function(const Vector& y, double beta) {
  if (!(beta > 0) || !std::isfinite(beta))
    throw InvalidArgument("prox_support_function requires beta > 0");
  return y - project_simplex(beta * y) / beta;
}

}  // namespace wbc
