#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "wbc/random.hpp"
#include "wbc/simplex.hpp"

using namespace wbc;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(Eigen::Index(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Independent oracle: bisection on the threshold theta of
// sum(max(v - theta, 0)) = 1.
Vector bisection_projection(const Vector& v) {
  double lo = v.minCoeff() - 1.0, hi = v.maxCoeff();
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if ((v.array() - mid).max(0.0).sum() > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).max(0.0).matrix();
}

Vector random_vector(Rng& rng, Eigen::Index m) {
  Vector v(m);
  const double scale = std::pow(10.0, double(rng.below(5)) - 2.0);
  for (Eigen::Index i = 0; i < m; ++i) v[i] = scale * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("projection examples") {
  const Vector third = Vector::Constant(3, 1.0 / 3.0);
  for (auto* proj : {&project_simplex, &project_simplex_reference}) {
    CHECK((proj(third) - third).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((proj(vec({0.5, 0.5, 0.5})) - third).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((proj(vec({1.2, 0.4, -0.3})) - vec({0.9, 0.1, 0.0})).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("prox of the support function examples") {
  CHECK((prox_support_function(vec({1.2, 0.4, -0.3}), 1.0) - vec({0.3, 0.3, -0.3}))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);
  CHECK((prox_support_function(Vector::Zero(2), 1.0) - vec({-0.5, -0.5})).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK_THROWS_AS(prox_support_function(Vector::Zero(2), 0.0), InvalidArgument);
  CHECK_THROWS_AS(prox_support_function(Vector::Zero(2), -1.0), InvalidArgument);
}

TEST_CASE("non-finite input is rejected") {
  CHECK_THROWS_AS(project_simplex(vec({1.0, std::nan("")})), InvalidArgument);
  CHECK_THROWS_AS(project_simplex_reference(vec({INFINITY, 0.0})), InvalidArgument);
  CHECK_THROWS_AS(project_simplex(Vector()), InvalidArgument);
}

TEST_CASE("property: fast path agrees with the reference and with bisection") {
  Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto m = Eigen::Index(1 + rng.below(200));
    const Vector v = random_vector(rng, m);
    const Vector fast = project_simplex(v);
    const Vector ref = project_simplex_reference(v);
    REQUIRE((fast - ref).cwiseAbs().maxCoeff() <= 1e-12);
    REQUIRE((fast - bisection_projection(v)).cwiseAbs().maxCoeff() <= 1e-9);
    REQUIRE(fast.minCoeff() >= 0.0);
    REQUIRE(std::abs(fast.sum() - 1.0) <= 1e-14);
  }
}

TEST_CASE("property: projection optimality, idempotence and Moreau identity") {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const auto m = Eigen::Index(1 + rng.below(50));
    const Vector v = random_vector(rng, m);
    const Vector p = project_simplex(v);
    for (int k = 0; k < 5; ++k) {
      Vector z(m);
      for (Eigen::Index i = 0; i < m; ++i) z[i] = -std::log(rng.uniform());
      z /= z.sum();
      REQUIRE((v - p).norm() <= (v - z).norm() + 1e-12);
    }
    REQUIRE((project_simplex(p) - p).cwiseAbs().maxCoeff() <= 1e-15);
    const double beta = std::exp(2.0 * rng.normal());
    const Vector prox = prox_support_function(v, beta);
    REQUIRE((prox + project_simplex(beta * v) / beta - v).cwiseAbs().maxCoeff() <= 1e-12);
    // beta = 1: y - prox(y) lies on the simplex.
    const Vector r = v - prox_support_function(v, 1.0);
    REQUIRE(r.minCoeff() >= 0.0);
    REQUIRE(std::abs(r.sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("ties at the threshold") {
  const Vector v = vec({0.5, 0.5, 0.5, 0.5, -1.0});
  CHECK((project_simplex(v) - project_simplex_reference(v)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(project_simplex(v)[4] == 0.0);
  const Vector big = Vector::Constant(1000, 7.0);
  CHECK((project_simplex(big).array() - 1e-3).abs().maxCoeff() <= 1e-15);
}
