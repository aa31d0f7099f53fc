#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support/instances.hpp"
#include "wbc/lp_oracle.hpp"

using namespace wbc;
using wbc::testing::random_costs_instance;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(Eigen::Index(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("oracle examples") {
  Matrix D(2, 2);
  D << 0, 1, 1, 0;
  const auto inst = BarycenterInstance::from_costs({D}, {vec({0.5, 0.5})});
  const auto lp = solve_lp_exact(inst);
  CHECK(std::abs(lp.objective) <= 1e-12);
  CHECK(feasibility_residual(inst, lp.primal) <= 1e-12);

  const auto zero = BarycenterInstance::from_costs({Matrix::Zero(3, 2)}, {vec({0.4, 0.6})});
  CHECK(std::abs(solve_lp_exact(zero).objective) <= 1e-12);
}

TEST_CASE("oracle: 2 x 1 instances by enumeration") {
  // Two point masses, two barycenter points. The barycenter places all mass
  // on the point minimizing c1_i + c2_i (costs already include gamma).
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(500 + trial);
    Matrix D1(2, 1), D2(2, 1);
    D1 << rng.uniform(), rng.uniform();
    D2 << rng.uniform(), rng.uniform();
    const auto inst = BarycenterInstance::from_costs({D1, D2}, {Vector::Ones(1), Vector::Ones(1)});
    const double best = std::min(D1(0, 0) + D2(0, 0), D1(1, 0) + D2(1, 0));
    CHECK(solve_lp_exact(inst).objective == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("oracle: feasibility, strong duality and KKT on random instances") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = random_costs_instance(3, 4, 5, seed);
    const auto lp = solve_lp_exact(inst);
    CHECK(feasibility_residual(inst, lp.primal) <= 1e-9);
    CHECK(std::abs(lp.objective - lp.dual_objective) <= 1e-9 * (1.0 + std::abs(lp.objective)));
    CHECK(verify_kkt(inst, lp.primal, lp.y, lp.z) <= 1e-9);
    CHECK(lp.objective == doctest::Approx(primal_objective(inst, lp.primal)).epsilon(1e-12));
  }
}

TEST_CASE("oracle lower-bounds every feasible point") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = random_costs_instance(2, 5, 4, seed);
    const double opt = solve_lp_exact(inst).objective;
    Rng rng(seed);
    for (int k = 0; k < 10; ++k) {
      Vector w(5);
      for (Eigen::Index i = 0; i < 5; ++i) w[i] = rng.uniform();
      w /= w.sum();
      CHECK(opt <= primal_objective(inst, product_solution(inst, w)) + 1e-12);
    }
  }
}

TEST_CASE("verify_kkt detects broken complementarity and suboptimal points") {
  const auto inst = random_costs_instance(3, 4, 5, 3);
  const auto lp = solve_lp_exact(inst);
  // Raise y on a row where the plan has positive mass.
  VectorList y = lp.y;
  Eigen::Index r = 0, c = 0;
  lp.primal.plans[0].maxCoeff(&r, &c);
  y[0][r] += 0.1;
  CHECK(verify_kkt(inst, lp.primal, y, lp.z) >= 0.01);

  Vector w = Vector::Constant(4, 0.25);
  const auto prod = product_solution(inst, w);
  CHECK(verify_kkt(inst, prod, lp.y, lp.z) > 1e-6);
}

TEST_CASE("oracle_dual_iterate is a KKT point") {
  const auto inst = random_costs_instance(2, 3, 4, 5);
  const auto lp = solve_lp_exact(inst);
  const auto it = oracle_dual_iterate(inst, lp);
  CHECK((it.lambda - lp.primal.w).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t t = 0; t < 2; ++t) CHECK(it.V[t].minCoeff() >= -1e-12);
}

TEST_CASE("size guard") {
  const auto inst = random_costs_instance(1, 500, 401, 1);
  CHECK_THROWS_AS(solve_lp_exact(inst), SizeLimitExceeded);
}

TEST_CASE("degenerate instance with identical costs terminates") {
  const auto inst = BarycenterInstance::from_costs(
      {Matrix::Constant(4, 4, 1.0), Matrix::Constant(4, 4, 1.0)},
      {Vector::Constant(4, 0.25), Vector::Constant(4, 0.25)});
  const auto lp = solve_lp_exact(inst);
  // Costs are used as given: each plan carries unit mass at cost 1.
  CHECK(lp.objective == doctest::Approx(2.0).epsilon(1e-12));
}
