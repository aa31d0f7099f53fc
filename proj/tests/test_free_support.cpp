#include <doctest.h>

#include <cmath>

#include "wbc/free_support.hpp"
#include "wbc/kmeans.hpp"
#include "wbc/random.hpp"

using namespace wbc;

namespace {

Matrix row(std::initializer_list<double> xs) {
  Matrix X(1, Eigen::Index(xs.size()));
  Eigen::Index j = 0;
  for (double x : xs) X(0, j++) = x;
  return X;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(Eigen::Index(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

DiscreteDistribution random_distribution(Rng& rng, std::size_t n, std::size_t d) {
  DiscreteDistribution dist{Vector(n), Matrix(d, n)};
  for (Eigen::Index k = 0; k < dist.supports.size(); ++k) dist.supports(k) = rng.normal();
  for (Eigen::Index k = 0; k < dist.weights.size(); ++k) dist.weights[k] = rng.uniform() + 0.1;
  dist.weights /= dist.weights.sum();
  return dist;
}

SolverConfig oracle_inner() {
  SolverConfig c;
  c.method = Method::Oracle;
  return c;
}

}  // namespace

TEST_CASE("support update examples") {
  DiscreteDistribution d{vec({0.5, 0.5}), row({3, 7})};
  const Matrix prev = row({0, 0});
  // Diagonal plan sends each barycenter point onto its partner.
  Matrix P = Matrix::Zero(2, 2);
  P(0, 0) = 0.5;
  P(1, 1) = 0.5;
  const Matrix X = update_supports({P}, {d}, Vector(), prev);
  CHECK(X(0, 0) == 3.0);
  CHECK(X(0, 1) == 7.0);

  // One point matched to 0 and to 4 moves to the gamma-weighted mean.
  DiscreteDistribution a{vec({1.0}), row({0})};
  DiscreteDistribution b{vec({1.0}), row({4})};
  const Matrix Y = update_supports({Matrix::Ones(1, 1), Matrix::Ones(1, 1)}, {a, b},
                                   vec({0.5, 0.5}), row({9}));
  CHECK(Y(0, 0) == 2.0);
  const Matrix Z = update_supports({Matrix::Ones(1, 1), Matrix::Ones(1, 1)}, {a, b},
                                   vec({0.25, 0.75}), row({9}));
  CHECK(Z(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("rows without mass keep their position and are reported") {
  DiscreteDistribution d{vec({1.0}), row({5})};
  Matrix P(2, 1);
  P << 1.0, 0.0;
  std::vector<std::size_t> stalled;
  const Matrix X = update_supports({P}, {d}, Vector(), row({1, -3}), &stalled);
  CHECK(X(0, 0) == 5.0);
  CHECK(X(0, 1) == -3.0);
  CHECK(stalled == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(update_supports({P, P}, {d}, Vector(), row({1, -3})), ShapeMismatch);
}

TEST_CASE("property: support update equals the weighted-mean oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DiscreteDistribution> dists;
    MatrixList plans;
    const std::size_t m = 4, d = 3;
    for (std::size_t t = 0; t < 3; ++t) {
      dists.push_back(random_distribution(rng, 5, d));
      Matrix P(m, 5);
      for (Eigen::Index k = 0; k < P.size(); ++k) P(k) = rng.uniform();
      plans.push_back(P);
    }
    const Vector g = vec({0.2, 0.3, 0.5});
    const Matrix X = update_supports(plans, dists, g, Matrix::Zero(d, m));
    for (std::size_t i = 0; i < m; ++i) {
      Vector num = Vector::Zero(d);
      double den = 0;
      for (std::size_t t = 0; t < 3; ++t)
        for (Eigen::Index j = 0; j < 5; ++j) {
          const double wgt = g[Eigen::Index(t)] * plans[t](Eigen::Index(i), j);
          num += wgt * dists[t].supports.col(j);
          den += wgt;
        }
      CHECK((X.col(Eigen::Index(i)) - num / den).cwiseAbs().maxCoeff() <= 1e-13);
    }
  }
}

TEST_CASE("property: with plans fixed the support update does not increase the objective") {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DiscreteDistribution> dists;
    for (std::size_t t = 0; t < 3; ++t) dists.push_back(random_distribution(rng, 6, 2));
    const Vector g = Vector::Constant(3, 1.0 / 3);
    Matrix X0(2, 4);
    for (Eigen::Index k = 0; k < X0.size(); ++k) X0(k) = 3 * rng.normal();
    MatrixList plans;
    for (std::size_t t = 0; t < 3; ++t) {
      Matrix P(4, 6);
      for (Eigen::Index k = 0; k < P.size(); ++k) P(k) = rng.uniform();
      plans.push_back(P);
    }
    const Matrix X1 = update_supports(plans, dists, g, X0);
    const double before = primal_objective(BarycenterInstance::from_distributions(dists, X0, 2.0, g), plans);
    const double after = primal_objective(BarycenterInstance::from_distributions(dists, X1, 2.0, g), plans);
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("k-means examples") {
  Matrix pts(1, 6);
  pts << 0, 0.1, 0.2, 10, 10.1, 10.2;
  Matrix C = kmeans(pts, 2, 1);
  if (C(0, 0) > C(0, 1)) std::swap(C(0, 0), C(0, 1));
  CHECK(C(0, 0) == doctest::Approx(0.1));
  CHECK(C(0, 1) == doctest::Approx(10.1));
  CHECK(kmeans(pts, 2, 1) == kmeans(pts, 2, 1));
  CHECK(kmeans(pts, 1, 5)(0, 0) == doctest::Approx(5.1));

  std::vector<DiscreteDistribution> dists{{vec({1.0}), row({0})}};
  CHECK_THROWS_AS(init_supports_kmeans(dists, 2, 1), InvalidArgument);
}

TEST_CASE("N = 1: the barycenter of one distribution is itself") {
  Rng rng(4);
  const auto dist = random_distribution(rng, 5, 2);
  FreeSupportOptions opts;
  opts.m = 5;
  opts.inner = oracle_inner();
  const auto res = solve_free({dist}, Vector(), opts);
  CHECK(res.report.objective <= 1e-6);
  CHECK(res.report.converged);
  CHECK(std::abs(res.barycenter.weights.sum() - 1.0) <= 1e-12);
}

TEST_CASE("two point masses at 0 and 2 meet at 1") {
  std::vector<DiscreteDistribution> dists{{vec({1.0}), row({0})}, {vec({1.0}), row({2})}};
  FreeSupportOptions opts;
  opts.m = 1;
  opts.inner = oracle_inner();
  const auto res = solve_free(dists, Vector(), opts);
  CHECK(res.barycenter.supports(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.report.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.barycenter.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("property: exact inner solves give a non-increasing outer objective") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::vector<DiscreteDistribution> dists;
    for (std::size_t t = 0; t < 3; ++t) dists.push_back(random_distribution(rng, 6, 2));
    FreeSupportOptions opts;
    opts.m = 4;
    opts.inner = oracle_inner();
    opts.seed = seed;
    opts.max_outer = 15;
    const auto res = solve_free(dists, Vector(), opts);
    for (std::size_t k = 1; k < res.objectives.size(); ++k)
      CHECK(res.objectives[k] <= res.objectives[k - 1] + 1e-10);
  }
}

TEST_CASE("inexact inner solvers run and report") {
  Rng rng(9);
  std::vector<DiscreteDistribution> dists;
  for (std::size_t t = 0; t < 3; ++t) dists.push_back(random_distribution(rng, 8, 2));
  for (auto method : {Method::Sgs, Method::Ibp, Method::Badmm}) {
    FreeSupportOptions opts;
    opts.m = 5;
    opts.inner.method = method;
    opts.inner.ibp.epsilon = 0.01;
    opts.max_outer = 10;
    const auto res = solve_free(dists, Vector(), opts);
    CHECK(res.report.iterations >= 2);
    CHECK(res.barycenter.weights.minCoeff() >= 0.0);
    CHECK(std::abs(res.barycenter.weights.sum() - 1.0) <= 1e-12);
    CHECK(res.report.trace.rows.size() == res.report.iterations);
    CHECK(res.barycenter.supports.cols() == 5);
  }
}

TEST_CASE("inner caps and validation") {
  SolverConfig c;
  CHECK(default_inner_max_iter(c) == 10);
  c.method = Method::Badmm;
  CHECK(default_inner_max_iter(c) == 10);
  c.method = Method::Ibp;
  c.ibp.epsilon = 0.01;
  CHECK(default_inner_max_iter(c) == 100);
  c.ibp.epsilon = 1e-3;
  CHECK(default_inner_max_iter(c) == 1000);

  FreeSupportOptions opts;
  opts.m = 0;
  CHECK_THROWS_AS(opts.validate(), InvalidArgument);
  opts.m = 2;
  opts.initial_supports = Matrix::Zero(1, 3);
  CHECK_THROWS_AS(opts.validate(), ShapeMismatch);
}
