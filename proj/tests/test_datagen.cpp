#include <doctest.h>

#include <cmath>

#include "wbc/datagen.hpp"
#include "wbc/random.hpp"

using namespace wbc;

namespace {

void check_simplex(const Vector& a) {
  CHECK(a.minCoeff() >= 0.0);
  CHECK(std::abs(a.sum() - 1.0) <= 1e-12);
}

double mean(const DiscreteDistribution& d) { return d.weights.dot(d.supports.row(0).transpose()); }

double stddev(const DiscreteDistribution& d) {
  const double mu = mean(d);
  const Vector x = d.supports.row(0).transpose().array() - mu;
  return std::sqrt(d.weights.dot(x.cwiseProduct(x)));
}

}  // namespace

TEST_CASE("Case 1 shapes and marginals") {
  const auto inst = gen_case1(4, 6, 9, 3, 11);
  CHECK(inst.num_distributions() == 4);
  CHECK(inst.support_size() == 6);
  REQUIRE(inst.barycenter_supports().has_value());
  CHECK(inst.barycenter_supports()->rows() == 3);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(inst.marginal_size(t) == 9);
    CHECK(inst.marginal(t).minCoeff() > 0.0);
    check_simplex(inst.marginal(t));
    CHECK(inst.distribution_supports()[t].rows() == 3);
    CHECK(inst.cost(t).minCoeff() >= 0.0);
  }
  CHECK(inst.gammas()[0] == doctest::Approx(0.25));
  // Distinct supports per distribution.
  CHECK(inst.distribution_supports()[0] != inst.distribution_supports()[1]);
}

TEST_CASE("Case 2 has exactly floor(m' * sr) nonzero weights") {
  for (double sr : {0.1, 0.25, 0.5, 1.0}) {
    const auto inst = gen_case2(3, 5, 20, sr, 2, 4);
    const auto s = static_cast<Eigen::Index>(std::floor(20 * sr));
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK((inst.marginal(t).array() > 0).count() == s);
      check_simplex(inst.marginal(t));
    }
  }
  CHECK_THROWS_AS(gen_case2(3, 5, 20, 0.0, 2, 4), InvalidArgument);
  CHECK_THROWS_AS(gen_case2(3, 5, 20, 0.01, 2, 4), InvalidArgument);
}

TEST_CASE("Case 3 shares one support set") {
  const auto inst = gen_case3(5, 7, 2, 3);
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(inst.distribution_supports()[t] == *inst.barycenter_supports());
    check_simplex(inst.marginal(t));
    // Diagonal costs vanish on a shared support.
    CHECK(inst.cost(t).diagonal().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("generators are deterministic in the seed") {
  const auto a = gen_case1(3, 4, 5, 2, 99);
  const auto b = gen_case1(3, 4, 5, 2, 99);
  const auto c = gen_case1(3, 4, 5, 2, 100);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(a.cost(t) == b.cost(t));
    CHECK(a.marginal(t) == b.marginal(t));
  }
  CHECK(a.cost(0) != c.cost(0));
  CHECK(gen_case2(2, 3, 10, 0.3, 1, 5).marginal(1) == gen_case2(2, 3, 10, 0.3, 1, 5).marginal(1));
  CHECK(gen_case3(2, 3, 1, 5).cost(0) == gen_case3(2, 3, 1, 5).cost(0));
  CHECK_THROWS_AS(gen_case1(0, 4, 5, 2, 1), InvalidArgument);
}

TEST_CASE("mixture sampling follows the component weights") {
  Rng rng(5);
  auto gm = GaussianMixture1D::random(rng);
  CHECK(gm.weights.size() == 5);
  double total = 0;
  for (double w : gm.weights) total += w;
  CHECK(total == doctest::Approx(1.0));
  gm.weights = {0, 0, 0, 0, 1};
  double acc = 0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) acc += gm.sample(rng);
  // Standard error sqrt(5 / 20000) ~ 0.016.
  CHECK(std::abs(acc / n - 20.0) < 0.1);
}

TEST_CASE("discretized Gaussian: simplex, symmetry, mode") {
  const auto d = discretize_gaussian(0.0, 1.0, -3.0, 3.0, 61);
  check_simplex(d.weights);
  for (Eigen::Index k = 0; k < 61; ++k) CHECK(d.weights[k] == doctest::Approx(d.weights[60 - k]).epsilon(1e-14));
  Eigen::Index arg = 0;
  d.weights.maxCoeff(&arg);
  CHECK(arg == 30);
  CHECK(d.supports(0, 0) == -3.0);
  CHECK(d.supports(0, 60) == 3.0);
  CHECK_THROWS_AS(discretize_gaussian(0, 0, -1, 1, 5), InvalidArgument);
  CHECK_THROWS_AS(discretize_gaussian(0, 1, 1, -1, 5), InvalidArgument);
}

TEST_CASE("Gaussian pair: inputs and true barycenter match their moments") {
  const auto pair = gaussian_pair_instance(400);
  const auto& inst = pair.instance;
  CHECK(inst.num_distributions() == 2);
  CHECK(inst.support_size() == 400);
  DiscreteDistribution truth{pair.true_barycenter, inst.distribution_supports()[0]};
  DiscreteDistribution first{inst.marginal(0), inst.distribution_supports()[0]};
  DiscreteDistribution second{inst.marginal(1), inst.distribution_supports()[1]};
  CHECK(std::abs(mean(truth)) <= 0.02 * 0.625);
  CHECK(std::abs(stddev(truth) - 0.625) <= 0.02 * 0.625);
  CHECK(std::abs(mean(first) + 2.0) <= 0.02 * 2.0);
  CHECK(std::abs(stddev(first) - 0.25) <= 0.02 * 0.25);
  CHECK(std::abs(mean(second) - 2.0) <= 0.02 * 2.0);
  CHECK(std::abs(stddev(second) - 1.0) <= 0.02 * 1.0);
}
