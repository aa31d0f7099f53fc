#include <doctest.h>

#include <cmath>

#include "support/instances.hpp"
#include "wbc/badmm.hpp"
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

double rel_inf(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

VectorList logs(std::initializer_list<Vector> vs) {
  VectorList out;
  for (const auto& v : vs) out.push_back(v.array().log().matrix());
  return out;
}

}  // namespace

TEST_CASE("Pi-update examples") {
  const auto inst = BarycenterInstance::from_costs({Matrix::Zero(2, 2)}, {vec({0.3, 0.7})});
  BadmmState s = badmm_initial_state(inst);
  s.Gamma[0].setConstant(0.25);
  badmm_pi_update(inst, s, 1.0);
  CHECK((s.Pi[0].col(0) - vec({0.15, 0.15})).cwiseAbs().maxCoeff() <= 1e-16);
  CHECK((s.Pi[0].col(1) - vec({0.35, 0.35})).cwiseAbs().maxCoeff() <= 1e-16);

  // rho -> infinity: Pi = Gamma Diag(a ./ Gamma^T e).
  const auto r = random_costs_instance(1, 3, 4, 5);
  BadmmState q = badmm_initial_state(r);
  Rng rng(3);
  for (Eigen::Index k = 0; k < q.Gamma[0].size(); ++k) q.Gamma[0](k) = rng.uniform();
  badmm_pi_update(r, q, 1e300);
  const Vector colsum = q.Gamma[0].colwise().sum().transpose();
  const Matrix expected = q.Gamma[0] * r.marginal(0).cwiseQuotient(colsum).asDiagonal();
  CHECK((q.Pi[0] - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("Pi-update: D = 0 and Lambda = 0 renormalize the columns of Gamma") {
  const auto inst = BarycenterInstance::from_costs({Matrix::Zero(3, 2)}, {vec({0.6, 0.4})});
  BadmmState s = badmm_initial_state(inst);
  s.Gamma[0] << 1, 2, 3, 4, 5, 6;
  badmm_pi_update(inst, s, 0.5);
  Matrix expected = s.Gamma[0];
  expected.col(0) *= 0.6 / 9.0;
  expected.col(1) *= 0.4 / 12.0;
  CHECK((s.Pi[0] - expected).cwiseAbs().maxCoeff() <= 1e-16);
}

TEST_CASE("w rules on hand data") {
  const VectorList l = logs({vec({1, 4}), vec({4, 1})});
  CHECK(rel_inf(combine_row_sums(l, WRule::R1), vec({0.5, 0.5})) <= 1e-15);
  CHECK(rel_inf(combine_row_sums(l, WRule::R2), vec({0.5, 0.5})) <= 1e-15);
  CHECK(rel_inf(combine_row_sums(l, WRule::Geometric), vec({0.5, 0.5})) <= 1e-15);

  // Asymmetric data separates the rules: w1 = (1, 9), w2 = (4, 1).
  const VectorList a = logs({vec({1, 9}), vec({4, 1})});
  CHECK(rel_inf(combine_row_sums(a, WRule::R1), vec({5.0 / 15, 10.0 / 15})) <= 1e-15);
  CHECK(rel_inf(combine_row_sums(a, WRule::R2), vec({9.0 / 25, 16.0 / 25})) <= 1e-15);
  CHECK(rel_inf(combine_row_sums(a, WRule::Geometric), vec({2.0 / 5, 3.0 / 5})) <= 1e-15);
}

TEST_CASE("Gamma/w update, N = 1, Lambda = 0: R1 gives normalized row sums of Pi") {
  const auto inst = BarycenterInstance::from_costs({Matrix::Zero(2, 2)}, {vec({0.5, 0.5})});
  BadmmState s = badmm_initial_state(inst);
  s.Pi[0] << 0.1, 0.2, 0.4, 0.3;
  badmm_gamma_w_update(inst, s, 1.0, WRule::R1);
  CHECK(rel_inf(s.w, vec({0.3, 0.7})) <= 1e-15);
  CHECK((s.Gamma[0] - s.Pi[0]).cwiseAbs().maxCoeff() <= 1e-16);
}

TEST_CASE("Gamma/w update, N = 1, geometric rule follows the closed form") {
  const auto inst = BarycenterInstance::from_costs({Matrix::Zero(2, 2)}, {vec({0.5, 0.5})});
  BadmmState s = badmm_initial_state(inst);
  s.Pi[0] << 0.1, 0.2, 0.4, 0.3;
  s.Lambda[0] << 0.5, -0.5, 1.0, 0.0;
  const double rho = 2.0;
  const Matrix scaled = s.Pi[0].cwiseProduct((s.Lambda[0] / rho).array().exp().matrix());
  const Vector rows = scaled.rowwise().sum();
  badmm_gamma_w_update(inst, s, rho, WRule::Geometric);
  CHECK(rel_inf(s.w, rows / rows.sum()) <= 1e-15);
  CHECK(rel_inf(s.Gamma[0].rowwise().sum(), s.w) <= 1e-15);
}

TEST_CASE("multiplier update") {
  BadmmState s;
  s.Pi = {Matrix::Constant(1, 1, 0.3)};
  s.Gamma = {Matrix::Constant(1, 1, 0.3)};
  s.Lambda = {Matrix::Constant(1, 1, 2.0)};
  badmm_multiplier_update(s, 1.0);
  CHECK(s.Lambda[0](0, 0) == 2.0);
  s.Pi[0](0, 0) = 0.4;
  badmm_multiplier_update(s, 1.0);
  CHECK(s.Lambda[0](0, 0) == doctest::Approx(2.1).epsilon(1e-15));
}

TEST_CASE("Lambda telescopes to rho times the accumulated Pi - Gamma") {
  const auto inst = random_costs_instance(2, 3, 4, 8);
  const double rho = 0.7;
  BadmmState s = badmm_initial_state(inst);
  MatrixList acc{Matrix::Zero(3, 4), Matrix::Zero(3, 4)};
  for (int k = 0; k < 25; ++k) {
    badmm_pi_update(inst, s, rho);
    badmm_gamma_w_update(inst, s, rho, WRule::R2);
    for (std::size_t t = 0; t < 2; ++t) acc[t] += s.Pi[t] - s.Gamma[t];
    badmm_multiplier_update(s, rho);
  }
  for (std::size_t t = 0; t < 2; ++t)
    CHECK((s.Lambda[t] - rho * acc[t]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("property: marginal exactness and w on the simplex every iteration") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = random_costs_instance(3, 5, 4, seed, 10.0);
    const double rho = default_rho(inst) / 4;
    BadmmState s = badmm_initial_state(inst);
    for (int k = 0; k < 100; ++k) {
      badmm_pi_update(inst, s, rho);
      for (std::size_t t = 0; t < 3; ++t)
        REQUIRE(rel_inf(s.Pi[t].colwise().sum().transpose(), inst.marginal(t)) <= 1e-14);
      badmm_gamma_w_update(inst, s, rho, WRule::R2);
      for (std::size_t t = 0; t < 3; ++t)
        REQUIRE(rel_inf(s.Gamma[t].rowwise().sum(), s.w) <= 1e-14);
      REQUIRE(std::abs(s.w.sum() - 1.0) <= 1e-15);
      REQUIRE(s.w.minCoeff() >= 0.0);
      badmm_multiplier_update(s, rho);
    }
  }
}

TEST_CASE("zero-weight columns stay zero") {
  const auto inst = BarycenterInstance::from_costs({Matrix::Constant(2, 3, 1.0)}, {vec({0.5, 0.0, 0.5})});
  BadmmOptions opts;
  opts.max_iter = 50;
  const auto res = solve_badmm(inst, opts);
  CHECK(res.primal.plans[0].col(1).isZero());
}

TEST_CASE("solve: close to the oracle on tiny instances") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto inst = wbc::testing::random_points_instance(3, 5, 5, seed);
    const double opt = solve_lp_exact(inst).objective;
    BadmmOptions opts;
    opts.record_marginals = true;
    const auto res = solve_badmm(inst, opts);
    CHECK(std::abs(res.report.objective - opt) / opt <= 5e-2);
    CHECK(res.report.residuals.eta_feas <= 5e-3);
    CHECK(res.report.rho == doctest::Approx(default_rho(inst)));
    for (const auto& mc : res.marginal_checks) {
      CHECK(mc.column_error <= 1e-12);
      CHECK(mc.row_error <= 1e-12);
    }
  }
}

TEST_CASE("default rho, parsing, validation, warm start") {
  const auto zero = BarycenterInstance::from_costs({Matrix::Zero(2, 2)}, {vec({0.5, 0.5})});
  CHECK(default_rho(zero) == 1.0);
  Matrix D(1, 2);
  D << 1, 3;
  CHECK(default_rho(BarycenterInstance::from_costs({D}, {vec({0.5, 0.5})})) == 4.0);

  CHECK(parse_w_rule("R1") == WRule::R1);
  CHECK(parse_w_rule("geometric") == WRule::Geometric);
  CHECK_THROWS_AS(parse_w_rule("R3"), InvalidArgument);

  const auto inst = random_costs_instance(2, 3, 3, 1);
  BadmmOptions opts;
  opts.max_iter = 400;
  const auto first = solve_badmm(inst, opts);
  const auto resumed = solve_badmm(inst, opts, &first.state);
  CHECK(resumed.report.residuals.eta_feas <= first.report.residuals.eta_feas * 1.5 + 1e-12);
  const auto other = random_costs_instance(2, 4, 3, 1);
  CHECK_THROWS_AS(solve_badmm(other, opts, &first.state), ShapeMismatch);
  CHECK(first.report.trace.columns.size() == 8);
}
