#pragma once

// Test-only reference computations built from dense linear algebra,
// independent of the closed forms used by the library.

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

#include "wbc/model.hpp"
#include "wbc/sgs_admm.hpp"

namespace wbc::testing {

// Linear operators of the (y, z) block, acting on column-major vectors:
//   Y y = (sum_t y_t, {vec(y_t e^T)}),   Z z = (0, {vec(e z_t^T)}).
struct YZOperators {
  Matrix Y;
  Matrix Z;
};

inline YZOperators build_yz_operators(const BarycenterInstance& inst) {
  const auto n = static_cast<Eigen::Index>(inst.num_distributions());
  const auto m = static_cast<Eigen::Index>(inst.support_size());
  Eigen::Index rows = m;
  Eigen::Index zcols = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    rows += m * inst.cost(std::size_t(t)).cols();
    zcols += inst.cost(std::size_t(t)).cols();
  }
  YZOperators op{Matrix::Zero(rows, n * m), Matrix::Zero(rows, zcols)};
  Eigen::Index off = m;
  Eigen::Index zoff = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto mt = inst.cost(std::size_t(t)).cols();
    for (Eigen::Index i = 0; i < m; ++i) op.Y(i, t * m + i) = 1.0;
    for (Eigen::Index j = 0; j < mt; ++j)
      for (Eigen::Index i = 0; i < m; ++i) {
        op.Y(off + j * m + i, t * m + i) = 1.0;
        op.Z(off + j * m + i, zoff + j) = 1.0;
      }
    off += m * mt;
    zoff += mt;
  }
  return op;
}

// Minimizer over (y, z) of the augmented Lagrangian with (u, V, lambda,
// Lambda) fixed, plus the proximal term (beta/2)||y - y_k||^2_C with
// C = Y^T Z (Z^T Z)^{-1} Z^T Y, by one dense linear solve.
inline std::pair<VectorList, VectorList> spadmm_yz_minimizer(const BarycenterInstance& inst,
                                                             const DualIterate& it,
                                                             double beta) {
  const auto n = inst.num_distributions();
  const auto m = static_cast<Eigen::Index>(inst.support_size());
  const YZOperators op = build_yz_operators(inst);
  const Eigen::Index ny = op.Y.cols();
  const Eigen::Index nz = op.Z.cols();

  Vector c(op.Y.rows());
  c.head(m) = it.u - it.lambda / beta;
  Vector a(nz), yk(ny);
  Eigen::Index off = m;
  Eigen::Index zoff = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const Matrix target = it.V[t] - inst.cost(t) + it.Lambda[t] / beta;
    c.segment(off, target.size()) = Eigen::Map<const Vector>(target.data(), target.size());
    off += target.size();
    a.segment(zoff, inst.marginal(t).size()) = inst.marginal(t);
    zoff += inst.marginal(t).size();
    yk.segment(Eigen::Index(t) * m, m) = it.y[t];
  }

  Matrix A(op.Y.rows(), ny + nz);
  A << op.Y, op.Z;
  const Matrix ZtZ = op.Z.transpose() * op.Z;
  const Matrix YtZ = op.Y.transpose() * op.Z;
  const Matrix C = YtZ * ZtZ.inverse() * YtZ.transpose();

  Matrix H = beta * A.transpose() * A;
  H.topLeftCorner(ny, ny) += beta * C;
  Vector g = beta * A.transpose() * c;
  g.tail(nz) -= a;
  g.head(ny) += beta * C * yk;

  Eigen::FullPivLU<Matrix> lu(H);
  if (lu.rank() != H.rows()) throw std::runtime_error("proximal subproblem is singular");
  const Vector sol = lu.solve(g);

  VectorList y, z;
  zoff = 0;
  for (std::size_t t = 0; t < n; ++t) {
    y.push_back(sol.segment(Eigen::Index(t) * m, m));
    const auto mt = inst.marginal(t).size();
    z.push_back(sol.segment(ny + zoff, mt));
    zoff += mt;
  }
  return {y, z};
}

}  // namespace wbc::testing
