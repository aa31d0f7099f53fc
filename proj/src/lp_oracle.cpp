#include "wbc/lp_oracle.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "wbc/simplex.hpp"

namespace wbc {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Standard form of the barycenter LP.
//   variables: w (m), then vec(Pi_t) column-major for t = 0..N-1
//   rows:      Pi_t e - w = 0      (t, i), N * m rows
//              Pi_t^T e = a_t      (t, j) for j < m_t - 1 (the last is implied)
//              e^T w = 1
class RevisedSimplex {
 public:
  RevisedSimplex(const BarycenterInstance& instance, const LpOptions& options)
      : inst_(instance), opt_(options) {
    n_ = instance.num_distributions();
    m_ = static_cast<Eigen::Index>(instance.support_size());
    Eigen::Index var = m_;
    Eigen::Index row = Eigen::Index(n_) * m_;
    for (std::size_t t = 0; t < n_; ++t) {
      const auto mt = static_cast<Eigen::Index>(instance.marginal_size(t));
      var_offset_.push_back(var);
      col_row_offset_.push_back(row);
      var += m_ * mt;
      row += mt - 1;
    }
    num_vars_ = var;
    rows_ = row + 1;
    b_ = Vector::Zero(rows_);
    for (std::size_t t = 0; t < n_; ++t) {
      const Vector& a = instance.marginal(t);
      for (Eigen::Index j = 0; j + 1 < a.size(); ++j) b_[col_row_offset_[t] + j] = a[j];
    }
    b_[rows_ - 1] = 1.0;
    position_.assign(static_cast<std::size_t>(num_vars_), -1);
  }

  LpResult run() {
    crash_basis();
    factorize();
    recompute_primal();

    LpResult res;
    double last_obj = objective();
    std::size_t stalled = 0;
    const std::size_t bland_after = 10 * static_cast<std::size_t>(rows_);
    Vector pi, column, alpha;

    for (;;) {
      if (etas_.size() >= opt_.refactor_every) {
        factorize();
        recompute_primal();
      }
      const bool bland = stalled >= bland_after;
      compute_duals(pi);
      Eigen::Index entering = price(pi, bland);
      if (entering < 0) {
        // Confirm optimality on a fresh factorization.
        if (!etas_.empty()) {
          factorize();
          recompute_primal();
          compute_duals(pi);
          entering = price(pi, bland);
        }
        if (entering < 0) break;
      }
      if (res.pivots >= opt_.max_pivots)
        throw NumericalInstability("LP oracle exceeded its pivot limit");

      load_column(entering, column);
      alpha = column;
      ftran(alpha);
      const Eigen::Index leave = ratio_test(alpha, bland);
      if (leave < 0) throw Error("LP oracle: unbounded direction (internal error)");

      const double theta = std::max(x_[leave] / alpha[leave], 0.0);
      x_ -= theta * alpha;
      x_[leave] = theta;
      for (Eigen::Index i = 0; i < rows_; ++i)
        if (x_[i] < 0 && x_[i] > -opt_.pivot_tol) x_[i] = 0;
      position_[static_cast<std::size_t>(basis_[leave])] = -1;
      basis_[leave] = entering;
      position_[static_cast<std::size_t>(entering)] = leave;
      etas_.push_back({leave, alpha});

      ++res.pivots;
      if (bland) ++res.bland_pivots;
      const double obj = objective();
      if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
        stalled = 0;
        last_obj = obj;
      } else {
        ++stalled;
      }
    }

    compute_duals(pi);
    extract(pi, res);
    return res;
  }

 private:
  struct Eta {
    Eigen::Index row;
    Vector alpha;
  };

  double cost(Eigen::Index k) const {
    if (k < m_) return 0.0;
    const std::size_t t = owner(k);
    const Eigen::Index local = k - var_offset_[t];
    return inst_.cost(t)(local % m_, local / m_);
  }

  std::size_t owner(Eigen::Index k) const {
    auto it = std::upper_bound(var_offset_.begin(), var_offset_.end(), k);
    return static_cast<std::size_t>(it - var_offset_.begin()) - 1;
  }

  template <typename F>
  void for_each_entry(Eigen::Index k, F&& f) const {
    if (k < m_) {
      for (std::size_t t = 0; t < n_; ++t) f(Eigen::Index(t) * m_ + k, -1.0);
      f(rows_ - 1, 1.0);
      return;
    }
    const std::size_t t = owner(k);
    const Eigen::Index local = k - var_offset_[t];
    const Eigen::Index i = local % m_;
    const Eigen::Index j = local / m_;
    f(Eigen::Index(t) * m_ + i, 1.0);
    if (j + 1 < static_cast<Eigen::Index>(inst_.marginal_size(t)))
      f(col_row_offset_[t] + j, 1.0);
  }

  Eigen::Index pi_var(std::size_t t, Eigen::Index i, Eigen::Index j) const {
    return var_offset_[t] + j * m_ + i;
  }

  void crash_basis() {
    // Barycenter point with the cheapest single-point transport.
    Eigen::Index star = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m_; ++i) {
      double c = 0;
      for (std::size_t t = 0; t < n_; ++t) c += inst_.cost(t).row(i).dot(inst_.marginal(t));
      if (c < best) {
        best = c;
        star = i;
      }
    }
    basis_.clear();
    basis_.push_back(star);
    for (std::size_t t = 0; t < n_; ++t) {
      const Matrix& d = inst_.cost(t);
      for (Eigen::Index j = 0; j < d.cols(); ++j) basis_.push_back(pi_var(t, star, j));
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (i == star) continue;
        Eigen::Index jmin = 0;
        d.row(i).minCoeff(&jmin);
        basis_.push_back(pi_var(t, i, jmin));
      }
    }
    if (static_cast<Eigen::Index>(basis_.size()) != rows_)
      throw Error("LP oracle: crash basis has the wrong size (internal error)");
    for (Eigen::Index r = 0; r < rows_; ++r)
      position_[static_cast<std::size_t>(basis_[r])] = r;
  }

  void factorize() {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(rows_) * 3);
    for (Eigen::Index r = 0; r < rows_; ++r)
      for_each_entry(basis_[r], [&](Eigen::Index row, double v) { trips.emplace_back(row, r, v); });
    basis_matrix_.resize(rows_, rows_);
    basis_matrix_.setFromTriplets(trips.begin(), trips.end());
    basis_matrix_.makeCompressed();
    lu_.analyzePattern(basis_matrix_);
    lu_.factorize(basis_matrix_);
    if (lu_.info() != Eigen::Success)
      throw NumericalInstability("LP oracle: singular basis (" + lu_.lastErrorMessage() + ")");
    etas_.clear();
  }

  void ftran(Vector& v) const {
    v = lu_.solve(v).eval();
    for (const Eta& e : etas_) {
      const double xr = v[e.row] / e.alpha[e.row];
      v -= xr * e.alpha;
      v[e.row] = xr;
    }
  }

  void btran(Vector& v) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const double dot = it->alpha.dot(v) - it->alpha[it->row] * v[it->row];
      v[it->row] = (v[it->row] - dot) / it->alpha[it->row];
    }
    v = lu_.transpose().solve(v).eval();
  }

  // Fresh-factorization solve with one refinement step.
  void recompute_primal() {
    x_ = lu_.solve(b_);
    const Vector r = b_ - basis_matrix_ * x_;
    x_ += lu_.solve(r);
    for (Eigen::Index i = 0; i < rows_; ++i)
      if (x_[i] < 0 && x_[i] > -opt_.pivot_tol) x_[i] = 0;
  }

  void compute_duals(Vector& pi) const {
    Vector cb(rows_);
    for (Eigen::Index r = 0; r < rows_; ++r) cb[r] = cost(basis_[r]);
    pi = cb;
    btran(pi);
    if (etas_.empty()) {
      const Vector r = cb - basis_matrix_.transpose() * pi;
      pi += lu_.transpose().solve(r).eval();
    }
  }

  double objective() const {
    double obj = 0;
    for (Eigen::Index r = 0; r < rows_; ++r) obj += cost(basis_[r]) * x_[r];
    return obj;
  }

  double col_dual(const Vector& pi, std::size_t t, Eigen::Index j) const {
    return j + 1 < static_cast<Eigen::Index>(inst_.marginal_size(t))
               ? pi[col_row_offset_[t] + j]
               : 0.0;
  }

  // Most negative reduced cost (Dantzig) or the lowest-index negative one
  // (Bland). Returns -1 at optimality.
  Eigen::Index price(const Vector& pi, bool bland) const {
    const double tol = opt_.optimality_tol;
    Eigen::Index best = -1;
    double best_d = -tol;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (position_[static_cast<std::size_t>(i)] >= 0) continue;
      double d = -pi[rows_ - 1];
      for (std::size_t t = 0; t < n_; ++t) d += pi[Eigen::Index(t) * m_ + i];
      if (d < best_d) {
        best_d = d;
        best = i;
        if (bland) return best;
      }
    }
    for (std::size_t t = 0; t < n_; ++t) {
      const Matrix& d = inst_.cost(t);
      const double* row_pi = pi.data() + Eigen::Index(t) * m_;
      for (Eigen::Index j = 0; j < d.cols(); ++j) {
        const double cj = col_dual(pi, t, j);
        const Eigen::Index base = pi_var(t, 0, j);
        for (Eigen::Index i = 0; i < m_; ++i) {
          const double rc = d(i, j) - row_pi[i] - cj;
          if (rc < best_d && position_[static_cast<std::size_t>(base + i)] < 0) {
            best_d = rc;
            best = base + i;
            if (bland) return best;
          }
        }
      }
    }
    return best;
  }

  void load_column(Eigen::Index k, Vector& col) const {
    col = Vector::Zero(rows_);
    for_each_entry(k, [&](Eigen::Index row, double v) { col[row] = v; });
  }

  Eigen::Index ratio_test(const Vector& alpha, bool bland) const {
    const double ptol = opt_.pivot_tol;
    if (bland) {
      double theta = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows_; ++i)
        if (alpha[i] > ptol) theta = std::min(theta, x_[i] / alpha[i]);
      Eigen::Index leave = -1;
      for (Eigen::Index i = 0; i < rows_; ++i) {
        if (alpha[i] > ptol && x_[i] / alpha[i] <= theta + 1e-12 &&
            (leave < 0 || basis_[i] < basis_[leave]))
          leave = i;
      }
      return leave;
    }
    // Harris two-pass test: bound with a small feasibility slack, then take
    // the largest pivot among the admissible rows.
    const double slack = opt_.pivot_tol;
    double theta_max = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rows_; ++i)
      if (alpha[i] > ptol) theta_max = std::min(theta_max, (x_[i] + slack) / alpha[i]);
    Eigen::Index leave = -1;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (alpha[i] > ptol && x_[i] / alpha[i] <= theta_max &&
          (leave < 0 || alpha[i] > alpha[leave]))
        leave = i;
    }
    return leave;
  }

  void extract(const Vector& pi, LpResult& res) const {
    res.primal.w = Vector::Zero(m_);
    for (std::size_t t = 0; t < n_; ++t)
      res.primal.plans.push_back(Matrix::Zero(m_, inst_.cost(t).cols()));
    for (Eigen::Index r = 0; r < rows_; ++r) {
      const Eigen::Index k = basis_[r];
      const double v = std::max(x_[r], 0.0);
      if (k < m_) {
        res.primal.w[k] = v;
      } else {
        const std::size_t t = owner(k);
        const Eigen::Index local = k - var_offset_[t];
        res.primal.plans[t](local % m_, local / m_) = v;
      }
    }
    for (std::size_t t = 0; t < n_; ++t) {
      res.y.push_back(-pi.segment(Eigen::Index(t) * m_, m_));
      const auto mt = static_cast<Eigen::Index>(inst_.marginal_size(t));
      Vector z(mt);
      for (Eigen::Index j = 0; j < mt; ++j) z[j] = -col_dual(pi, t, j);
      res.z.push_back(std::move(z));
    }
    res.objective = primal_objective(inst_, res.primal);
    Vector sum_y = Vector::Zero(m_);
    double za = 0;
    for (std::size_t t = 0; t < n_; ++t) {
      sum_y += res.y[t];
      za += res.z[t].dot(inst_.marginal(t));
    }
    res.dual_objective = -(sum_y.maxCoeff() + za);
  }

  const BarycenterInstance& inst_;
  LpOptions opt_;
  std::size_t n_ = 0;
  Eigen::Index m_ = 0;
  Eigen::Index num_vars_ = 0;
  Eigen::Index rows_ = 0;
  std::vector<Eigen::Index> var_offset_;
  std::vector<Eigen::Index> col_row_offset_;
  Vector b_;
  Vector x_;
  std::vector<Eigen::Index> basis_;
  std::vector<Eigen::Index> position_;
  SparseMatrix basis_matrix_;
  mutable Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

}  // namespace

LpResult solve_lp_exact(const BarycenterInstance& instance, const LpOptions& options) {
  const double vars = double(instance.support_size()) * double(instance.total_marginal_size());
  if (vars > kOracleMaxVariables)
    throw SizeLimitExceeded("LP oracle accepts at most 2e5 plan entries (m * sum m_t); got " +
                            std::to_string(static_cast<long long>(vars)));
  const auto start = std::chrono::steady_clock::now();
  RevisedSimplex solver(instance, options);
  LpResult res = solver.run();
  res.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

double verify_kkt(const BarycenterInstance& instance, const PrimalSolution& primal,
                  const VectorList& y, const VectorList& z) {
  check_solution_shape(instance, primal);
  const auto n = instance.num_distributions();
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  if (y.size() != n || z.size() != n) throw ShapeMismatch("dual multiplier count mismatch");

  const double feas = feasibility_residual(instance, primal);
  double neg = 0;
  double comp = 0;
  Vector sum_y = Vector::Zero(m);
  for (std::size_t t = 0; t < n; ++t) {
    if (y[t].size() != m || z[t].size() != instance.cost(t).cols())
      throw ShapeMismatch("dual multiplier shape mismatch");
    Matrix reduced = instance.cost(t);
    reduced.colwise() += y[t];
    reduced.rowwise() += z[t].transpose();
    neg += reduced.cwiseMin(0.0).squaredNorm();
    comp += reduced.cwiseProduct(primal.plans[t]).cwiseAbs().sum();
    sum_y += y[t];
  }
  const double obj = primal_objective(instance, primal);
  const double dual_feas = std::sqrt(neg) / (1.0 + set_norm(instance.costs()));
  const double complementarity = comp / (1.0 + std::abs(obj));
  const double stationarity = (primal.w - project_simplex(primal.w + sum_y)).norm() /
                              (1.0 + primal.w.norm() + sum_y.norm());
  return std::max({feas, dual_feas, complementarity, stationarity});
}

DualIterate oracle_dual_iterate(const BarycenterInstance& instance, const LpResult& lp) {
  const auto m = static_cast<Eigen::Index>(instance.support_size());
  DualIterate it;
  it.u = Vector::Zero(m);
  for (const auto& y : lp.y) it.u += y;
  it.y = lp.y;
  it.z = lp.z;
  for (std::size_t t = 0; t < instance.num_distributions(); ++t) {
    Matrix v = instance.cost(t);
    v.colwise() += lp.y[t];
    v.rowwise() += lp.z[t].transpose();
    it.V.push_back(v.cwiseMax(0.0));
  }
  it.lambda = lp.primal.w;
  it.Lambda = lp.primal.plans;
  return it;
}

}  // namespace wbc
