#include "graspforge/lp.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>

#include "graspforge/common.hpp"

namespace graspforge {

namespace {

constexpr double kTol = 1e-11;

struct Tableau {
  Eigen::MatrixXd t;  // rows 0..m-1 constraints, last column rhs
  std::vector<int> basis;
  Eigen::Index cols;  // structural + artificial columns

  void pivot(Eigen::Index r, Eigen::Index c) {
    t.row(r) /= t(r, c);
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    basis[r] = static_cast<int>(c);
  }

  // Maximizes the objective held in the last row (stored as reduced costs
  // z_j - c_j). Columns >= `limit` may not enter.
  bool optimize(Eigen::Index limit) {
    const Eigen::Index m = t.rows() - 1;
    const Eigen::Index rhs = t.cols() - 1;
    int stall = 0;
    double last = t(m, rhs);
    for (int iter = 0; iter < 50000; ++iter) {
      const bool bland = stall > 50;
      Eigen::Index enter = -1;
      double best = -kTol;
      for (Eigen::Index j = 0; j < limit; ++j) {
        if (t(m, j) < best) {
          enter = j;
          if (bland) break;
          best = t(m, j);
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (t(i, enter) > kTol) {
          const double r = t(i, rhs) / t(i, enter);
          if (r < ratio - kTol || (r <= ratio + kTol && leave >= 0 && basis[i] < basis[leave])) {
            ratio = r;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (t(m, rhs) > last + kTol) {
        stall = 0;
        last = t(m, rhs);
      } else {
        ++stall;
      }
    }
    throw InvariantError("simplex did not terminate");
  }
};

}  // namespace

LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const Eigen::Index m = a.rows(), n = a.cols();
  if (b.size() != m || c.size() != n) throw Error("solve_lp: dimension mismatch");
  Tableau tab;
  tab.cols = n + m;
  tab.t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  tab.basis.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = b[i] < 0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = s * a.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + m) = s * b[i];
    tab.basis[i] = static_cast<int>(n + i);
  }
  // Phase 1: maximize -sum(artificials).
  for (Eigen::Index i = 0; i < m; ++i) tab.t.row(m) -= tab.t.row(i);
  for (Eigen::Index i = 0; i < m; ++i) tab.t(m, n + i) = 0.0;
  tab.optimize(n);
  LpResult out;
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (tab.t(m, n + m) < -1e-9 * scale) return out;

  std::vector<bool> redundant(m, false);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis[i] < n) continue;
    Eigen::Index col = -1;
    double big = 1e-9;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab.t(i, j)) > big) {
        big = std::abs(tab.t(i, j));
        col = j;
      }
    }
    if (col >= 0) tab.pivot(i, col);
    else redundant[i] = true;
  }

  // Phase 2.
  tab.t.row(m).setZero();
  tab.t.row(m).head(n) = -c.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    const int bj = tab.basis[i];
    if (bj < n && c[bj] != 0.0) tab.t.row(m) += c[bj] * tab.t.row(i);
  }
  if (!tab.optimize(n)) {
    out.status = LpResult::Status::Unbounded;
    return out;
  }
  out.status = LpResult::Status::Optimal;
  out.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i)
    if (tab.basis[i] < n && !redundant[i]) out.x[tab.basis[i]] = tab.t(i, n + m);
  out.objective = c.dot(out.x);

  // Duals from B'y = c_B over the non-redundant rows.
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < m; ++i)
    if (!redundant[i]) rows.push_back(i);
  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd bt(k, m);
  Eigen::VectorXd cb(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const int bj = tab.basis[rows[r]];
    bt.row(r) = a.col(bj).transpose();
    cb[r] = c[bj];
  }
  out.dual = bt.completeOrthogonalDecomposition().solve(cb);
  return out;
}

}  // namespace graspforge
