#pragma once

#include <Eigen/Core>

#include <vector>

namespace graspforge {

/// Dense two-phase simplex for small problems:
///   maximize c'x  subject to  A x = b,  x >= 0.
struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd dual;  // y with A'y >= c at the optimum, objective = b'y
};

LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

}  // namespace graspforge
