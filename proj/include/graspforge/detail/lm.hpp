#pragma once

#include <functional>
#include <vector>

#include "graspforge/kinematics.hpp"

namespace graspforge::detail {

/// Damped Gauss-Newton (Levenberg) over a JointConfig: base translation,
/// base rotation increment and joint values. Jacobians are central
/// differences; every candidate is clamped to the joint limits before it is
/// evaluated, and joints pinned at a limit by the gradient are frozen for
/// that step.
struct LmOptions {
  int max_iters = 200;
  double tol = 1e-14;  // stop when the relative objective decrease falls below this
  double initial_damping = 1e-3;
  double jacobian_step = 1e-6;
  bool optimize_base = true;
};

struct LmResult {
  JointConfig q;
  double objective = 0.0;  // sum of squared residuals
  int iterations = 0;
  std::vector<double> history;  // objective after each accepted step, starting with q0
};

using ResidualFn = std::function<void(const JointConfig&, Eigen::VectorXd&)>;

LmResult minimize_config(const RobotModel& model, const JointConfig& q0, const ResidualFn& residual,
                         const LmOptions& opts);

/// q "plus" a parameter increment [dt(3), drot(3), dangles(n)].
JointConfig retract(const JointConfig& q, const Eigen::VectorXd& delta, bool with_base);

}  // namespace graspforge::detail
