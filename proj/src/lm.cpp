#include "graspforge/detail/lm.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace graspforge::detail {

JointConfig retract(const JointConfig& q, const Eigen::VectorXd& delta, bool with_base) {
  JointConfig out = q;
  Eigen::Index off = 0;
  if (with_base) {
    out.base.translation += delta.segment<3>(0);
    out.base.rotation = (rotation_vector_to_quat(delta.segment<3>(3)) * q.base.rotation).normalized();
    off = 6;
  }
  out.angles += delta.segment(off, q.angles.size());
  return out;
}

LmResult minimize_config(const RobotModel& model, const JointConfig& q0, const ResidualFn& residual,
                         const LmOptions& opts) {
  const Eigen::Index nb = opts.optimize_base ? 6 : 0;
  const Eigen::Index n = nb + q0.angles.size();
  LmResult res;
  res.q = clamp_to_limits(model, q0);
  Eigen::VectorXd r, rp, rm;
  residual(res.q, r);
  res.objective = r.squaredNorm();
  res.history.push_back(res.objective);
  const Eigen::Index m = r.size();
  Eigen::MatrixXd jac(m, n);
  double damping = opts.initial_damping;
  const double h = opts.jacobian_step;

  for (int it = 0; it < opts.max_iters && res.objective > 0.0; ++it) {
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[k] = h;
      residual(retract(res.q, e, opts.optimize_base), rp);
      residual(retract(res.q, -e, opts.optimize_base), rm);
      jac.col(k) = (rp - rm) / (2.0 * h);
    }
    const Eigen::VectorXd grad = jac.transpose() * r;
    // Freeze joints held at a limit by the descent direction.
    std::vector<bool> active(n, true);
    for (const auto& j : model.joints) {
      if (j.dof < 0) continue;
      const double v = res.q.angles[j.dof];
      const Eigen::Index k = nb + j.dof;
      if ((v <= j.lower && grad[k] > 0) || (v >= j.upper && grad[k] < 0)) active[k] = false;
    }
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!active[k]) {
        jtj.row(k).setZero();
        jtj.col(k).setZero();
        jtj(k, k) = 1.0;
      }
    }
    Eigen::VectorXd g = grad;
    for (Eigen::Index k = 0; k < n; ++k)
      if (!active[k]) g[k] = 0.0;

    bool accepted = false;
    while (!accepted && damping < 1e12) {
      Eigen::MatrixXd a = jtj;
      a.diagonal().array() += damping;
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      for (double alpha : {1.0, 0.5, 0.25}) {
        const JointConfig cand = clamp_to_limits(model, retract(res.q, alpha * step, opts.optimize_base));
        residual(cand, rp);
        const double f = rp.squaredNorm();
        if (f < res.objective) {
          const double decrease = res.objective - f;
          res.q = cand;
          r = rp;
          const double prev = res.objective;
          res.objective = f;
          res.history.push_back(f);
          res.iterations = it + 1;
          damping = std::max(damping / 3.0, 1e-12);
          accepted = true;
          if (decrease <= opts.tol * prev) return res;
          break;
        }
      }
      if (!accepted) damping *= 10.0;
    }
    if (!accepted) break;
  }
  return res;
}

}  // namespace graspforge::detail
