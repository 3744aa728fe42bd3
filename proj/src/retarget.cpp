#include "graspforge/retarget.hpp"

#include <cmath>

namespace graspforge {

void HumanHandKeypoints::validate() const {
  for (const auto& p : points)
    if (!p.allFinite()) throw Error("human keypoints contain non-finite values");
  for (double c : confidence)
    if (!(c >= 0.0 && c <= 1.0)) throw Error("keypoint confidence must lie in [0, 1]");
}

void RetargetMapping::validate(const RobotModel& robot) const {
  int positive = 0;
  for (const auto& p : pairs) {
    if (p.human < 0 || p.human >= 21) throw Error("mapping: human keypoint index out of range");
    if (robot.keypoint_index(p.robot) < 0)
      throw Error("mapping: robot '" + robot.name + "' has no keypoint '" + p.robot + "'");
    if (!(p.weight >= 0.0)) throw Error("mapping: weights must be non-negative");
    if (p.weight > 0.0) ++positive;
  }
  if (positive < 4) throw Error("mapping: need at least 4 pairs with positive weight");
  if (!(scale > 0.0)) throw Error("mapping: scale must be positive");
  if (!(regularization >= 0.0)) throw Error("mapping: regularization must be non-negative");
}

RetargetMapping default_mapping(const RobotModel& robot) {
  static const char* kFingers[] = {"thumb", "index", "middle", "ring", "little"};
  static const int kTips[] = {4, 8, 12, 16, 20};
  static const int kMids[] = {3, 6, 10, 14, 18};
  RetargetMapping map;
  map.pairs.push_back({0, "wrist", 1.0});
  for (int f = 0; f < 5; ++f) {
    map.pairs.push_back({kTips[f], std::string(kFingers[f]) + "_tip", 2.0});
    map.pairs.push_back({kMids[f], std::string(kFingers[f]) + "_mid", 1.0});
  }
  map.validate(robot);
  return map;
}

RetargetResult retarget(const HumanHandKeypoints& kp, const RobotModel& robot,
                        const RetargetMapping& map, const JointConfig& q0,
                        const RetargetOptions& opts) {
  kp.validate();
  map.validate(robot);
  check_config(robot, q0);

  struct Term {
    int robot_kp;
    double sqrt_w;
    Vec3 target;
  };
  std::vector<Term> terms;
  double wsum = 0.0;
  for (const auto& p : map.pairs) {
    const double w = p.weight * kp.confidence[p.human];
    if (w <= 0.0) continue;
    terms.push_back({robot.keypoint_index(p.robot), std::sqrt(w), map.scale * kp.points[p.human]});
    wsum += w;
  }
  if (terms.size() < 4) throw Error("retarget: fewer than 4 keypoints with positive weight and confidence");

  const Eigen::VectorXd rest = rest_config(robot).angles;
  const double sqrt_lambda = std::sqrt(map.regularization);
  const auto dof = static_cast<Eigen::Index>(robot.dof());
  const Eigen::Index m = 3 * static_cast<Eigen::Index>(terms.size()) + (sqrt_lambda > 0 ? dof : 0);

  auto residual = [&](const JointConfig& q, Eigen::VectorXd& r) {
    r.resize(m);
    const auto tf = forward_kinematics(robot, q);
    Eigen::Index row = 0;
    for (const auto& t : terms) {
      const auto& k = robot.keypoints[t.robot_kp];
      r.segment<3>(row) = t.sqrt_w * (tf[k.link] * k.offset - t.target);
      row += 3;
    }
    if (sqrt_lambda > 0) r.segment(row, dof) = sqrt_lambda * (q.angles - rest);
  };

  detail::LmOptions lm;
  lm.max_iters = opts.max_iters;
  lm.tol = opts.tol;
  const auto solved = detail::minimize_config(robot, q0, residual, lm);

  RetargetResult out;
  out.q = solved.q;
  out.objective = solved.objective;
  out.history = solved.history;
  const auto tf = forward_kinematics(robot, out.q);
  double err = 0.0;
  for (const auto& t : terms) {
    const auto& k = robot.keypoints[t.robot_kp];
    err += t.sqrt_w * t.sqrt_w * (tf[k.link] * k.offset - t.target).squaredNorm();
  }
  out.residual = std::sqrt(err / wsum);
  return out;
}

}  // namespace graspforge
