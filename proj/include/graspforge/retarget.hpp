#pragma once

#include <array>
#include <string>
#include <vector>

#include "graspforge/detail/lm.hpp"
#include "graspforge/kinematics.hpp"

namespace graspforge {

/// 21 hand keypoints in the object frame: wrist, then four per finger
/// (thumb CMC/MCP/IP/tip, then MCP/PIP/DIP/tip for index, middle, ring, little).
struct HumanHandKeypoints {
  std::array<Vec3, 21> points;
  std::array<double, 21> confidence;

  HumanHandKeypoints() { confidence.fill(1.0); points.fill(Vec3::Zero()); }
  void validate() const;
};

struct KeypointPair {
  int human = 0;
  std::string robot;
  double weight = 1.0;
};

struct RetargetMapping {
  std::vector<KeypointPair> pairs;
  double scale = 1.0;
  double regularization = 1e-3;

  void validate(const RobotModel& robot) const;
};

/// Fingertips (weight 2), one mid-finger point per finger and wrist -> palm.
/// Needs robot keypoints labelled `wrist`, `<finger>_mid` and `<finger>_tip`
/// for thumb, index, middle, ring and little.
RetargetMapping default_mapping(const RobotModel& robot);

struct RetargetOptions {
  int max_iters = 300;
  double tol = 1e-14;
};

struct RetargetResult {
  JointConfig q;
  double residual = 0.0;  // weighted RMS keypoint error, meters
  double objective = 0.0;
  std::vector<double> history;
};

/// Position-based retargeting: minimizes
///   sum_i w_i c_i |kp_robot(q)_i - s * kp_human_i|^2 + lambda |angles - rest|^2
/// over base pose and joint values, within joint limits.
RetargetResult retarget(const HumanHandKeypoints& kp, const RobotModel& robot,
                        const RetargetMapping& map, const JointConfig& q0,
                        const RetargetOptions& opts = {});

}  // namespace graspforge
