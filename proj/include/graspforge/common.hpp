#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace graspforge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Transform = Eigen::Isometry3d;

/// Bad user input: malformed files, invalid arguments, failed preconditions.
/// The CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A broken internal invariant. The CLI maps it to exit code 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Rigid transform stored as translation + unit quaternion.
struct Pose {
  Vec3 translation = Vec3::Zero();
  Quat rotation = Quat::Identity();

  static Pose identity() { return {}; }
  static Pose from_matrix(const Transform& t);

  Transform matrix() const;
  Pose inverse() const;
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  friend Pose operator*(const Pose& a, const Pose& b);
};

/// Rotation from URDF fixed-axis roll/pitch/yaw: R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rpy_to_matrix(double roll, double pitch, double yaw);

/// Exponential map of a rotation vector.
Quat rotation_vector_to_quat(const Vec3& w);

/// Angle between two rotations in radians.
double rotation_angle_between(const Quat& a, const Quat& b);

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace graspforge
