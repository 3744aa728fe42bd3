#include "graspforge/common.hpp"

#include <cmath>

namespace graspforge {

Pose Pose::from_matrix(const Transform& t) {
  Pose p;
  p.translation = t.translation();
  p.rotation = Quat(t.linear()).normalized();
  return p;
}

Transform Pose::matrix() const {
  Transform t = Transform::Identity();
  t.linear() = rotation.toRotationMatrix();
  t.translation() = translation;
  return t;
}

Pose Pose::inverse() const {
  Pose p;
  p.rotation = rotation.conjugate();
  p.translation = -(p.rotation * translation);
  return p;
}

Pose operator*(const Pose& a, const Pose& b) {
  Pose p;
  p.rotation = (a.rotation * b.rotation).normalized();
  p.translation = a.rotation * b.translation + a.translation;
  return p;
}

Mat3 rpy_to_matrix(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

Quat rotation_vector_to_quat(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-300) return Quat::Identity();
  return Quat(Eigen::AngleAxisd(angle, w / angle));
}

double rotation_angle_between(const Quat& a, const Quat& b) {
  return a.angularDistance(b);
}

}  // namespace graspforge
