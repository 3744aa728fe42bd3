#pragma once

#include <Eigen/QR>

#include <cstdint>
#include <optional>
#include <vector>

#include "graspforge/detail/lm.hpp"
#include "graspforge/kinematics.hpp"
#include "graspforge/record.hpp"

namespace graspforge {

/// Dense robot-to-object distance matrix, rows = robot points, cols = object
/// points. Entries are stored as 32-bit floats, matching the wire format.
struct DistanceMatrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> values;  // row-major
  std::uint64_t robot_identity = 0;
  std::uint64_t object_identity = 0;

  float at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  void validate() const;
  bool operator==(const DistanceMatrix&) const = default;
};

/// Content hash of a cloud's coordinates.
std::uint64_t cloud_identity(const PointCloud& cloud);

DistanceMatrix encode_distance_matrix(const PointCloud& robot_cloud, const PointCloud& object_cloud,
                                      std::uint64_t robot_identity);
/// Unbound robot identity (0): decoding then skips the point-set check.
DistanceMatrix encode_distance_matrix(const PointCloud& robot_cloud, const PointCloud& object_cloud);
/// Encodes FK(q) bound to the point set's identity.
DistanceMatrix encode_grasp(const RobotModel& robot, const LinkPointSet& pts, const JointConfig& q,
                            const PointCloud& object_cloud);

struct MultilaterationOptions {
  int refine_iters = 10;
  double infeasible_abs = 1e-3;  // meters
  double infeasible_rel = 0.25;  // fraction of the mean range
};

struct Multilateration {
  Vec3 point = Vec3::Zero();
  double residual = 0.0;  // RMS range residual
};

/// Linearized least squares (first sphere subtracted), then Gauss-Newton.
class Multilaterator {
 public:
  explicit Multilaterator(std::vector<Vec3> anchors, MultilaterationOptions opts = {});
  Multilateration solve(std::span<const double> dists) const;
  std::size_t size() const { return anchors_.size(); }

 private:
  std::vector<Vec3> anchors_;
  Vec3 center_;
  MultilaterationOptions opts_;
  Eigen::MatrixXd a_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

Multilateration multilaterate_point(std::span<const Vec3> anchors, std::span<const double> dists);

struct MultilateratedCloud {
  PointCloud cloud;
  std::vector<double> residuals;
  std::vector<bool> feasible;
  std::size_t infeasible_count() const;
};

MultilateratedCloud multilaterate_cloud(const DistanceMatrix& d, const PointCloud& object_cloud,
                                        const MultilaterationOptions& opts = {});

struct FitResult {
  JointConfig q;
  double rms = 0.0;
  std::vector<double> history;
};

/// Kabsch on the root-link points, per-joint closed-form initialization, then
/// damped Gauss-Newton over all DoF. Points with zero weight are ignored.
FitResult fit_configuration(const RobotModel& robot, const LinkPointSet& pts, const PointCloud& target,
                            const std::optional<JointConfig>& q0 = std::nullopt,
                            const std::vector<double>& weights = {}, const detail::LmOptions& lm = {});

struct DecodeOptions {
  MultilaterationOptions multilateration;
  detail::LmOptions lm;
  bool verify_object_identity = true;
};

struct DecodeResult {
  GraspRecord record;
  MultilateratedCloud points;
  FitResult fit;
};

DecodeResult decode_grasp(const DistanceMatrix& d, const PointCloud& object_cloud, const RobotModel& robot,
                          const LinkPointSet& pts, const std::optional<JointConfig>& q0 = std::nullopt,
                          const DecodeOptions& opts = {});

}  // namespace graspforge
