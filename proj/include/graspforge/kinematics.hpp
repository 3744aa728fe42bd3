#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graspforge/common.hpp"
#include "graspforge/mesh.hpp"

namespace graspforge {

enum class JointType { Revolute, Prismatic, Fixed };

struct Link {
  std::string name;
  std::string mesh;               // resolved path; empty when the link has no collision mesh
  Transform mesh_origin = Transform::Identity();
  Vec3 mesh_scale = Vec3::Ones();
  int parent_joint = -1;          // -1 for the root
};

struct Joint {
  std::string name;
  JointType type = JointType::Fixed;
  int parent = -1;  // link index
  int child = -1;   // link index
  Transform origin = Transform::Identity();
  Vec3 axis = Vec3::UnitZ();
  double lower = 0.0;
  double upper = 0.0;
  int dof = -1;  // index into JointConfig::angles, -1 when fixed
};

struct Keypoint {
  std::string label;
  int link = -1;
  Vec3 offset = Vec3::Zero();
};

/// Kinematic tree of a robot hand, validated at construction by parse_robot.
struct RobotModel {
  std::string name;
  std::vector<Link> links;
  std::vector<Joint> joints;
  std::vector<Keypoint> keypoints;
  std::vector<int> finger_links;  // links whose points count as "fingers"
  int root = 0;
  std::vector<int> joint_order;  // joints in parent-before-child order

  std::size_t dof() const;
  int link_index(const std::string& name) const;  // -1 if absent
  int keypoint_index(const std::string& label) const;
  bool is_finger(int link) const;
};

/// 6-DoF base pose plus one value per non-fixed joint (declaration order).
struct JointConfig {
  Pose base;
  Eigen::VectorXd angles;
};

/// Per-link surface samples in link-local coordinates. The concatenation in
/// link order defines the global robot-point index.
struct LinkPointSet {
  std::vector<std::vector<Vec3>> per_link;
  std::vector<std::size_t> offsets;  // offsets[l] = first global index of link l
  std::uint64_t seed = 0;

  std::size_t size() const;
  std::uint64_t identity() const;  // content hash
  static LinkPointSet from_lists(std::vector<std::vector<Vec3>> lists, std::uint64_t seed);
};

/// Parse the supported XML robot-description subset. Relative mesh paths are
/// resolved against `base_dir`.
RobotModel parse_robot(const std::string& document, const std::string& base_dir = ".");
RobotModel load_robot(const std::string& path);

/// Rest configuration: identity base, every angle at 0 clamped into limits.
JointConfig rest_config(const RobotModel& model);

/// World transform of every link.
std::vector<Transform> forward_kinematics(const RobotModel& model, const JointConfig& q);

/// Local motion of a joint at the given value.
Transform joint_motion(const Joint& joint, double value);

/// Loads each link's collision mesh into link-local coordinates (origin and
/// scale applied). Links without a mesh get std::nullopt.
std::vector<std::optional<TriMesh>> load_link_meshes(const RobotModel& model);

LinkPointSet sample_link_points(const RobotModel& model, std::span<const std::size_t> counts,
                                std::uint64_t seed);
LinkPointSet sample_link_points(const RobotModel& model,
                                const std::vector<std::optional<TriMesh>>& meshes,
                                std::span<const std::size_t> counts, std::uint64_t seed);

/// Split `total` points across links proportionally to mesh area (largest
/// remainder, ties to the lower link index).
std::vector<std::size_t> allocate_counts(const std::vector<std::optional<TriMesh>>& meshes,
                                         std::size_t total);

PointCloud point_cloud_fk(const RobotModel& model, const JointConfig& q, const LinkPointSet& pts);
/// Same, reusing precomputed link transforms.
PointCloud point_cloud_fk(const std::vector<Transform>& link_tf, const LinkPointSet& pts);

std::vector<Vec3> keypoint_fk(const RobotModel& model, const JointConfig& q);

JointConfig clamp_to_limits(const RobotModel& model, const JointConfig& q);

void check_config(const RobotModel& model, const JointConfig& q);

}  // namespace graspforge
