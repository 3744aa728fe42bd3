#pragma once

#include <span>
#include <vector>

#include "graspforge/kinematics.hpp"
#include "graspforge/record.hpp"

namespace graspforge {

/// Max over hand points of max(0, -sdf), in cm.
double penetration_depth(const PointCloud& hand, const TriMesh& object);

/// Volume (cm^3) of voxel centers inside the object and inside any hand link.
/// Voxel centers sit at (k + 1/2) * voxel on every axis of the input frame.
double penetration_volume(std::span<const TriMesh> hand_links, const TriMesh& object, double voxel_cm);

/// Mean over finger points of max(0, sdf), in cm.
double disjoint_distance(const PointCloud& fingers, const TriMesh& object);

/// Fraction of object samples whose nearest hand point is within threshold.
double contact_ratio(const PointCloud& object_samples, const PointCloud& hand, double threshold_cm);

/// Hand points whose segment is a finger link.
PointCloud finger_points(const RobotModel& robot, const PointCloud& hand);

/// Hand link meshes posed by forward kinematics.
std::vector<TriMesh> posed_link_meshes(const RobotModel& robot, const JointConfig& q,
                                       const std::vector<std::optional<TriMesh>>& link_meshes);

/// Hand configuration re-expressed in the object-local frame (the inverse
/// object pose applied to the base). Metrics are evaluated there against the
/// scaled local mesh, which keeps the voxel grid attached to the object.
JointConfig config_in_object_frame(const JointConfig& q, const SimilarityTransform& object_pose);
TriMesh scaled_object(const TriMesh& local, const SimilarityTransform& object_pose);

/// All four metrics for a grasp. `object` is the mesh in its local frame.
QualityMetrics quality_report(const GraspRecord& grasp, const RobotModel& robot, const LinkPointSet& pts,
                              const std::vector<std::optional<TriMesh>>& link_meshes,
                              const TriMesh& object, const MetricsConfig& cfg = {});

}  // namespace graspforge
