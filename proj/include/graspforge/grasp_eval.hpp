#pragma once

#include <vector>

#include "graspforge/kinematics.hpp"
#include "graspforge/record.hpp"

namespace graspforge {

struct ContactPoint {
  Vec3 position = Vec3::Zero();  // on the object surface
  Vec3 normal = Vec3::UnitZ();   // unit, pointing into the object
  int link = -1;
  bool penetrating = false;
};

/// Hand points (object frame) within `threshold_cm` of the surface, projected
/// onto it, greedily thinned so no two contacts of one link are closer than
/// `cluster_cm`.
std::vector<ContactPoint> extract_contacts(const PointCloud& hand, const TriMesh& object, double threshold_cm,
                                           double cluster_cm = 0.5);

struct WrenchSpace {
  double mu = 0.5;
  int facets = 8;
  double torque_scale = 1.0;      // meters
  Vec3 center = Vec3::Zero();     // torque reference point
  double torsion_radius = 0.005;  // soft-finger patch radius, meters; 0 = hard finger
};

/// Primitive wrenches (force; torque / torque_scale) of the linearized
/// friction cones. Each contact contributes `facets` edges with unit normal
/// component plus two torsional primitives when torsion_radius > 0.
std::vector<Eigen::Matrix<double, 6, 1>> contact_wrenches(const std::vector<ContactPoint>& contacts,
                                                          const WrenchSpace& ws);

/// Radius of the largest origin-centred ball inside the convex hull of the
/// primitive wrenches; 0 when the origin is not strictly inside.
double force_closure_epsilon(const std::vector<ContactPoint>& contacts, const WrenchSpace& ws);

/// Hand cloud and object mesh of a grasp, both in the object-local frame
/// with the pose scale applied.
struct PosedGrasp {
  PointCloud hand;
  TriMesh object;
};
PosedGrasp pose_grasp(const GraspRecord& grasp, const RobotModel& robot, const LinkPointSet& pts,
                      const TriMesh& object);

GraspVerdict evaluate_grasp(const GraspRecord& grasp, const RobotModel& robot, const LinkPointSet& pts,
                            const TriMesh& object, const EvalConfig& cfg = {});

struct DepenetrateOptions {
  int max_iters = 20;
  double margin = 1e-4;  // meters pushed beyond the surface
};

/// Joint-space Gauss-Newton pass pushing penetrating hand points out along
/// the SDF gradient. Returns the corrected configuration.
JointConfig depenetrate(const GraspRecord& grasp, const RobotModel& robot, const LinkPointSet& pts,
                        const TriMesh& object, const DepenetrateOptions& opts = {});

}  // namespace graspforge
