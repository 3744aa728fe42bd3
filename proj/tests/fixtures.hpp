#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "graspforge/kinematics.hpp"
#include "graspforge/pipeline.hpp"
#include "graspforge/random.hpp"

namespace fixtures {

using namespace graspforge;

inline std::string data_path(const std::string& rel) {
  return std::string(GRASPFORGE_TEST_DATA) + "/" + rel;
}

inline std::string toy_hand_path() { return data_path("toy_hand/toy_hand.urdf"); }

inline std::string temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("graspforge_" + name);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline JointConfig random_config(const RobotModel& model, Rng& rng, double max_rot = kPi,
                                 double max_trans = 0.2) {
  JointConfig q = rest_config(model);
  const Vec3 axis = rng.unit_vector();
  q.base.rotation = Quat(Eigen::AngleAxisd(rng.uniform(-max_rot, max_rot), axis)).normalized();
  q.base.translation = Vec3(rng.uniform(-max_trans, max_trans), rng.uniform(-max_trans, max_trans),
                            rng.uniform(-max_trans, max_trans));
  for (const auto& j : model.joints)
    if (j.dof >= 0) q.angles[j.dof] = rng.uniform(j.lower, j.upper);
  return q;
}

// Exact signed distance of an axis-aligned box, used as an oracle.
inline double box_sdf(const Vec3& lo, const Vec3& hi, const Vec3& p) {
  const Vec3 c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  const Vec3 q = (p - c).cwiseAbs() - h;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

struct ToyHand {
  RobotModel robot;
  std::vector<std::optional<TriMesh>> meshes;
  LinkPointSet pts;
};

inline ToyHand toy_hand(std::size_t points = 512, std::uint64_t seed = 7) {
  ToyHand h;
  h.robot = load_robot(toy_hand_path());
  h.meshes = load_link_meshes(h.robot);
  const auto counts = allocate_counts(h.meshes, points);
  h.pts = sample_link_points(h.robot, h.meshes, counts, seed);
  return h;
}

// Box held by the toy hand with every joint at 90 degrees, leaving a 1 mm
// gap to the palm, the proximal and distal phalanges and the thumb.
inline TriMesh grasp_box() { return make_box(Vec3(-0.03, 0.011, 0.009), Vec3(0.03, 0.036, 0.081)); }

inline JointConfig grasp_config(const RobotModel& robot) {
  JointConfig q = rest_config(robot);
  q.angles.setConstant(kPi / 2);
  return q;
}

// Ground-truth predictor: registers the query cloud to the object mesh and
// encodes a fixed object-frame grasp placed at the recovered pose.
inline Predictor oracle_predictor(const RobotModel& robot, const LinkPointSet& pts, const TriMesh& mesh,
                                  const JointConfig& grasp) {
  return [&robot, &pts, mesh, grasp](const PointCloud& query) {
    const IcpResult icp = icp_align(query, mesh);
    const SimilarityTransform to_query = icp.transform.inverse();
    JointConfig q = grasp;
    q.base = to_query.rigid() * grasp.base;
    return encode_grasp(robot, pts, q, query);
  };
}

inline double max_angle_error(const JointConfig& a, const JointConfig& b) {
  return (a.angles - b.angles).cwiseAbs().maxCoeff();
}

}  // namespace fixtures
