#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "graspforge/retarget.hpp"

using namespace graspforge;

namespace {

// Human keypoints that the default mapping would map exactly onto q.
HumanHandKeypoints realizable(const RobotModel& robot, const RetargetMapping& map, const JointConfig& q) {
  HumanHandKeypoints kp;
  const auto kps = keypoint_fk(robot, q);
  for (const auto& p : map.pairs) kp.points[p.human] = kps[robot.keypoint_index(p.robot)] / map.scale;
  return kp;
}

bool non_increasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[i - 1]) return false;
  return true;
}

bool within_limits(const RobotModel& robot, const JointConfig& q) {
  for (const auto& j : robot.joints)
    if (j.dof >= 0 && (q.angles[j.dof] < j.lower || q.angles[j.dof] > j.upper)) return false;
  return true;
}

}  // namespace

TEST_CASE("default mapping") {
  const RobotModel robot = load_robot(fixtures::toy_hand_path());
  const RetargetMapping map = default_mapping(robot);
  CHECK(map.pairs.size() == 11);
  CHECK(map.pairs[0].robot == "wrist");
  int tips = 0;
  for (const auto& p : map.pairs)
    if (p.weight == 2.0) ++tips;
  CHECK(tips == 5);

  RetargetMapping bad = map;
  bad.pairs[1].robot = "pinky_tip";
  CHECK_THROWS_AS(bad.validate(robot), Error);
  bad = map;
  bad.pairs.resize(3);
  CHECK_THROWS_AS(bad.validate(robot), Error);
  bad = map;
  bad.pairs[2].human = 21;
  CHECK_THROWS_AS(bad.validate(robot), Error);
  bad = map;
  bad.scale = 0.0;
  CHECK_THROWS_AS(bad.validate(robot), Error);
}

TEST_CASE("self-consistent targets are recovered") {
  const RobotModel robot = load_robot(fixtures::toy_hand_path());
  RetargetMapping map = default_mapping(robot);
  map.regularization = 0.0;
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const JointConfig truth = fixtures::random_config(robot, rng, 30.0 * kPi / 180.0, 0.05);
    const auto kp = realizable(robot, map, truth);
    const auto res = retarget(kp, robot, map, rest_config(robot));
    CHECK(res.residual < 1e-6);
    CHECK(fixtures::max_angle_error(res.q, truth) < 1e-3);
    CHECK(non_increasing(res.history));
    CHECK(within_limits(robot, res.q));
  }
}

TEST_CASE("fixed point, saturation and invalid input") {
  const RobotModel robot = load_robot(fixtures::toy_hand_path());
  const RetargetMapping map = default_mapping(robot);
  const JointConfig rest = rest_config(robot);

  const auto at_rest = retarget(realizable(robot, map, rest), robot, map, rest);
  CHECK(at_rest.residual == 0.0);
  CHECK(fixtures::max_angle_error(at_rest.q, rest) == 0.0);
  CHECK(at_rest.q.base.translation == rest.base.translation);

  HumanHandKeypoints far = realizable(robot, map, rest);
  RetargetMapping fingers_only = map;
  fingers_only.pairs.erase(fingers_only.pairs.begin());
  for (auto& p : far.points) p += Vec3(0, 0, 10.0);
  JointConfig q0 = rest;
  const auto sat = retarget(far, robot, fingers_only, q0);
  CHECK(std::isfinite(sat.residual));
  CHECK(within_limits(robot, sat.q));
  CHECK(non_increasing(sat.history));

  HumanHandKeypoints nan = far;
  nan.points[3].x() = std::nan("");
  CHECK_THROWS_AS(retarget(nan, robot, map, rest), Error);
  HumanHandKeypoints conf = far;
  conf.confidence[0] = 1.5;
  CHECK_THROWS_AS(retarget(conf, robot, map, rest), Error);
}

TEST_CASE("targets pulled 10 m apart stay bounded") {
  const RobotModel robot = load_robot(fixtures::toy_hand_path());
  RetargetMapping map = default_mapping(robot);
  HumanHandKeypoints kp = realizable(robot, map, rest_config(robot));
  kp.points[0] += Vec3(0, -10.0, 0);
  for (int i = 1; i < 21; ++i) kp.points[i] += Vec3(0, 10.0, 0);
  const auto res = retarget(kp, robot, map, rest_config(robot));
  CHECK(non_increasing(res.history));
  CHECK(within_limits(robot, res.q));
  CHECK(std::isfinite(res.residual));
  // Wrist (weight 1) and fingers (total weight 15) are 20 m apart: the
  // optimum splits the gap 15:1, giving a residual of 20 * sqrt(15) / 16
  // up to the hand's own extent.
  CHECK(std::abs(res.residual - 20.0 * std::sqrt(15.0) / 16.0) < 0.2);
  CHECK(res.q.base.translation.norm() < 20.0);
}

TEST_CASE("rigid motion of the targets is absorbed by the base") {
  const RobotModel robot = load_robot(fixtures::toy_hand_path());
  RetargetMapping map = default_mapping(robot);
  map.regularization = 0.0;
  Rng rng(4);
  const JointConfig truth = fixtures::random_config(robot, rng, 0.3, 0.03);
  const auto kp = realizable(robot, map, truth);
  const auto a = retarget(kp, robot, map, rest_config(robot));
  const Pose t{Vec3(0.02, -0.01, 0.03), Quat(Eigen::AngleAxisd(0.2, Vec3(1, 2, 3).normalized()))};
  HumanHandKeypoints moved = kp;
  for (auto& p : moved.points) p = t.apply(p);
  JointConfig q0 = rest_config(robot);
  q0.base = t * q0.base;
  const auto b = retarget(moved, robot, map, q0);
  CHECK(fixtures::max_angle_error(a.q, b.q) < 1e-6);
  const Pose expected = t * a.q.base;
  CHECK((b.q.base.translation - expected.translation).norm() < 1e-6);
  CHECK(rotation_angle_between(b.q.base.rotation, expected.rotation) < 1e-6);
}
