#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "graspforge/dro.hpp"
#include "graspforge/geometry.hpp"

using namespace graspforge;

namespace {

PointCloud random_cloud(Rng& rng, std::size_t n, double half) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i)
    c.points.emplace_back(rng.uniform(-half, half), rng.uniform(-half, half), rng.uniform(-half, half));
  return c;
}

PointCloud object_cloud() {
  return sample_surface(make_box(Vec3(-0.04, 0.011, 0.009), Vec3(0.04, 0.036, 0.081)), 512, 3);
}

double max_point_error(const PointCloud& a, const PointCloud& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, (a.points[i] - b.points[i]).norm());
  return e;
}

}  // namespace

TEST_CASE("encode") {
  PointCloud one;
  one.points = {Vec3(1, 2, 3)};
  const auto d1 = encode_distance_matrix(one, one);
  CHECK(d1.rows == 1);
  CHECK(d1.cols == 1);
  CHECK(d1.values == std::vector<float>{0.0f});

  Rng rng(1);
  const PointCloud c = random_cloud(rng, 6, 1.0);
  const auto self = encode_distance_matrix(c, c);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(self.at(i, i) == 0.0f);
    for (std::size_t j = 0; j < 6; ++j) CHECK(self.at(i, j) == self.at(j, i));
  }

  const PointCloud r = random_cloud(rng, 8, 1.0), o = random_cloud(rng, 5, 1.0);
  const auto d = encode_distance_matrix(r, o);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const Vec3 diff = r.points[i] - o.points[j];
      CHECK(d.at(i, j) == static_cast<float>(std::sqrt(diff.x() * diff.x() + diff.y() * diff.y() + diff.z() * diff.z())));
    }
  CHECK(d.object_identity == cloud_identity(o));
  CHECK_THROWS_AS(encode_distance_matrix(PointCloud{}, o), Error);

  SUBCASE("invariant to a common rigid transform") {
    const Pose t{Vec3(0.3, -0.2, 0.1), rng.rotation()};
    const auto moved = encode_distance_matrix(transform_cloud(r, t.matrix()), transform_cloud(o, t.matrix()));
    for (std::size_t k = 0; k < d.values.size(); ++k)
      CHECK(std::abs(moved.values[k] - d.values[k]) <= 1e-6f * (1.0f + d.values[k]));
  }
}

TEST_CASE("multilaterate_point") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + rng.index(20);
    const PointCloud anchors = random_cloud(rng, n, 0.1);
    const Vec3 x(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
    std::vector<double> d;
    for (const auto& a : anchors.points) d.push_back((x - a).norm());
    const auto m = multilaterate_point(anchors.points, d);
    CHECK((m.point - x).norm() < 1e-9);
    CHECK(m.residual < 1e-9);
  }

  SUBCASE("regular tetrahedron at the circumradius gives the centroid") {
    const std::vector<Vec3> tet = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
    const std::vector<double> d(4, std::sqrt(3.0));
    const auto m = multilaterate_point(tet, d);
    CHECK(m.point.norm() < 1e-12);
    const std::vector<double> far(4, 3.0);
    CHECK(multilaterate_point(tet, far).point.norm() < 1e-9);
  }
  SUBCASE("inconsistent ranges leave a positive residual") {
    const std::vector<Vec3> tet = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
    const std::vector<double> d = {1.0, 2.0, 3.0, 4.0};
    CHECK(multilaterate_point(tet, d).residual > 1e-3);
  }
  SUBCASE("noisy ranges with 512 anchors") {
    const PointCloud anchors = object_cloud();
    std::vector<double> errors;
    for (int trial = 0; trial < 50; ++trial) {
      const Vec3 x(rng.uniform(-0.05, 0.05), rng.uniform(-0.02, 0.05), rng.uniform(0.0, 0.1));
      std::vector<double> d;
      for (const auto& a : anchors.points) d.push_back((x - a).norm() + 1e-3 * rng.normal());
      errors.push_back((multilaterate_point(anchors.points, d).point - x).norm());
    }
    std::sort(errors.begin(), errors.end());
    CHECK(errors[errors.size() / 2] < 1e-3);
  }
  SUBCASE("degenerate geometry") {
    const std::vector<Vec3> planar = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
    CHECK_THROWS_AS(multilaterate_point(planar, std::vector<double>(4, 1.0)), Error);
    const std::vector<Vec3> three = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    CHECK_THROWS_AS(multilaterate_point(three, std::vector<double>(3, 1.0)), Error);
    const std::vector<Vec3> tet = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
    CHECK_THROWS_AS(multilaterate_point(tet, std::vector<double>(3, 1.0)), Error);
  }
}

TEST_CASE("multilaterate_cloud") {
  auto hand = fixtures::toy_hand();
  const PointCloud obj = object_cloud();
  Rng rng(8);
  const JointConfig q = fixtures::random_config(hand.robot, rng, 0.5, 0.02);
  const PointCloud robot_cloud = point_cloud_fk(hand.robot, q, hand.pts);
  DistanceMatrix d = encode_grasp(hand.robot, hand.pts, q, obj);
  const auto rec = multilaterate_cloud(d, obj);
  CHECK(rec.infeasible_count() == 0);
  CHECK(max_point_error(rec.cloud, robot_cloud) < 1e-6);

  PointCloud single;
  single.points = {robot_cloud.points[0]};
  const auto one = multilaterate_cloud(encode_distance_matrix(single, obj), obj);
  CHECK(one.cloud.size() == 1);
  CHECK((one.cloud.points[0] - single.points[0]).norm() < 1e-6);

  for (std::size_t j = 0; j < d.cols; ++j) d.values[17 * d.cols + j] = 0.0f;
  const auto bad = multilaterate_cloud(d, obj);
  CHECK(bad.infeasible_count() == 1);
  CHECK_FALSE(bad.feasible[17]);
  for (std::size_t i = 0; i < d.rows; ++i)
    if (i != 17) CHECK(bad.cloud.points[i] == rec.cloud.points[i]);

  PointCloud fewer = obj;
  fewer.points.pop_back();
  CHECK_THROWS_AS(multilaterate_cloud(d, fewer), Error);
}

TEST_CASE("fit_configuration") {
  auto hand = fixtures::toy_hand();
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const JointConfig truth = fixtures::random_config(hand.robot, rng);
    const PointCloud target = point_cloud_fk(hand.robot, truth, hand.pts);
    const auto fit = fit_configuration(hand.robot, hand.pts, target);
    CHECK(fit.rms < 1e-6);
    CHECK(fixtures::max_angle_error(fit.q, truth) < 1e-3);
    for (std::size_t i = 1; i < fit.history.size(); ++i) CHECK(fit.history[i] <= fit.history[i - 1]);
  }

  SUBCASE("rigidly moved rest cloud") {
    const Pose t{Vec3(0.1, 0.2, -0.3), rng.rotation()};
    JointConfig moved = rest_config(hand.robot);
    moved.base = t;
    const auto fit = fit_configuration(hand.robot, hand.pts, point_cloud_fk(hand.robot, moved, hand.pts));
    CHECK((fit.q.base.translation - t.translation).norm() < 1e-9);
    CHECK(rotation_angle_between(fit.q.base.rotation, t.rotation) < 1e-9);
    CHECK(fixtures::max_angle_error(fit.q, rest_config(hand.robot)) < 1e-9);
  }
  SUBCASE("1 mm noise") {
    const JointConfig truth = fixtures::random_config(hand.robot, rng);
    PointCloud target = point_cloud_fk(hand.robot, truth, hand.pts);
    for (auto& p : target.points) p += 1e-3 * Vec3(rng.normal(), rng.normal(), rng.normal());
    const auto fit = fit_configuration(hand.robot, hand.pts, target);
    CHECK(fit.rms < 1.8e-3);
    for (const auto& j : hand.robot.joints)
      if (j.dof >= 0) CHECK((fit.q.angles[j.dof] >= j.lower && fit.q.angles[j.dof] <= j.upper));
  }
  SUBCASE("errors") {
    PointCloud small;
    small.points.resize(3);
    CHECK_THROWS_AS(fit_configuration(hand.robot, hand.pts, small), Error);
    const PointCloud target = point_cloud_fk(hand.robot, rest_config(hand.robot), hand.pts);
    std::vector<double> w(target.size(), 1.0);
    for (std::size_t k = 0; k < hand.pts.per_link[hand.robot.root].size(); ++k) w[hand.pts.offsets[hand.robot.root] + k] = 0.0;
    CHECK_THROWS_AS(fit_configuration(hand.robot, hand.pts, target, std::nullopt, w), Error);
  }
}

TEST_CASE("decode_grasp") {
  auto hand = fixtures::toy_hand();
  const PointCloud obj = object_cloud();
  Rng rng(31);
  const JointConfig truth = fixtures::random_config(hand.robot, rng, 0.6, 0.03);
  const DistanceMatrix d = encode_grasp(hand.robot, hand.pts, truth, obj);
  const auto dec = decode_grasp(d, obj, hand.robot, hand.pts);
  CHECK(dec.record.provenance == Provenance::Decoded);
  CHECK(fixtures::max_angle_error(dec.record.q, truth) < 1e-3);
  CHECK((dec.record.q.base.translation - truth.base.translation).norm() < 1e-4);
  CHECK(dec.record.fit_rms.value() < 1e-6);

  SUBCASE("translated grasp decodes to a translated base") {
    JointConfig shifted = truth;
    shifted.base.translation += Vec3(0.01, -0.02, 0.005);
    const auto ds = decode_grasp(encode_grasp(hand.robot, hand.pts, shifted, obj), obj, hand.robot, hand.pts);
    CHECK((ds.record.q.base.translation - dec.record.q.base.translation - Vec3(0.01, -0.02, 0.005)).norm() < 1e-5);
  }
  SUBCASE("rigidly moved object cloud moves the base") {
    const Pose t{Vec3(0.2, 0.1, -0.1), rng.rotation()};
    const PointCloud moved = transform_cloud(obj, t.matrix());
    DistanceMatrix dm = d;
    dm.object_identity = cloud_identity(moved);
    const auto dt = decode_grasp(dm, moved, hand.robot, hand.pts);
    const Pose expected = t * truth.base;
    CHECK((dt.record.q.base.translation - expected.translation).norm() < 1e-4);
    CHECK(rotation_angle_between(dt.record.q.base.rotation, expected.rotation) < 1e-4);
    CHECK(fixtures::max_angle_error(dt.record.q, truth) < 1e-3);
    CHECK_THROWS_AS(decode_grasp(d, moved, hand.robot, hand.pts), Error);
  }
  SUBCASE("5% multiplicative noise still decodes") {
    DistanceMatrix noisy = d;
    for (auto& v : noisy.values) v = static_cast<float>(v * (1.0 + 0.05 * rng.normal()));
    for (auto& v : noisy.values) v = std::max(v, 0.0f);
    DecodeResult dn;
    CHECK_NOTHROW(dn = decode_grasp(noisy, obj, hand.robot, hand.pts));
    CHECK(std::isfinite(dn.record.fit_rms.value()));
    CHECK(dn.record.fit_rms.value() > 0.0);
  }
  SUBCASE("identity mismatch") {
    DistanceMatrix other = d;
    other.robot_identity ^= 1;
    CHECK_THROWS_AS(decode_grasp(other, obj, hand.robot, hand.pts), Error);
  }
}
