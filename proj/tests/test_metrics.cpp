#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "graspforge/geometry.hpp"
#include "graspforge/metrics.hpp"

using namespace graspforge;

namespace {

PointCloud cloud_of(std::vector<Vec3> pts) {
  PointCloud c;
  c.points = std::move(pts);
  return c;
}

double brute_contact_ratio(const PointCloud& obj, const PointCloud& hand, double thr_cm) {
  const double t = thr_cm / 100.0;
  std::size_t hits = 0;
  for (const auto& p : obj.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& h : hand.points) best = std::min(best, (p - h).squaredNorm());
    if (best <= t * t) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(obj.size());
}

bool in_box(const Vec3& lo, const Vec3& hi, const Vec3& p) {
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

}  // namespace

TEST_CASE("penetration depth") {
  const TriMesh cube = make_box(Vec3::Constant(-0.5), Vec3::Constant(0.5));
  CHECK(penetration_depth(cloud_of({Vec3(2, 0, 0), Vec3(0, 0.6, 0)}), cube) == 0.0);
  CHECK(penetration_depth(cloud_of({Vec3::Zero()}), cube) == doctest::Approx(50.0).epsilon(1e-12));

  Rng rng(3);
  const Vec3 lo(-0.05, -0.02, 0.0), hi(0.04, 0.03, 0.06);
  const TriMesh box = make_box(lo, hi);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud hand;
    double oracle = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Vec3 p(rng.uniform(-0.07, 0.06), rng.uniform(-0.04, 0.05), rng.uniform(-0.02, 0.08));
      hand.points.push_back(p);
      oracle = std::max(oracle, -fixtures::box_sdf(lo, hi, p));
    }
    CHECK(std::abs(penetration_depth(hand, box) - 100.0 * oracle) < 1e-6);
    CHECK((penetration_depth(hand, box) > 0) == (oracle > 0));
  }
  std::vector<Vec3> verts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  CHECK_THROWS_AS(penetration_depth(cloud_of({Vec3::Zero()}), TriMesh(verts, {{0, 1, 2}})), Error);
}

TEST_CASE("penetration volume") {
  const TriMesh a = make_box(Vec3::Zero(), Vec3::Ones());
  const std::vector<TriMesh> far = {make_box(Vec3::Constant(2), Vec3::Constant(3))};
  CHECK(penetration_volume(far, a, 0.2) == 0.0);

  SUBCASE("slab overlap of two unit cubes") {
    const std::vector<TriMesh> b = {make_box(Vec3(0.9, 0, 0), Vec3(1.9, 1, 1))};
    const double vol = penetration_volume(b, a, 0.2);
    const double layer = 100.0 * 100.0 * 0.2;  // slab face area (cm^2) x voxel
    CHECK(std::abs(vol - 100000.0) <= layer);
  }
  SUBCASE("contained small cube") {
    const std::vector<TriMesh> small = {make_box(Vec3(0.3, 0.3, 0.3), Vec3(0.32, 0.32, 0.32))};
    const double vol = penetration_volume(small, a, 0.2);
    CHECK(std::abs(vol - 8.0) <= 24.0 * 0.2);
    CHECK(penetration_volume(small, a, 0.1) == doctest::Approx(8.0).epsilon(0.6));
  }
  SUBCASE("voxel count matches a per-center oracle on rotated boxes") {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
      const Vec3 lo(rng.uniform(0.0, 0.03), rng.uniform(0.0, 0.03), rng.uniform(0.0, 0.03));
      const Vec3 hi = lo + Vec3(rng.uniform(0.02, 0.05), rng.uniform(0.02, 0.05), rng.uniform(0.02, 0.05));
      const Quat r = rng.rotation();
      const Vec3 t(rng.uniform(0.0, 0.02), rng.uniform(0.0, 0.02), rng.uniform(0.0, 0.02));
      Transform tf = Transform::Identity();
      tf.linear() = r.toRotationMatrix();
      tf.translation() = t;
      const TriMesh obj = make_box(Vec3::Zero(), Vec3::Constant(0.05));
      const std::vector<TriMesh> hand = {make_box(lo, hi).transformed(tf)};
      const double v = 0.002;
      long long count = 0;
      for (int i = -10; i < 40; ++i)
        for (int j = -10; j < 40; ++j)
          for (int k = -10; k < 40; ++k) {
            const Vec3 c((i + 0.5) * v, (j + 0.5) * v, (k + 0.5) * v);
            if (in_box(Vec3::Zero(), Vec3::Constant(0.05), c) && in_box(lo, hi, tf.inverse() * c)) ++count;
          }
      CHECK(penetration_volume(hand, obj, 0.2) == doctest::Approx(count * 0.008).epsilon(1e-12));
    }
  }
  SUBCASE("halving the voxel stays within the surface-layer bound") {
    const TriMesh sphere = make_icosphere(0.03, 3, Vec3(0.011, 0.004, -0.002));
    const std::vector<TriMesh> hand = {make_box(Vec3(0.0, -0.05, -0.05), Vec3(0.05, 0.05, 0.05))};
    const double coarse = penetration_volume(hand, sphere, 0.2);
    const double fine = penetration_volume(hand, sphere, 0.1);
    const double bound = (sphere.total_area() + 0.01) * 1e4 * 0.2;
    CHECK(std::abs(coarse - fine) < bound);
  }
  CHECK_THROWS_AS(penetration_volume(far, a, 0.0), Error);
}

TEST_CASE("disjoint distance") {
  const TriMesh sphere = make_icosphere(1.0, 2);
  PointCloud on, off;
  const auto& v = sphere.vertices();
  for (const auto& t : sphere.triangles()) {
    const Vec3 c = (v[t[0]] + v[t[1]] + v[t[2]]) / 3.0;
    const Vec3 n = (v[t[1]] - v[t[0]]).cross(v[t[2]] - v[t[0]]).normalized();
    on.points.push_back(c);
    off.points.push_back(c + 0.0009 * n);
  }
  CHECK(disjoint_distance(on, sphere) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(disjoint_distance(off, sphere) == doctest::Approx(0.09).epsilon(1e-9));

  const Vec3 lo(-0.02, -0.02, -0.02), hi(0.02, 0.03, 0.01);
  const TriMesh box = make_box(lo, hi);
  Rng rng(5);
  PointCloud mixed;
  double oracle = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Vec3 p(rng.uniform(-0.04, 0.04), rng.uniform(-0.04, 0.05), rng.uniform(-0.03, 0.03));
    mixed.points.push_back(p);
    oracle += std::max(0.0, fixtures::box_sdf(lo, hi, p));
  }
  CHECK(std::abs(disjoint_distance(mixed, box) - 100.0 * oracle / 500.0) < 1e-6);
  CHECK_THROWS_AS(disjoint_distance(PointCloud{}, box), Error);
}

TEST_CASE("contact ratio") {
  const TriMesh box = make_box(Vec3::Zero(), Vec3::Constant(0.05));
  const PointCloud samples = sample_surface(box, 300, 1);
  CHECK(contact_ratio(samples, cloud_of({Vec3::Constant(5.0)}), 0.5) == 0.0);
  CHECK(contact_ratio(samples, samples, 0.5) == 1.0);
  CHECK_THROWS_AS(contact_ratio(PointCloud{}, samples, 0.5), Error);

  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud hand;
    for (int i = 0; i < 150; ++i)
      hand.points.emplace_back(rng.uniform(-0.01, 0.06), rng.uniform(-0.01, 0.06), rng.uniform(-0.01, 0.06));
    const double thr = rng.uniform(0.2, 1.0);
    CHECK(contact_ratio(samples, hand, thr) == brute_contact_ratio(samples, hand, thr));
    double prev = 1.0;
    for (double t = 1.0; t > 0.05; t *= 0.7) {
      const double r = contact_ratio(samples, hand, t);
      CHECK(r <= prev);
      prev = r;
    }
  }
}

TEST_CASE("quality report") {
  auto hand = fixtures::toy_hand();
  const TriMesh object = make_box(Vec3(-0.03, -0.03, -0.03), Vec3(0.03, 0.03, 0.03));
  GraspRecord g;
  g.q = rest_config(hand.robot);
  g.object.pose.translation = Vec3(1.0, 0.0, 0.0);
  const QualityMetrics far = quality_report(g, hand.robot, hand.pts, hand.meshes, object);
  CHECK(far.penetration_depth == 0.0);
  CHECK(far.penetration_volume == 0.0);
  CHECK(far.disjoint_mean > 90.0);
  CHECK(far.contact_ratio == 0.0);
  CHECK(far.contact_threshold_cm == 0.5);
  CHECK(far.voxel_cm == 0.2);

  // Palm pushed into the box: fields match separately computed oracles.
  g.object.pose.translation = Vec3(0.0, 0.035, 0.05);
  const QualityMetrics m = quality_report(g, hand.robot, hand.pts, hand.meshes, object);
  const JointConfig ql = config_in_object_frame(g.q, g.object.pose);
  const PointCloud cloud = point_cloud_fk(hand.robot, ql, hand.pts);
  const Vec3 lo = Vec3::Constant(-0.03), hi = Vec3::Constant(0.03);
  double depth = 0.0, out = 0.0;
  std::size_t nf = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d = fixtures::box_sdf(lo, hi, cloud.points[i]);
    depth = std::max(depth, -d);
    if (hand.robot.is_finger(cloud.segments[i])) {
      out += std::max(0.0, d);
      ++nf;
    }
  }
  CHECK(m.penetration_depth > 0.0);
  CHECK(std::abs(m.penetration_depth - 100.0 * depth) < 1e-6);
  CHECK(std::abs(m.disjoint_mean - 100.0 * out / nf) < 1e-6);
  CHECK(m.penetration_volume > 0.0);
  CHECK(m.contact_ratio > 0.0);
  CHECK(m.contact_ratio <= 1.0);

  SUBCASE("joint rigid transform of hand and object leaves metrics unchanged") {
    Rng rng(9);
    for (int trial = 0; trial < 3; ++trial) {
      const Pose t{Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)), rng.rotation()};
      GraspRecord moved = g;
      moved.q.base = t * g.q.base;
      const Pose op = t * Pose{g.object.pose.translation, g.object.pose.rotation};
      moved.object.pose.rotation = op.rotation;
      moved.object.pose.translation = op.translation;
      const QualityMetrics mm = quality_report(moved, hand.robot, hand.pts, hand.meshes, object);
      CHECK(mm.penetration_depth == doctest::Approx(m.penetration_depth).epsilon(1e-9));
      CHECK(mm.penetration_volume == doctest::Approx(m.penetration_volume).epsilon(1e-9));
      CHECK(mm.disjoint_mean == doctest::Approx(m.disjoint_mean).epsilon(1e-9));
      CHECK(mm.contact_ratio == doctest::Approx(m.contact_ratio).epsilon(1e-9));
    }
  }
  SUBCASE("deterministic") {
    CHECK(quality_report(g, hand.robot, hand.pts, hand.meshes, object) == m);
  }
}
