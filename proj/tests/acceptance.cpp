// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "graspforge/dro.hpp"
#include "graspforge/geometry.hpp"
#include "graspforge/grasp_eval.hpp"
#include "graspforge/io.hpp"
#include "graspforge/metrics.hpp"
#include "graspforge/pipeline.hpp"
#include "graspforge/retarget.hpp"

using namespace graspforge;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      detail << what << "; ";
      pass = false;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PointCloud random_cloud(Rng& rng, std::size_t n, double half) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i)
    c.points.emplace_back(rng.uniform(-half, half), rng.uniform(-half, half), rng.uniform(-half, half));
  return c;
}

bool non_increasing(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[i - 1]) return false;
  return true;
}

ContactPoint contact(const Vec3& p, const Vec3& n) {
  ContactPoint c;
  c.position = p;
  c.normal = n.normalized();
  return c;
}

TriMesh asymmetric_solid() {
  std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(0.08, 0, 0), Vec3(0, 0.05, 0), Vec3(0, 0, 0.03), Vec3(0.02, 0.01, 0.06)};
  std::vector<Triangle> t = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 4}, {1, 4, 3}, {2, 3, 4}};
  return TriMesh(v, t);
}

// ---------------------------------------------------------------------------

void c1(Outcome& o) {
  auto hand = fixtures::toy_hand(512, 7);
  const PointCloud obj = sample_surface(fixtures::grasp_box(), 512, 3);
  Rng rng(101);
  double worst_angle = 0.0, worst_trans = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 100; ++i) {
    const JointConfig q = fixtures::random_config(hand.robot, rng, kPi, 0.05);
    const auto dec = decode_grasp(encode_grasp(hand.robot, hand.pts, q, obj), obj, hand.robot, hand.pts);
    worst_angle = std::max(worst_angle, fixtures::max_angle_error(dec.record.q, q));
    worst_trans = std::max(worst_trans, (dec.record.q.base.translation - q.base.translation).norm());
  }
  const double secs = seconds_since(t0);
  o.require(worst_angle < 1e-3, "angle error");
  o.require(worst_trans < 1e-4, "translation error");
  o.require(secs < 60.0, "runtime");
  o.detail << "100 configs, max angle err " << worst_angle << " rad, max base err " << worst_trans << " m, " << secs
           << " s";
}

void c2(Outcome& o) {
  Rng rng(202);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const PointCloud anchors = random_cloud(rng, 4 + rng.index(28), 0.1);
    const Vec3 x(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
    std::vector<double> d;
    for (const auto& a : anchors.points) d.push_back((x - a).norm());
    worst = std::max(worst, (multilaterate_point(anchors.points, d).point - x).norm());
  }
  const PointCloud anchors = sample_surface(fixtures::grasp_box(), 512, 5);
  const Multilaterator solver(anchors.points);
  std::vector<double> errors;
  for (int i = 0; i < 200; ++i) {
    const Vec3 x(rng.uniform(-0.05, 0.05), rng.uniform(-0.02, 0.05), rng.uniform(0.0, 0.1));
    std::vector<double> d;
    for (const auto& a : anchors.points) d.push_back((x - a).norm() + 1e-3 * rng.normal());
    errors.push_back((solver.solve(d).point - x).norm());
  }
  std::nth_element(errors.begin(), errors.begin() + 100, errors.end());
  const double median = errors[100];
  o.require(worst <= 1e-9, "exact recovery");
  o.require(median < 1e-3, "noisy median");
  o.detail << "1000 exact cases, max err " << worst << " m; 512 anchors at 1 mm noise, median err " << median << " m";
}

void c3(Outcome& o) {
  const TriMesh solid = asymmetric_solid();
  const PointCloud src = sample_surface(solid, 1000, 9);
  Rng rng(303);
  double worst_deg = 0.0, worst_t = 0.0, worst_s = 0.0;
  for (int i = 0; i < 20; ++i) {
    SimilarityTransform truth;
    truth.rotation = Quat(Eigen::AngleAxisd(rng.uniform(0.0, 30.0) * kPi / 180.0, rng.unit_vector()));
    truth.translation = Vec3(rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03));
    IcpOptions opts;
    opts.initial = SimilarityTransform{};
    const IcpResult r = icp_align(src, transform_cloud(src, truth), opts);
    worst_deg = std::max(worst_deg, rotation_angle_between(r.transform.rotation, truth.rotation) * 180.0 / kPi);
    worst_t = std::max(worst_t, (r.transform.translation - truth.translation).norm());

    truth.scale = 1.2;
    opts.estimate_scale = true;
    const IcpResult s = icp_align(src, transform_cloud(src, truth), opts);
    worst_s = std::max(worst_s, std::abs(s.transform.scale - 1.2));
  }
  o.require(worst_deg <= 0.1, "rotation");
  o.require(worst_t <= 1e-4, "translation");
  o.require(worst_s <= 1e-3, "scale");
  o.detail << "20 transforms up to 30 deg, max rot err " << worst_deg << " deg, max trans err " << worst_t
           << " m, max scale err " << worst_s;
}

void c4(Outcome& o) {
  const TriMesh a = make_box(Vec3::Zero(), Vec3::Ones());
  const std::vector<TriMesh> b = {make_box(Vec3(0.9, 0, 0), Vec3(1.9, 1, 1))};
  const double vol = penetration_volume(b, a, 0.2);
  const double layer = 100.0 * 100.0 * 0.2;
  o.require(std::abs(vol - 100000.0) <= layer, "slab volume");

  const TriMesh box = make_box(Vec3::Zero(), Vec3::Constant(0.05));
  const PointCloud samples = sample_surface(box, 300, 1);
  Rng rng(404);
  int ratio_mismatch = 0;
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud hand;
    for (int i = 0; i < 150; ++i)
      hand.points.emplace_back(rng.uniform(-0.01, 0.06), rng.uniform(-0.01, 0.06), rng.uniform(-0.01, 0.06));
    const double thr = rng.uniform(0.2, 1.0), t = thr / 100.0;
    std::size_t hits = 0;
    for (const auto& p : samples.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& h : hand.points) best = std::min(best, (p - h).squaredNorm());
      if (best <= t * t) ++hits;
    }
    if (contact_ratio(samples, hand, thr) != static_cast<double>(hits) / static_cast<double>(samples.size()))
      ++ratio_mismatch;
  }
  o.require(ratio_mismatch == 0, "contact ratio");

  const Vec3 lo(-0.05, -0.02, 0.0), hi(0.04, 0.03, 0.06);
  const TriMesh probe = make_box(lo, hi);
  double depth_err = 0.0, disjoint_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud pts;
    double deepest = 0.0, outside = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Vec3 p(rng.uniform(-0.07, 0.06), rng.uniform(-0.04, 0.05), rng.uniform(-0.02, 0.08));
      pts.points.push_back(p);
      const double s = fixtures::box_sdf(lo, hi, p);
      deepest = std::max(deepest, -s);
      outside += std::max(0.0, s);
    }
    depth_err = std::max(depth_err, std::abs(penetration_depth(pts, probe) - 100.0 * deepest));
    disjoint_err = std::max(disjoint_err, std::abs(disjoint_distance(pts, probe) - 100.0 * outside / 200.0));
  }
  o.require(depth_err < 1e-6, "depth");
  o.require(disjoint_err < 1e-6, "disjoint");
  o.detail << "slab " << vol << " cm3 (bound " << layer << "), " << 20 - ratio_mismatch
           << "/20 contact ratios exact, depth err " << depth_err << " cm, disjoint err " << disjoint_err << " cm";
}

void c5(Outcome& o) {
  Rng rng(505);
  double worst_gap = -1.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2000;
    std::vector<double> xs(n), ys(n);
    const double mx = rng.uniform(0.1, 0.5), my = rng.uniform(0.1, 0.5);
    for (auto& x : xs) x = std::clamp(mx + 0.1 * rng.normal(), 0.0, 0.999);
    for (auto& y : ys) y = std::clamp(my + 0.05 * rng.normal(), 0.0, 0.999);
    const auto ha = histogram_from_samples(xs, 50, 1.0);
    const auto hb = histogram_from_samples(ys, 50, 1.0);
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double oracle = 0.0;
    for (std::size_t i = 0; i < n; ++i) oracle += std::abs(xs[i] - ys[i]);
    oracle /= static_cast<double>(n);
    worst_gap = std::max(worst_gap, std::abs(wasserstein_1d(ha, hb) - oracle) / ha.bin_width());
  }
  o.require(worst_gap <= 1.0, "W1 oracle");

  const PointCloud cloud = sample_surface(make_box(Vec3::Zero(), Vec3(0.1, 0.2, 0.05)), 2000, 4);
  SimilarityTransform t;
  t.rotation = Quat(Eigen::AngleAxisd(1.2, Vec3(1, -1, 2).normalized()));
  t.translation = Vec3(1, 2, 3);
  const D2Options opts{.pairs = 100000, .bins = 64, .range_max = 0.3, .seed = 8};
  const auto h1 = d2_descriptor(cloud, opts);
  auto other = opts;
  other.seed = 77;
  const auto h2 = d2_descriptor(transform_cloud(cloud, t), other);
  double tv = 0.0;
  for (std::size_t i = 0; i < h1.bins(); ++i) tv += std::abs(h1.masses[i] - h2.masses[i]);
  tv *= 0.5;
  o.require(tv < 0.02, "D2 invariance");
  o.detail << "100 W1 pairs, worst gap " << worst_gap << " bin widths; D2 TV under rigid motion " << tv;
}

void c6(Outcome& o) {
  const RobotModel robot = load_robot(fixtures::toy_hand_path());
  RetargetMapping map = default_mapping(robot);
  map.regularization = 0.0;
  Rng rng(606);
  double worst_res = 0.0, worst_angle = 0.0;
  int non_monotone = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const JointConfig truth = fixtures::random_config(robot, rng, 30.0 * kPi / 180.0, 0.05);
    HumanHandKeypoints kp;
    const auto kps = keypoint_fk(robot, truth);
    for (const auto& p : map.pairs) kp.points[p.human] = kps[robot.keypoint_index(p.robot)];
    const auto r = retarget(kp, robot, map, rest_config(robot));
    worst_res = std::max(worst_res, r.residual);
    worst_angle = std::max(worst_angle, fixtures::max_angle_error(r.q, truth));
    if (!non_increasing(r.history)) ++non_monotone;

    // Unrealizable targets: monotonicity still holds.
    for (auto& p : kp.points) p += Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.01;
    if (!non_increasing(retarget(kp, robot, default_mapping(robot), rest_config(robot)).history)) ++non_monotone;
  }
  o.require(worst_res < 1e-6, "residual");
  o.require(worst_angle < 1e-3, "angles");
  o.require(non_monotone == 0, "monotonicity");
  o.detail << "100 poses, max residual " << worst_res << " m, max angle err " << worst_angle << " rad, "
           << non_monotone << "/200 non-monotone runs";
}

void c7(Outcome& o) {
  WrenchSpace s;
  s.mu = 0.5;
  s.torque_scale = 2.0;
  const std::vector<ContactPoint> antipodal = {contact(Vec3(1, 0, 0), Vec3(-1, 0, 0)),
                                               contact(Vec3(-1, 0, 0), Vec3(1, 0, 0))};
  const double eps_anti = force_closure_epsilon(antipodal, s);
  const double eps_single = force_closure_epsilon({contact(Vec3(1, 0, 0), Vec3(-1, 0, 0))}, s);
  o.require(eps_anti > 0.0, "antipodal");
  o.require(eps_single == 0.0, "single contact");

  // Antipodal grasp on a sphere mesh through contact extraction.
  const TriMesh sphere = make_icosphere(0.03, 3);
  PointCloud pads;
  for (double sgn : {-1.0, 1.0})
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j) {
        const Vec3 d(sgn, 0.001 * i, 0.001 * j);
        pads.points.push_back(d.normalized() * 0.0302);
      }
  WrenchSpace ws;
  ws.torque_scale = sphere.bounds().diagonal();
  const double eps_mesh = force_closure_epsilon(extract_contacts(pads, sphere, 0.5), ws);
  o.require(eps_mesh > 0.0, "sphere mesh antipodal");

  Rng rng(707);
  int non_monotone = 0;
  double worst_rel = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ContactPoint> cs;
    const int count = 3 + static_cast<int>(rng.index(6));
    for (int i = 0; i < count; ++i) {
      const Vec3 n = rng.unit_vector();
      cs.push_back(contact(-n * 0.04, n));
    }
    WrenchSpace w;
    w.torque_scale = 0.08;
    w.center = Vec3(rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01));
    double prev = 0.0;
    for (int k = 1; k <= 10; ++k) {
      w.mu = 0.1 * k;
      const double e = force_closure_epsilon(cs, w);
      if (e < prev - 1e-12) ++non_monotone;
      prev = e;
    }
    w.mu = 0.5;
    const double e = force_closure_epsilon(cs, w);
    const Pose t{Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)), rng.rotation()};
    auto moved = cs;
    for (auto& c : moved) {
      c.position = t.apply(c.position);
      c.normal = t.rotation * c.normal;
    }
    WrenchSpace wm = w;
    wm.center = t.apply(w.center);
    const double em = force_closure_epsilon(moved, wm);
    worst_rel = std::max(worst_rel, e == 0.0 ? std::abs(em) : std::abs(em - e) / e);
  }
  o.require(non_monotone == 0, "mu monotonicity");
  o.require(worst_rel <= 1e-9, "rigid invariance");
  o.detail << "antipodal eps " << eps_anti << " (sphere mesh " << eps_mesh << "), single " << eps_single
           << ", mu sweeps non-monotone " << non_monotone << "/30, rigid rel err " << worst_rel;
}

void c8(Outcome& o) {
  auto hand = fixtures::toy_hand(512, 7);
  const HandAssets assets{hand.robot, hand.pts, hand.meshes};
  const TriMesh box = fixtures::grasp_box();
  const std::map<std::string, TriMesh> refs = {{"box", box}};
  MeshCache cache;
  cache.put("box.obj", box);
  FilterConfig cfg;
  cfg.d2_pairs = 20000;

  Rng rng(808);
  std::vector<GraspRecord> input;
  for (int i = 0; i < 200; ++i) {
    GraspRecord r;
    r.id = "r" + std::to_string(i);
    r.robot = hand.robot.name;
    r.object = {"box", "box", "box.obj", {}};
    if (i % 4 == 0) r.object.pose.scale = std::exp(rng.uniform(std::log(0.1), std::log(12.0)));
    r.object.pose.translation = Vec3(0.0, rng.uniform(-0.02, 0.005), 0.0);
    r.q = fixtures::grasp_config(hand.robot);
    input.push_back(r);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const FilterResult first = filter_dataset(input, assets, refs, cache, cfg);
  const FilterResult second = filter_dataset(first.retained, assets, refs, cache, cfg);
  bool same = second.retained.size() == first.retained.size();
  for (std::size_t i = 0; same && i < first.retained.size(); ++i) same = second.retained[i] == first.retained[i];
  o.require(same, "filter idempotence");
  o.require(first.stats.retained > 0 && first.stats.retained < 200, "non-trivial partition");
  const double filter_secs = seconds_since(t0);

  const JointConfig grasp = fixtures::grasp_config(hand.robot);
  const Predictor oracle = fixtures::oracle_predictor(hand.robot, hand.pts, box, grasp);
  const std::vector<AugmentObject> objects = {{"box-a", "box", "box.obj", box}, {"box-b", "box", "box.obj", box}};
  AugmentOptions opts;
  opts.per_object_target = 200;
  opts.parallel = true;
  const auto t1 = std::chrono::steady_clock::now();
  const AugmentResult a = augment_loop(oracle, objects, hand.robot, hand.pts, EvalConfig{}, PerturbConfig{}, 42, opts);
  opts.parallel = false;
  const AugmentResult b = augment_loop(oracle, objects, hand.robot, hand.pts, EvalConfig{}, PerturbConfig{}, 42, opts);
  const double aug_secs = seconds_since(t1);
  double min_acceptance = 1.0;
  for (const auto& s : a.stats) {
    o.require(s.accepted == 200, "augment target");
    min_acceptance = std::min(min_acceptance, s.acceptance());
  }
  o.require(min_acceptance == 1.0, "acceptance");
  const bool identical = records_to_jsonl(a.records) == records_to_jsonl(b.records);
  o.require(identical, "byte-identical rerun");
  o.detail << "filter kept " << first.stats.retained << "/200 (size " << first.stats.rejected_size << ", shape "
           << first.stats.rejected_shape << ", penetration " << first.stats.rejected_penetration << ") then " << second.stats.retained << " ("
           << filter_secs << " s); augment 2x" << a.stats[0].accepted << " at acceptance " << min_acceptance
           << ", reruns " << (identical ? "identical" : "differ") << " (" << aug_secs << " s)";
}

void c9(Outcome& o) {
  DistanceMatrix d;
  d.rows = 3;
  d.cols = 4;
  d.values = {0.0f, 0.25f, 0.5f, 0.75f, 1.0f, 1.25f, 1.5f, 1.75f, 2.0f, 2.5f, 3.0f, 4.0f};
  d.robot_identity = 0x0102030405060708ULL;
  d.object_identity = 0x1112131415161718ULL;
  const unsigned char golden[] = {
      'D',  'R',  'O',  'M',  0x01, 0x00, 0x03, 0x00, 0x00, 0x00, 0x04, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
      0x00, 0x00, 0x80, 0x3E, 0x00, 0x00, 0x00, 0x3F, 0x00, 0x00, 0x40, 0x3F, 0x00, 0x00, 0x80, 0x3F, 0x00, 0x00,
      0xA0, 0x3F, 0x00, 0x00, 0xC0, 0x3F, 0x00, 0x00, 0xE0, 0x3F, 0x00, 0x00, 0x00, 0x40, 0x00, 0x00, 0x20, 0x40,
      0x00, 0x00, 0x40, 0x40, 0x00, 0x00, 0x80, 0x40, 0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01, 0x18, 0x17,
      0x16, 0x15, 0x14, 0x13, 0x12, 0x11};
  const std::string expect(reinterpret_cast<const char*>(golden), sizeof(golden));
  o.require(encode_drom(d) == expect, "golden bytes");
  o.require(decode_drom(expect) == d, "golden decode");

  Rng rng(909);
  std::vector<GraspRecord> recs;
  for (int i = 0; i < 10000; ++i) {
    GraspRecord r;
    r.id = "g" + std::to_string(i);
    r.robot = "toy_hand";
    r.object = {"obj", "mug", "meshes/o.obj", {rng.rotation(), Vec3(rng.normal(), rng.normal(), rng.normal()), rng.uniform(0.5, 2.0)}};
    r.q.base = {Vec3(rng.normal(), rng.normal(), rng.normal()), rng.rotation()};
    r.q.angles = Eigen::VectorXd::NullaryExpr(10, [&] { return rng.uniform(-0.1, 1.6); });
    r.metrics = QualityMetrics{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), 0.5, 0.2};
    GraspVerdict v;
    v.success = true;
    v.epsilon = rng.uniform();
    v.contact_count = 12;
    r.verdict = v;
    r.provenance = static_cast<Provenance>(i % 3);
    recs.push_back(std::move(r));
  }
  const std::string path = fixtures::temp_dir("acceptance") + "/records.jsonl";
  const auto t0 = std::chrono::steady_clock::now();
  write_records(path, recs);
  const auto back = read_records(path);
  const double secs = seconds_since(t0);
  bool equal = back.size() == recs.size();
  for (std::size_t i = 0; equal && i < recs.size(); ++i) equal = back[i] == recs[i];
  o.require(equal, "JSONL round trip");
  o.require(secs < 5.0, "JSONL runtime");
  o.detail << "DROM golden bytes match; 10000 records round trip in " << secs << " s";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"round-trip core", c1}, {"multilateration", c2}, {"icp", c3},      {"metrics oracles", c4},
      {"wasserstein/d2", c5},  {"retargeting", c6},     {"force closure", c7}, {"pipeline", c8},
      {"formats", c9}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failed;
    std::printf("C%zu %s %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
