#include "graspforge/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "graspforge/geometry.hpp"

namespace graspforge {

namespace {

constexpr double kCm = 100.0;

void require_watertight(const TriMesh& m, const char* what) {
  if (m.empty()) throw Error(std::string(what) + " mesh is empty");
  if (!m.watertight()) throw Error(std::string(what) + " mesh is not watertight");
}

using Intervals = std::vector<std::pair<double, double>>;

// Inside intervals of a closed mesh along the x-line through (y, z).
std::optional<Intervals> column_intervals(const TriMesh& mesh, double y, double z) {
  auto crossings = mesh.x_crossings(y, z);
  if (!crossings) return std::nullopt;
  Intervals out;
  int w = 0;
  double start = 0.0;
  for (const auto& [x, s] : *crossings) {
    const int next = w + s;
    if (w == 0 && next != 0) start = x;
    if (w != 0 && next == 0) out.emplace_back(start, x);
    w = next;
  }
  return out;
}

Intervals unite(Intervals v) {
  std::sort(v.begin(), v.end());
  Intervals out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.first <= out.back().second)
      out.back().second = std::max(out.back().second, iv.second);
    else
      out.push_back(iv);
  }
  return out;
}

Intervals intersect(const Intervals& a, const Intervals& b) {
  Intervals out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].first, b[j].first);
    const double hi = std::min(a[i].second, b[j].second);
    if (lo < hi) out.emplace_back(lo, hi);
    if (a[i].second < b[j].second) ++i; else ++j;
  }
  return out;
}

// Number of centers (k + 1/2) * v inside [lo, hi].
long long count_centers(double lo, double hi, double v) {
  const long long k0 = static_cast<long long>(std::ceil(lo / v - 0.5));
  const long long k1 = static_cast<long long>(std::floor(hi / v - 0.5));
  return std::max(0LL, k1 - k0 + 1);
}

}  // namespace

double penetration_depth(const PointCloud& hand, const TriMesh& object) {
  require_watertight(object, "object");
  double depth = 0.0;
  for (const auto& p : hand.points) depth = std::max(depth, -signed_distance(object, p));
  return depth * kCm;
}

double penetration_volume(std::span<const TriMesh> hand_links, const TriMesh& object, double voxel_cm) {
  if (!(voxel_cm > 0.0)) throw Error("voxel size must be positive");
  require_watertight(object, "object");
  const double v = voxel_cm / kCm;
  const Aabb& ob = object.bounds();
  std::vector<const TriMesh*> links;
  Aabb region;
  for (const auto& m : hand_links) {
    require_watertight(m, "hand link");
    const Aabb& hb = m.bounds();
    Aabb both;
    both.lo = ob.lo.cwiseMax(hb.lo);
    both.hi = ob.hi.cwiseMin(hb.hi);
    if ((both.lo.array() > both.hi.array()).any()) continue;
    links.push_back(&m);
    region.extend(both.lo);
    region.extend(both.hi);
  }
  if (links.empty()) return 0.0;

  long long count = 0;
  const long long j0 = static_cast<long long>(std::ceil(region.lo.y() / v - 0.5));
  const long long j1 = static_cast<long long>(std::floor(region.hi.y() / v - 0.5));
  const long long k0 = static_cast<long long>(std::ceil(region.lo.z() / v - 0.5));
  const long long k1 = static_cast<long long>(std::floor(region.hi.z() / v - 0.5));
  for (long long j = j0; j <= j1; ++j) {
    for (long long k = k0; k <= k1; ++k) {
      const double y0 = (static_cast<double>(j) + 0.5) * v;
      const double z0 = (static_cast<double>(k) + 0.5) * v;
      // A ray grazing an edge or vertex is nudged by a tiny amount.
      for (int attempt = 0;; ++attempt) {
        const double y = y0 + attempt * 1e-9 * v;
        const double z = z0 + attempt * 0.7e-9 * v;
        auto obj = column_intervals(object, y, z);
        if (!obj) {
          if (attempt < 8) continue;
          throw InvariantError("penetration_volume: could not find a non-degenerate ray");
        }
        if (obj->empty()) break;
        Intervals hand;
        bool degenerate = false;
        for (const TriMesh* m : links) {
          const Aabb& hb = m->bounds();
          if (y < hb.lo.y() || y > hb.hi.y() || z < hb.lo.z() || z > hb.hi.z()) continue;
          auto iv = column_intervals(*m, y, z);
          if (!iv) { degenerate = true; break; }
          hand.insert(hand.end(), iv->begin(), iv->end());
        }
        if (degenerate) {
          if (attempt < 8) continue;
          throw InvariantError("penetration_volume: could not find a non-degenerate ray");
        }
        for (const auto& [lo, hi] : intersect(*obj, unite(std::move(hand)))) count += count_centers(lo, hi, v);
        break;
      }
    }
  }
  return static_cast<double>(count) * voxel_cm * voxel_cm * voxel_cm;
}

double disjoint_distance(const PointCloud& fingers, const TriMesh& object) {
  if (fingers.empty()) throw Error("disjoint_distance: empty finger cloud");
  require_watertight(object, "object");
  double sum = 0.0;
  for (const auto& p : fingers.points) sum += std::max(0.0, signed_distance(object, p));
  return sum / static_cast<double>(fingers.size()) * kCm;
}

double contact_ratio(const PointCloud& object_samples, const PointCloud& hand, double threshold_cm) {
  if (object_samples.empty()) throw Error("contact_ratio: empty object samples");
  if (!(threshold_cm > 0.0)) throw Error("contact threshold must be positive");
  if (hand.empty()) return 0.0;
  const KdTree tree(hand.points);
  const double t = threshold_cm / kCm;
  std::size_t hits = 0;
  for (const auto& p : object_samples.points)
    if (tree.nearest(p).squared_distance <= t * t) ++hits;
  return static_cast<double>(hits) / static_cast<double>(object_samples.size());
}

PointCloud finger_points(const RobotModel& robot, const PointCloud& hand) {
  if (!hand.has_segments()) throw Error("hand cloud carries no link segments");
  PointCloud out;
  for (std::size_t i = 0; i < hand.size(); ++i) {
    if (hand.segments[i] >= 0 && robot.is_finger(hand.segments[i])) {
      out.points.push_back(hand.points[i]);
      out.segments.push_back(hand.segments[i]);
    }
  }
  return out;
}

std::vector<TriMesh> posed_link_meshes(const RobotModel& robot, const JointConfig& q,
                                       const std::vector<std::optional<TriMesh>>& link_meshes) {
  if (link_meshes.size() != robot.links.size()) throw Error("link mesh count does not match robot");
  const auto tf = forward_kinematics(robot, q);
  std::vector<TriMesh> out;
  for (std::size_t l = 0; l < link_meshes.size(); ++l)
    if (link_meshes[l]) out.push_back(link_meshes[l]->transformed(tf[l]));
  return out;
}

JointConfig config_in_object_frame(const JointConfig& q, const SimilarityTransform& object_pose) {
  JointConfig out = q;
  const Pose inv = Pose{object_pose.translation, object_pose.rotation}.inverse();
  out.base = inv * q.base;
  return out;
}

TriMesh scaled_object(const TriMesh& local, const SimilarityTransform& object_pose) {
  SimilarityTransform s;
  s.scale = object_pose.scale;
  return local.transformed(s);
}

QualityMetrics quality_report(const GraspRecord& grasp, const RobotModel& robot, const LinkPointSet& pts,
                              const std::vector<std::optional<TriMesh>>& link_meshes,
                              const TriMesh& object, const MetricsConfig& cfg) {
  cfg.validate();
  check_config(robot, grasp.q);
  const TriMesh obj = scaled_object(object, grasp.object.pose);
  require_watertight(obj, "object");
  const JointConfig q = config_in_object_frame(grasp.q, grasp.object.pose);
  const PointCloud hand = point_cloud_fk(robot, q, pts);

  QualityMetrics m;
  m.contact_threshold_cm = cfg.contact_threshold_cm;
  m.voxel_cm = cfg.voxel_cm;
  double depth = 0.0, outside = 0.0;
  std::size_t fingers = 0;
  for (std::size_t i = 0; i < hand.size(); ++i) {
    const double d = signed_distance(obj, hand.points[i]);
    depth = std::max(depth, -d);
    if (robot.is_finger(hand.segments[i])) {
      outside += std::max(0.0, d);
      ++fingers;
    }
  }
  if (fingers == 0) throw Error("quality_report: robot has no finger points");
  m.penetration_depth = depth * kCm;
  m.disjoint_mean = outside / static_cast<double>(fingers) * kCm;
  const auto links = posed_link_meshes(robot, q, link_meshes);
  m.penetration_volume = penetration_volume(links, obj, cfg.voxel_cm);
  const PointCloud samples = sample_surface(obj, cfg.object_samples, cfg.sample_seed);
  m.contact_ratio = contact_ratio(samples, hand, cfg.contact_threshold_cm);
  return m;
}

}  // namespace graspforge
