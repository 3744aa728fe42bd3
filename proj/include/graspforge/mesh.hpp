#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graspforge/common.hpp"

namespace graspforge {

/// Segment label for points that belong to the object rather than a robot link.
inline constexpr int kObjectSegment = -1;

/// Ordered 3-D points with optional per-point segment labels (link index or
/// kObjectSegment). `segments` is either empty or the same length as `points`.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<int> segments;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_segments() const { return !segments.empty(); }
  Vec3 centroid() const;
  void validate() const;
};

/// Uniform scale, rotation and translation: x -> s * R x + t.
struct SimilarityTransform {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  SimilarityTransform inverse() const;
  Pose rigid() const { return {translation, rotation}; }
  static SimilarityTransform from_pose(const Pose& p, double scale = 1.0) {
    return {p.rotation, p.translation, scale};
  }
  friend SimilarityTransform operator*(const SimilarityTransform& a,
                                       const SimilarityTransform& b);
};

PointCloud transform_cloud(const PointCloud& cloud, const SimilarityTransform& t);
PointCloud transform_cloud(const PointCloud& cloud, const Transform& t);

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool valid() const { return (lo.array() <= hi.array()).all(); }
  double diagonal() const { return valid() ? (hi - lo).norm() : 0.0; }
  double squared_distance(const Vec3& p) const;
};

Aabb bounds_of(std::span<const Vec3> pts);

struct ClosestPoint {
  Vec3 point = Vec3::Zero();
  double squared_distance = std::numeric_limits<double>::infinity();
  std::int64_t triangle = -1;
};

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

using Triangle = std::array<int, 3>;

/// Indexed triangle mesh in meters.
///
/// Construction validates indices, drops zero-area triangles, records whether
/// the mesh is watertight (every undirected edge used by exactly two triangles
/// with opposite orientation) and builds a bounding-volume hierarchy for
/// nearest-triangle queries. Immutable afterwards.
class TriMesh {
 public:
  TriMesh() = default;
  TriMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<double>& areas() const { return areas_; }
  double total_area() const { return total_area_; }
  bool watertight() const { return watertight_; }
  bool empty() const { return triangles_.empty(); }
  const Aabb& bounds() const { return bounds_; }

  /// Area-weighted centroid of the surface.
  Vec3 surface_centroid() const;
  /// Enclosed volume (divergence theorem); meaningful only when watertight.
  double volume() const;

  /// Nearest surface point; BVH-accelerated.
  ClosestPoint closest_point(const Vec3& p) const;
  /// Generalized winding number (sum of signed solid angles / 4 pi).
  double winding_number(const Vec3& p) const;

  /// Signed x-coordinates where the line {(x, y, z)} crosses the surface:
  /// +1 where the outward normal has positive x, -1 otherwise. Returns
  /// std::nullopt when the line grazes an edge or vertex.
  std::optional<std::vector<std::pair<double, int>>> x_crossings(double y, double z) const;

  TriMesh transformed(const Transform& t) const;
  TriMesh transformed(const SimilarityTransform& t) const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t left = 0;   // child index, or first triangle slot for a leaf
    std::uint32_t count = 0;  // 0 for inner nodes
    std::uint32_t right = 0;
  };
  void build_index();
  std::uint32_t build_node(std::uint32_t begin, std::uint32_t end,
                           const std::vector<Vec3>& centers);

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<double> areas_;
  double total_area_ = 0.0;
  bool watertight_ = false;
  Aabb bounds_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
};

/// Exact nearest-neighbour search over a fixed point set. Ties resolve to the
/// lowest index, so results match a brute-force scan.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points);

  struct Hit {
    std::size_t index = 0;
    double squared_distance = std::numeric_limits<double>::infinity();
  };
  Hit nearest(const Vec3& q) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::uint32_t point;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
  };
  std::int32_t build(std::vector<std::uint32_t>& idx, std::size_t begin, std::size_t end, int depth);
  void search(std::int32_t node, const Vec3& q, Hit& best) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

// Primitive shapes, outward-oriented and watertight.
TriMesh make_box(const Vec3& lo, const Vec3& hi);
TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());

// File formats.
TriMesh load_mesh(const std::string& path);
void save_obj(const TriMesh& mesh, const std::string& path);

/// Named parts of an OBJ file split by `o` records.
struct NamedMesh {
  std::string name;
  TriMesh mesh;
};
std::vector<NamedMesh> load_obj_objects(const std::string& path);
void save_obj_objects(std::span<const NamedMesh> parts, const std::string& path);

/// ASCII PLY with x/y/z double properties and an optional int `segment`.
PointCloud load_ply(const std::string& path);
void save_ply(const PointCloud& cloud, const std::string& path);

}  // namespace graspforge
