#include "graspforge/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace graspforge {

Vec3 PointCloud::centroid() const {
  if (points.empty()) throw Error("centroid of an empty point cloud");
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

void PointCloud::validate() const {
  if (!segments.empty() && segments.size() != points.size())
    throw Error("point cloud: segment count does not match point count");
  for (const auto& p : points)
    if (!p.allFinite()) throw Error("point cloud: non-finite coordinate");
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.rotation = rotation.conjugate();
  inv.scale = 1.0 / scale;
  inv.translation = -(inv.scale * (inv.rotation * translation));
  return inv;
}

SimilarityTransform operator*(const SimilarityTransform& a, const SimilarityTransform& b) {
  SimilarityTransform c;
  c.rotation = (a.rotation * b.rotation).normalized();
  c.scale = a.scale * b.scale;
  c.translation = a.scale * (a.rotation * b.translation) + a.translation;
  return c;
}

PointCloud transform_cloud(const PointCloud& cloud, const SimilarityTransform& t) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = t.apply(p);
  return out;
}

PointCloud transform_cloud(const PointCloud& cloud, const Transform& t) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = t * p;
  return out;
}

double Aabb::squared_distance(const Vec3& p) const {
  const Vec3 d = (lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - hi);
  return d.squaredNorm();
}

Aabb bounds_of(std::span<const Vec3> pts) {
  Aabb b;
  for (const auto& p : pts) b.extend(p);
  return b;
}

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

// --- TriMesh ---------------------------------------------------------------

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)) {
  const auto nv = static_cast<int>(vertices_.size());
  for (const auto& v : vertices_)
    if (!v.allFinite()) throw Error("mesh: non-finite vertex");
  triangles_.reserve(triangles.size());
  for (const auto& t : triangles) {
    for (int i : t)
      if (i < 0 || i >= nv) throw Error("mesh: triangle index out of range");
    const double area =
        0.5 * (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]).norm();
    if (!(area > 1e-20)) continue;  // zero-area triangles are dropped
    triangles_.push_back(t);
    areas_.push_back(area);
    total_area_ += area;
  }
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : triangles_)
    for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
  watertight_ = !triangles_.empty();
  for (const auto& [edge, count] : directed) {
    auto rev = directed.find({edge.second, edge.first});
    if (count != 1 || rev == directed.end() || rev->second != 1) {
      watertight_ = false;
      break;
    }
  }
  for (const auto& t : triangles_)
    for (int i : t) bounds_.extend(vertices_[i]);
  build_index();
}

void TriMesh::build_index() {
  nodes_.clear();
  order_.resize(triangles_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (triangles_.empty()) return;
  std::vector<Vec3> centers(triangles_.size());
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    const auto& t = triangles_[i];
    centers[i] = (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
  }
  nodes_.reserve(2 * triangles_.size());
  build_node(0, static_cast<std::uint32_t>(triangles_.size()), centers);
}

std::uint32_t TriMesh::build_node(std::uint32_t begin, std::uint32_t end,
                                  const std::vector<Vec3>& centers) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box, cbox;
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto& t = triangles_[order_[i]];
    for (int k : t) box.extend(vertices_[k]);
    cbox.extend(centers[order_[i]]);
  }
  nodes_[id].box = box;
  if (end - begin <= 4) {
    nodes_[id].left = begin;
    nodes_[id].count = end - begin;
    return id;
  }
  int axis = 0;
  (cbox.hi - cbox.lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (centers[a][axis] != centers[b][axis])
                       return centers[a][axis] < centers[b][axis];
                     return a < b;
                   });
  const auto left = build_node(begin, mid, centers);
  const auto right = build_node(mid, end, centers);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

ClosestPoint TriMesh::closest_point(const Vec3& p) const {
  ClosestPoint best;
  if (nodes_.empty()) return best;
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.box.squared_distance(p) > best.squared_distance) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.left; i < node.left + node.count; ++i) {
        const auto ti = order_[i];
        const auto& t = triangles_[ti];
        const Vec3 q = closest_point_on_triangle(p, vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
        const double d = (q - p).squaredNorm();
        if (d < best.squared_distance || (d == best.squared_distance && ti < best.triangle)) {
          best = {q, d, static_cast<std::int64_t>(ti)};
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squared_distance(p);
    const double dr = nodes_[node.right].box.squared_distance(p);
    // Visit the nearer child first.
    if (dl < dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return best;
}

double TriMesh::winding_number(const Vec3& p) const {
  double total = 0.0;
  for (const auto& t : triangles_) {
    const Vec3 a = vertices_[t[0]] - p, b = vertices_[t[1]] - p, c = vertices_[t[2]] - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * kPi);
}

std::optional<std::vector<std::pair<double, int>>> TriMesh::x_crossings(double y, double z) const {
  std::vector<std::pair<double, int>> out;
  for (const auto& t : triangles_) {
    const Vec3& a = vertices_[t[0]];
    const Vec3& b = vertices_[t[1]];
    const Vec3& c = vertices_[t[2]];
    if (y < std::min({a.y(), b.y(), c.y()}) || y > std::max({a.y(), b.y(), c.y()}) ||
        z < std::min({a.z(), b.z(), c.z()}) || z > std::max({a.z(), b.z(), c.z()}))
      continue;
    auto orient = [&](const Vec3& u, const Vec3& v) {
      return (v.y() - u.y()) * (z - u.z()) - (v.z() - u.z()) * (y - u.y());
    };
    const double e0 = orient(b, c), e1 = orient(c, a), e2 = orient(a, b);
    const double sum = e0 + e1 + e2;
    const double mag = std::abs(e0) + std::abs(e1) + std::abs(e2);
    if (mag == 0.0) continue;
    const double eps = 1e-12 * mag;
    const bool pos = e0 >= -eps && e1 >= -eps && e2 >= -eps;
    const bool neg = e0 <= eps && e1 <= eps && e2 <= eps;
    if (!pos && !neg) continue;
    if (std::abs(sum) <= eps) continue;  // edge-on triangle
    if (std::abs(e0) <= eps || std::abs(e1) <= eps || std::abs(e2) <= eps) return std::nullopt;
    const double x = (e0 * a.x() + e1 * b.x() + e2 * c.x()) / sum;
    out.emplace_back(x, sum > 0 ? 1 : -1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Vec3 TriMesh::surface_centroid() const {
  if (triangles_.empty()) throw Error("surface centroid of an empty mesh");
  Vec3 c = Vec3::Zero();
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    const auto& t = triangles_[i];
    c += areas_[i] * (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
  }
  return c / total_area_;
}

double TriMesh::volume() const {
  double v = 0.0;
  for (const auto& t : triangles_)
    v += vertices_[t[0]].dot(vertices_[t[1]].cross(vertices_[t[2]])) / 6.0;
  return v;
}

TriMesh TriMesh::transformed(const Transform& tf) const {
  std::vector<Vec3> v = vertices_;
  for (auto& p : v) p = tf * p;
  return TriMesh(std::move(v), triangles_);
}

TriMesh TriMesh::transformed(const SimilarityTransform& tf) const {
  std::vector<Vec3> v = vertices_;
  for (auto& p : v) p = tf.apply(p);
  return TriMesh(std::move(v), triangles_);
}

// --- KdTree ----------------------------------------------------------------

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  std::vector<std::uint32_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), 0u);
  nodes_.reserve(points_.size());
  root_ = build(idx, 0, idx.size(), 0);
}

std::int32_t KdTree::build(std::vector<std::uint32_t>& idx, std::size_t begin, std::size_t end,
                           int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(idx.begin() + begin, idx.begin() + mid, idx.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (points_[a][axis] != points_[b][axis]) return points_[a][axis] < points_[b][axis];
                     return a < b;
                   });
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({idx[mid], -1, -1, static_cast<std::uint8_t>(axis)});
  const auto l = build(idx, begin, mid, depth + 1);
  const auto r = build(idx, mid + 1, end, depth + 1);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

void KdTree::search(std::int32_t node, const Vec3& q, Hit& best) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Vec3& p = points_[n.point];
  const double d = (p - q).squaredNorm();
  if (d < best.squared_distance || (d == best.squared_distance && n.point < best.index))
    best = {n.point, d};
  const double diff = q[n.axis] - p[n.axis];
  const auto near = diff <= 0 ? n.left : n.right;
  const auto far = diff <= 0 ? n.right : n.left;
  search(near, q, best);
  // <= so equal-distance points on the far side are still considered for the tie rule.
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

KdTree::Hit KdTree::nearest(const Vec3& q) const {
  if (points_.empty()) throw Error("nearest neighbour in an empty set");
  Hit best;
  best.index = std::numeric_limits<std::size_t>::max();
  search(root_, q, best);
  return best;
}

// --- primitives ------------------------------------------------------------

TriMesh make_box(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v = {{lo.x(), lo.y(), lo.z()}, {hi.x(), lo.y(), lo.z()}, {hi.x(), hi.y(), lo.z()},
                         {lo.x(), hi.y(), lo.z()}, {lo.x(), lo.y(), hi.z()}, {hi.x(), lo.y(), hi.z()},
                         {hi.x(), hi.y(), hi.z()}, {lo.x(), hi.y(), hi.z()}};
  std::vector<Triangle> f = {{0, 2, 1}, {0, 3, 2}, {0, 1, 5}, {0, 5, 4}, {1, 2, 6}, {1, 6, 5},
                             {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}, {4, 5, 6}, {4, 6, 7}};
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7}, {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mids;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mids.find(key);
      if (it != mids.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mids.emplace(key, id);
      return id;
    };
    std::vector<Triangle> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int a = mid(tri[0], tri[1]), b = mid(tri[1], tri[2]), c = mid(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  for (auto& p : v) p = center + radius * p;
  return TriMesh(std::move(v), std::move(f));
}

// --- file formats ----------------------------------------------------------

namespace {

int parse_obj_index(const std::string& token, int vertex_count, int line) {
  const std::string head = token.substr(0, token.find('/'));
  int idx = 0;
  try {
    idx = std::stoi(head);
  } catch (const std::exception&) {
    throw Error("OBJ line " + std::to_string(line) + ": bad face index '" + token + "'");
  }
  if (idx < 0) idx = vertex_count + idx + 1;
  if (idx < 1 || idx > vertex_count)
    throw Error("OBJ line " + std::to_string(line) + ": face index out of range");
  return idx - 1;
}

struct ObjData {
  std::vector<Vec3> vertices;
  std::vector<std::pair<std::string, std::vector<Triangle>>> groups;
};

ObjData read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh " + path);
  ObjData data;
  data.groups.emplace_back("", std::vector<Triangle>{});
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z()))
        throw Error(path + ":" + std::to_string(lineno) + ": malformed vertex");
      data.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<std::string> tokens;
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (tokens.size() != 3)
        throw Error(path + ":" + std::to_string(lineno) + ": non-triangular face");
      Triangle t;
      const int nv = static_cast<int>(data.vertices.size());
      for (int k = 0; k < 3; ++k) t[k] = parse_obj_index(tokens[k], nv, lineno);
      data.groups.back().second.push_back(t);
    } else if (tag == "o") {
      std::string name;
      std::getline(ss >> std::ws, name);
      if (data.groups.back().first.empty() && data.groups.back().second.empty())
        data.groups.back().first = name;
      else
        data.groups.emplace_back(name, std::vector<Triangle>{});
    }
  }
  return data;
}

void write_vec(std::ostream& out, const Vec3& p) {
  out << p.x() << ' ' << p.y() << ' ' << p.z();
}

}  // namespace

TriMesh load_mesh(const std::string& path) {
  ObjData data = read_obj(path);
  std::vector<Triangle> all;
  for (auto& [name, tris] : data.groups) all.insert(all.end(), tris.begin(), tris.end());
  TriMesh mesh(std::move(data.vertices), std::move(all));
  return mesh;
}

std::vector<NamedMesh> load_obj_objects(const std::string& path) {
  ObjData data = read_obj(path);
  std::vector<NamedMesh> out;
  for (auto& [name, tris] : data.groups) {
    if (tris.empty()) continue;
    std::map<int, int> remap;
    for (const auto& t : tris)
      for (int i : t) remap.emplace(i, 0);
    std::vector<Vec3> verts;
    for (auto& [old, idx] : remap) {
      idx = static_cast<int>(verts.size());
      verts.push_back(data.vertices[old]);
    }
    for (auto& t : tris)
      for (int& i : t) i = remap.at(i);
    out.push_back({name, TriMesh(std::move(verts), std::move(tris))});
  }
  return out;
}

void save_obj(const TriMesh& mesh, const std::string& path) {
  NamedMesh part{"", mesh};
  save_obj_objects(std::span<const NamedMesh>(&part, 1), path);
}

void save_obj_objects(std::span<const NamedMesh> parts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  int base = 1;
  for (const auto& part : parts) {
    if (!part.name.empty()) out << "o " << part.name << '\n';
    for (const auto& v : part.mesh.vertices()) {
      out << "v ";
      write_vec(out, v);
      out << '\n';
    }
    for (const auto& t : part.mesh.triangles())
      out << "f " << t[0] + base << ' ' << t[1] + base << ' ' << t[2] + base << '\n';
    base += static_cast<int>(part.mesh.vertices().size());
  }
}

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open point cloud " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw Error(path + ": not a PLY file");
  std::size_t count = 0;
  std::vector<std::string> props;
  bool in_vertex = false, ascii = false;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (tag == "element") {
      std::string name;
      std::size_t n = 0;
      ss >> name >> n;
      in_vertex = name == "vertex";
      if (in_vertex) count = n;
      else if (n != 0) throw Error(path + ":" + std::to_string(lineno) + ": unsupported element " + name);
    } else if (tag == "property" && in_vertex) {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
    } else if (tag == "end_header") {
      break;
    }
  }
  if (!ascii) throw Error(path + ": only ASCII PLY is supported");
  auto find = [&](const std::string& n) {
    auto it = std::find(props.begin(), props.end(), n);
    return it == props.end() ? -1 : static_cast<int>(it - props.begin());
  };
  const int ix = find("x"), iy = find("y"), iz = find("z"), is = find("segment");
  if (ix < 0 || iy < 0 || iz < 0) throw Error(path + ": missing x/y/z properties");
  PointCloud cloud;
  cloud.points.reserve(count);
  std::vector<double> vals(props.size());
  for (std::size_t i = 0; i < count; ++i) {
    ++lineno;
    if (!std::getline(in, line)) throw Error(path + ": truncated vertex list");
    std::istringstream ss(line);
    for (auto& v : vals)
      if (!(ss >> v)) throw Error(path + ":" + std::to_string(lineno) + ": malformed vertex");
    cloud.points.emplace_back(vals[ix], vals[iy], vals[iz]);
    if (is >= 0) cloud.segments.push_back(static_cast<int>(vals[is]));
  }
  cloud.validate();
  return cloud;
}

void save_ply(const PointCloud& cloud, const std::string& path) {
  cloud.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n";
  if (cloud.has_segments()) out << "property int segment\n";
  out << "end_header\n" << std::setprecision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    write_vec(out, cloud.points[i]);
    if (cloud.has_segments()) out << ' ' << cloud.segments[i];
    out << '\n';
  }
}

}  // namespace graspforge
