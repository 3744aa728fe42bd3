#include "graspforge/kinematics.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "graspforge/geometry.hpp"
#include "graspforge/hash.hpp"
#include "graspforge/random.hpp"

namespace graspforge {

namespace pt = boost::property_tree;

std::size_t RobotModel::dof() const {
  return static_cast<std::size_t>(
      std::count_if(joints.begin(), joints.end(), [](const Joint& j) { return j.dof >= 0; }));
}

int RobotModel::link_index(const std::string& n) const {
  for (std::size_t i = 0; i < links.size(); ++i)
    if (links[i].name == n) return static_cast<int>(i);
  return -1;
}

int RobotModel::keypoint_index(const std::string& label) const {
  for (std::size_t i = 0; i < keypoints.size(); ++i)
    if (keypoints[i].label == label) return static_cast<int>(i);
  return -1;
}

bool RobotModel::is_finger(int link) const {
  return std::find(finger_links.begin(), finger_links.end(), link) != finger_links.end();
}

std::size_t LinkPointSet::size() const {
  std::size_t n = 0;
  for (const auto& l : per_link) n += l.size();
  return n;
}

std::uint64_t LinkPointSet::identity() const {
  Fnv1a h;
  h.update_value(static_cast<std::uint64_t>(per_link.size()));
  for (const auto& l : per_link) {
    h.update_value(static_cast<std::uint64_t>(l.size()));
    for (const auto& p : l)
      for (int k = 0; k < 3; ++k) h.update_value(p[k]);
  }
  return h.digest();
}

LinkPointSet LinkPointSet::from_lists(std::vector<std::vector<Vec3>> lists, std::uint64_t seed) {
  LinkPointSet s;
  s.per_link = std::move(lists);
  s.seed = seed;
  std::size_t offset = 0;
  for (const auto& l : s.per_link) {
    s.offsets.push_back(offset);
    offset += l.size();
  }
  return s;
}

// --- parsing ---------------------------------------------------------------

namespace {

using Tree = pt::ptree;

[[noreturn]] void reject(const std::string& what) { throw Error("robot description: " + what); }

std::vector<double> parse_numbers(const std::string& s, std::size_t expected, const std::string& what) {
  std::istringstream ss(s);
  std::vector<double> v;
  for (double x; ss >> x;) v.push_back(x);
  if (!ss.eof() || v.size() != expected) reject("malformed " + what + " '" + s + "'");
  for (double x : v)
    if (!std::isfinite(x)) reject("non-finite value in " + what);
  return v;
}

const Tree* attributes(const Tree& node) {
  auto it = node.find("<xmlattr>");
  return it == node.not_found() ? nullptr : &it->second;
}

std::string attr(const Tree& node, const std::string& key, const std::string& where,
                 bool required = true) {
  const Tree* a = attributes(node);
  if (a) {
    auto it = a->find(key);
    if (it != a->not_found()) return it->second.data();
  }
  if (required) reject(where + " is missing attribute '" + key + "'");
  return {};
}

void check_attributes(const Tree& node, std::initializer_list<const char*> allowed,
                      const std::string& where) {
  const Tree* a = attributes(node);
  if (!a) return;
  for (const auto& [key, _] : *a)
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; }))
      reject("unsupported attribute '" + key + "' on " + where);
}

/// Children excluding attributes and comments; rejects tags not in `allowed`.
std::vector<std::pair<std::string, const Tree*>> children(const Tree& node,
                                                          std::initializer_list<const char*> allowed,
                                                          const std::string& where) {
  std::vector<std::pair<std::string, const Tree*>> out;
  for (const auto& [tag, child] : node) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    if (tag == "<xmltext>") {
      if (child.data().find_first_not_of(" \t\r\n") != std::string::npos)
        reject("unexpected text in " + where);
      continue;
    }
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return tag == k; }))
      reject("unsupported tag <" + tag + "> in " + where);
    out.emplace_back(tag, &child);
  }
  return out;
}

Transform parse_origin(const Tree& node, const std::string& where) {
  check_attributes(node, {"xyz", "rpy"}, "origin of " + where);
  Transform t = Transform::Identity();
  const std::string xyz = attr(node, "xyz", where, false);
  const std::string rpy = attr(node, "rpy", where, false);
  if (!xyz.empty()) {
    auto v = parse_numbers(xyz, 3, "origin xyz of " + where);
    t.translation() = Vec3(v[0], v[1], v[2]);
  }
  if (!rpy.empty()) {
    auto v = parse_numbers(rpy, 3, "origin rpy of " + where);
    t.linear() = rpy_to_matrix(v[0], v[1], v[2]);
  }
  return t;
}

Link parse_link(const Tree& node, const std::filesystem::path& base_dir) {
  check_attributes(node, {"name"}, "link");
  Link link;
  link.name = attr(node, "name", "link");
  const std::string where = "link '" + link.name + "'";
  int collisions = 0;
  for (const auto& [tag, col] : children(node, {"collision"}, where)) {
    if (++collisions > 1) reject(where + " has more than one <collision>");
    check_attributes(*col, {"name"}, "collision of " + where);
    bool have_geometry = false;
    for (const auto& [ctag, c] : children(*col, {"geometry", "origin"}, "collision of " + where)) {
      if (ctag == "origin") {
        link.mesh_origin = parse_origin(*c, where);
        continue;
      }
      if (have_geometry) reject(where + " has more than one <geometry>");
      have_geometry = true;
      auto geoms = children(*c, {"mesh"}, "geometry of " + where);
      if (geoms.size() != 1) reject(where + " geometry must contain exactly one <mesh>");
      const Tree& mesh = *geoms[0].second;
      check_attributes(mesh, {"filename", "scale"}, "mesh of " + where);
      std::filesystem::path file = attr(mesh, "filename", "mesh of " + where);
      if (file.is_relative()) file = base_dir / file;
      link.mesh = file.lexically_normal().string();
      const std::string scale = attr(mesh, "scale", where, false);
      if (!scale.empty()) {
        auto v = parse_numbers(scale, 3, "mesh scale of " + where);
        link.mesh_scale = Vec3(v[0], v[1], v[2]);
        if ((link.mesh_scale.array() <= 0).any()) reject(where + " mesh scale must be positive");
      }
    }
    if (!have_geometry) reject(where + " collision has no <geometry>");
  }
  return link;
}

struct PendingJoint {
  Joint joint;
  std::string parent, child;
};

PendingJoint parse_joint(const Tree& node) {
  check_attributes(node, {"name", "type"}, "joint");
  PendingJoint pj;
  Joint& j = pj.joint;
  j.name = attr(node, "name", "joint");
  const std::string where = "joint '" + j.name + "'";
  const std::string type = attr(node, "type", where);
  if (type == "revolute") j.type = JointType::Revolute;
  else if (type == "prismatic") j.type = JointType::Prismatic;
  else if (type == "fixed") j.type = JointType::Fixed;
  else reject(where + " has unsupported type '" + type + "'");
  bool have_limit = false, have_axis = false;
  for (const auto& [tag, c] : children(node, {"parent", "child", "origin", "axis", "limit"}, where)) {
    if (tag == "parent") {
      check_attributes(*c, {"link"}, "parent of " + where);
      pj.parent = attr(*c, "link", "parent of " + where);
    } else if (tag == "child") {
      check_attributes(*c, {"link"}, "child of " + where);
      pj.child = attr(*c, "link", "child of " + where);
    } else if (tag == "origin") {
      j.origin = parse_origin(*c, where);
    } else if (tag == "axis") {
      check_attributes(*c, {"xyz"}, "axis of " + where);
      auto v = parse_numbers(attr(*c, "xyz", "axis of " + where), 3, "axis of " + where);
      j.axis = Vec3(v[0], v[1], v[2]);
      have_axis = true;
    } else {
      check_attributes(*c, {"lower", "upper", "effort", "velocity"}, "limit of " + where);
      j.lower = parse_numbers(attr(*c, "lower", "limit of " + where), 1, "lower limit")[0];
      j.upper = parse_numbers(attr(*c, "upper", "limit of " + where), 1, "upper limit")[0];
      have_limit = true;
    }
  }
  if (pj.parent.empty() || pj.child.empty()) reject(where + " needs <parent> and <child>");
  if (j.type != JointType::Fixed) {
    if (!have_limit) reject(where + " needs a <limit>");
    if (!have_axis) j.axis = Vec3::UnitX();  // URDF default
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) reject(where + " axis is not unit length");
    if (!(j.lower <= j.upper)) reject(where + " has lower limit above upper limit");
  }
  return pj;
}

}  // namespace

RobotModel parse_robot(const std::string& document, const std::string& base_dir) {
  Tree doc;
  try {
    std::istringstream in(document);
    pt::read_xml(in, doc, pt::xml_parser::no_concat_text);
  } catch (const pt::xml_parser_error& e) {
    throw Error(std::string("robot description: malformed XML: ") + e.what());
  }
  const Tree* robot = nullptr;
  for (const auto& [tag, child] : doc) {
    if (tag == "<xmlcomment>" || tag == "<xmltext>") continue;
    if (tag != "robot" || robot) reject("document root must be a single <robot>");
    robot = &child;
  }
  if (!robot) reject("document root must be a single <robot>");
  check_attributes(*robot, {"name"}, "robot");

  RobotModel model;
  model.name = attr(*robot, "name", "robot");
  std::vector<PendingJoint> pending;
  std::vector<std::pair<std::string, Keypoint>> pending_kp;
  std::vector<std::string> finger_names;
  for (const auto& [tag, c] : children(*robot, {"link", "joint", "keypoint", "finger"}, "robot")) {
    if (tag == "link") {
      model.links.push_back(parse_link(*c, base_dir));
    } else if (tag == "joint") {
      pending.push_back(parse_joint(*c));
    } else if (tag == "keypoint") {
      check_attributes(*c, {"name", "link", "xyz"}, "keypoint");
      Keypoint kp;
      kp.label = attr(*c, "name", "keypoint");
      auto v = parse_numbers(attr(*c, "xyz", "keypoint '" + kp.label + "'"), 3, "keypoint xyz");
      kp.offset = Vec3(v[0], v[1], v[2]);
      pending_kp.emplace_back(attr(*c, "link", "keypoint '" + kp.label + "'"), kp);
    } else {
      check_attributes(*c, {"link"}, "finger");
      finger_names.push_back(attr(*c, "link", "finger"));
    }
  }
  if (model.links.empty()) reject("no links");

  std::set<std::string> names;
  for (const auto& l : model.links)
    if (!names.insert(l.name).second) reject("duplicate link '" + l.name + "'");

  int dof = 0;
  std::set<std::string> joint_names;
  for (auto& pj : pending) {
    Joint j = pj.joint;
    if (!joint_names.insert(j.name).second) reject("duplicate joint '" + j.name + "'");
    j.parent = model.link_index(pj.parent);
    j.child = model.link_index(pj.child);
    if (j.parent < 0) reject("joint '" + j.name + "' references missing link '" + pj.parent + "'");
    if (j.child < 0) reject("joint '" + j.name + "' references missing link '" + pj.child + "'");
    if (j.parent == j.child) reject("cyclic joint graph at joint '" + j.name + "'");
    auto& child = model.links[j.child];
    if (child.parent_joint >= 0) reject("link '" + child.name + "' has more than one parent joint");
    child.parent_joint = static_cast<int>(model.joints.size());
    if (j.type != JointType::Fixed) j.dof = dof++;
    model.joints.push_back(j);
  }

  std::vector<int> roots;
  for (std::size_t i = 0; i < model.links.size(); ++i)
    if (model.links[i].parent_joint < 0) roots.push_back(static_cast<int>(i));
  if (roots.empty()) reject("cyclic joint graph (no root link)");
  if (roots.size() > 1) reject("joint graph is not a tree (multiple root links)");
  model.root = roots.front();

  // Breadth-first from the root; links not reached sit on a cycle.
  std::vector<std::vector<int>> out_joints(model.links.size());
  for (std::size_t j = 0; j < model.joints.size(); ++j)
    out_joints[model.joints[j].parent].push_back(static_cast<int>(j));
  std::vector<bool> seen(model.links.size(), false);
  std::deque<int> queue{model.root};
  seen[model.root] = true;
  while (!queue.empty()) {
    const int l = queue.front();
    queue.pop_front();
    for (int j : out_joints[l]) {
      model.joint_order.push_back(j);
      const int c = model.joints[j].child;
      seen[c] = true;
      queue.push_back(c);
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) reject("cyclic joint graph");

  for (auto& [link, kp] : pending_kp) {
    kp.link = model.link_index(link);
    if (kp.link < 0) reject("keypoint '" + kp.label + "' references missing link '" + link + "'");
    if (model.keypoint_index(kp.label) >= 0) reject("duplicate keypoint '" + kp.label + "'");
    model.keypoints.push_back(kp);
  }
  if (finger_names.empty()) {
    for (std::size_t i = 0; i < model.links.size(); ++i)
      if (static_cast<int>(i) != model.root) model.finger_links.push_back(static_cast<int>(i));
  } else {
    for (const auto& f : finger_names) {
      const int l = model.link_index(f);
      if (l < 0) reject("finger references missing link '" + f + "'");
      model.finger_links.push_back(l);
    }
  }
  return model;
}

RobotModel load_robot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open robot description " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_robot(ss.str(), dir.empty() ? "." : dir.string());
}

// --- kinematics ------------------------------------------------------------

JointConfig rest_config(const RobotModel& model) {
  JointConfig q;
  q.angles = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.dof()));
  for (const auto& j : model.joints)
    if (j.dof >= 0) q.angles[j.dof] = std::clamp(0.0, j.lower, j.upper);
  return q;
}

void check_config(const RobotModel& model, const JointConfig& q) {
  if (static_cast<std::size_t>(q.angles.size()) != model.dof())
    throw Error("joint configuration has " + std::to_string(q.angles.size()) + " values, robot '" +
                model.name + "' has " + std::to_string(model.dof()) + " degrees of freedom");
  if (std::abs(q.base.rotation.norm() - 1.0) > 1e-9)
    throw Error("joint configuration base quaternion is not unit norm");
  if (!q.base.translation.allFinite() || !q.angles.allFinite())
    throw Error("joint configuration has non-finite values");
}

Transform joint_motion(const Joint& joint, double value) {
  Transform m = Transform::Identity();
  switch (joint.type) {
    case JointType::Revolute:
      m.linear() = Eigen::AngleAxisd(value, joint.axis).toRotationMatrix();
      break;
    case JointType::Prismatic:
      m.translation() = value * joint.axis;
      break;
    case JointType::Fixed:
      break;
  }
  return m;
}

std::vector<Transform> forward_kinematics(const RobotModel& model, const JointConfig& q) {
  check_config(model, q);
  std::vector<Transform> tf(model.links.size(), Transform::Identity());
  tf[model.root] = q.base.matrix();
  for (int ji : model.joint_order) {
    const Joint& j = model.joints[ji];
    const double value = j.dof >= 0 ? q.angles[j.dof] : 0.0;
    tf[j.child] = tf[j.parent] * j.origin * joint_motion(j, value);
  }
  return tf;
}

std::vector<std::optional<TriMesh>> load_link_meshes(const RobotModel& model) {
  std::vector<std::optional<TriMesh>> out;
  out.reserve(model.links.size());
  for (const auto& link : model.links) {
    if (link.mesh.empty()) {
      out.emplace_back(std::nullopt);
      continue;
    }
    TriMesh raw = load_mesh(link.mesh);
    std::vector<Vec3> v = raw.vertices();
    for (auto& p : v) p = link.mesh_origin * Vec3(p.cwiseProduct(link.mesh_scale));
    out.emplace_back(TriMesh(std::move(v), raw.triangles()));
  }
  return out;
}

LinkPointSet sample_link_points(const RobotModel& model, std::span<const std::size_t> counts,
                                std::uint64_t seed) {
  return sample_link_points(model, load_link_meshes(model), counts, seed);
}

LinkPointSet sample_link_points(const RobotModel& model,
                                const std::vector<std::optional<TriMesh>>& meshes,
                                std::span<const std::size_t> counts, std::uint64_t seed) {
  if (counts.size() != model.links.size())
    throw Error("sample_link_points: expected " + std::to_string(model.links.size()) +
                " per-link counts, got " + std::to_string(counts.size()));
  std::vector<std::vector<Vec3>> lists(model.links.size());
  for (std::size_t l = 0; l < model.links.size(); ++l) {
    if (counts[l] == 0) continue;
    if (!meshes[l]) throw Error("link '" + model.links[l].name + "' has no collision mesh to sample");
    if (!(meshes[l]->total_area() > 0.0))
      throw Error("link '" + model.links[l].name + "' mesh has zero area");
    lists[l] = sample_surface(*meshes[l], counts[l], derive_seed(seed, l)).points;
  }
  return LinkPointSet::from_lists(std::move(lists), seed);
}

std::vector<std::size_t> allocate_counts(const std::vector<std::optional<TriMesh>>& meshes,
                                         std::size_t total) {
  std::vector<double> area(meshes.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    if (meshes[i]) area[i] = meshes[i]->total_area();
    sum += area[i];
  }
  if (!(sum > 0.0)) throw Error("allocate_counts: robot has no mesh area");
  std::vector<std::size_t> counts(meshes.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const double exact = static_cast<double>(total) * area[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[remainders[k % remainders.size()].second];
  return counts;
}

PointCloud point_cloud_fk(const std::vector<Transform>& link_tf, const LinkPointSet& pts) {
  if (link_tf.size() != pts.per_link.size())
    throw Error("point_cloud_fk: point set has " + std::to_string(pts.per_link.size()) +
                " links, robot has " + std::to_string(link_tf.size()));
  PointCloud cloud;
  cloud.points.reserve(pts.size());
  cloud.segments.reserve(pts.size());
  for (std::size_t l = 0; l < link_tf.size(); ++l) {
    const Mat3 r = link_tf[l].linear();
    const Vec3 t = link_tf[l].translation();
    for (const auto& p : pts.per_link[l]) {
      cloud.points.push_back(r * p + t);
      cloud.segments.push_back(static_cast<int>(l));
    }
  }
  return cloud;
}

PointCloud point_cloud_fk(const RobotModel& model, const JointConfig& q, const LinkPointSet& pts) {
  return point_cloud_fk(forward_kinematics(model, q), pts);
}

std::vector<Vec3> keypoint_fk(const RobotModel& model, const JointConfig& q) {
  const auto tf = forward_kinematics(model, q);
  std::vector<Vec3> out;
  out.reserve(model.keypoints.size());
  for (const auto& kp : model.keypoints) out.push_back(tf[kp.link] * kp.offset);
  return out;
}

JointConfig clamp_to_limits(const RobotModel& model, const JointConfig& q) {
  check_config(model, q);
  JointConfig out = q;
  for (const auto& j : model.joints)
    if (j.dof >= 0) out.angles[j.dof] = std::clamp(q.angles[j.dof], j.lower, j.upper);
  return out;
}

}  // namespace graspforge
