#include "graspforge/grasp_eval.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "graspforge/detail/lm.hpp"
#include "graspforge/geometry.hpp"
#include "graspforge/lp.hpp"
#include "graspforge/metrics.hpp"

namespace graspforge {

namespace {

using Wrench = Eigen::Matrix<double, 6, 1>;

constexpr int kStarts = 32;
constexpr int kDescentSteps = 40;

std::vector<ContactPoint> contacts_from(const PointCloud& hand, const std::vector<SignedDistance>& sd,
                                        const TriMesh& object, double threshold_cm, double cluster_cm) {
  const double thr = threshold_cm / 100.0;
  const double cl2 = std::pow(cluster_cm / 100.0, 2);
  std::vector<ContactPoint> out;
  for (std::size_t i = 0; i < hand.size(); ++i) {
    if (std::abs(sd[i].distance) > thr) continue;
    const int link = hand.has_segments() ? hand.segments[i] : -1;
    bool near = false;
    for (const auto& c : out) {
      if (c.link == link && (c.position - sd[i].closest).squaredNorm() < cl2) {
        near = true;
        break;
      }
    }
    if (near) continue;
    const Vec3 g = signed_distance_gradient(object, hand.points[i]);
    if (g.isZero()) continue;
    ContactPoint c;
    c.position = sd[i].closest;
    c.normal = -g;
    c.link = link;
    c.penetrating = sd[i].distance < 0.0;
    out.push_back(c);
  }
  return out;
}

// Tangent direction tied to the contact geometry so that the friction
// pyramid turns with the grasp.
Vec3 tangent_for(const std::vector<ContactPoint>& contacts, std::size_t i, const Vec3& center, double scale) {
  const Vec3& n = contacts[i].normal;
  auto project = [&](const Vec3& v) { return Vec3(v - n.dot(v) * n); };
  const double tiny = 1e-6 * scale;
  Vec3 t = project(contacts[i].position - center);
  if (t.norm() > tiny) return t.normalized();
  for (std::size_t j = 0; j < contacts.size(); ++j) {
    t = project(contacts[j].position - contacts[i].position);
    if (t.norm() > tiny) return t.normalized();
  }
  for (std::size_t j = 0; j < contacts.size(); ++j) {
    t = project(contacts[j].normal);
    if (t.norm() > 1e-6) return t.normalized();
  }
  const Vec3 axis = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return n.cross(axis).normalized();
}

double support(const Eigen::MatrixXd& w, const Wrench& u) { return (w.transpose() * u).maxCoeff(); }

}  // namespace

std::vector<ContactPoint> extract_contacts(const PointCloud& hand, const TriMesh& object, double threshold_cm,
                                           double cluster_cm) {
  if (!object.watertight()) throw Error("extract_contacts: object mesh is not watertight");
  if (!(threshold_cm > 0.0)) throw Error("contact threshold must be positive");
  std::vector<SignedDistance> sd;
  sd.reserve(hand.size());
  for (const auto& p : hand.points) sd.push_back(signed_distance_query(object, p));
  return contacts_from(hand, sd, object, threshold_cm, cluster_cm);
}

std::vector<Wrench> contact_wrenches(const std::vector<ContactPoint>& contacts, const WrenchSpace& ws) {
  if (!(ws.mu > 0.0)) throw Error("friction coefficient must be positive");
  if (ws.facets < 3) throw Error("friction cone needs at least 3 facets");
  if (!(ws.torque_scale > 0.0)) throw Error("torque scale must be positive");
  std::vector<Wrench> out;
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const auto& c = contacts[i];
    const Vec3 t1 = tangent_for(contacts, i, ws.center, ws.torque_scale);
    const Vec3 t2 = c.normal.cross(t1);
    const Vec3 arm = c.position - ws.center;
    for (int k = 0; k < ws.facets; ++k) {
      const double a = 2.0 * kPi * k / ws.facets;
      const Vec3 f = c.normal + ws.mu * (std::cos(a) * t1 + std::sin(a) * t2);
      Wrench w;
      w << f, arm.cross(f) / ws.torque_scale;
      out.push_back(w);
    }
    if (ws.torsion_radius > 0.0) {
      for (double s : {1.0, -1.0}) {
        Wrench w;
        w << c.normal, (arm.cross(c.normal) + s * ws.mu * ws.torsion_radius * c.normal) / ws.torque_scale;
        out.push_back(w);
      }
    }
  }
  return out;
}

double force_closure_epsilon(const std::vector<ContactPoint>& contacts, const WrenchSpace& ws) {
  const auto prims = contact_wrenches(contacts, ws);
  const auto m = static_cast<Eigen::Index>(prims.size());
  if (m < 7) return 0.0;
  Eigen::MatrixXd w(6, m);
  for (Eigen::Index i = 0; i < m; ++i) w.col(i) = prims[i];

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
  const auto sv = svd.singularValues();
  if (sv[5] <= 1e-10 * sv[0]) return 0.0;

  // Origin strictly inside: a combination with every weight >= t > 0.
  {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(7, m + 1);
    a.topLeftCorner(6, m) = w;
    a.block(0, m, 6, 1) = w.rowwise().sum();
    a.block(6, 0, 1, m).setOnes();
    a(6, m) = static_cast<double>(m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(7);
    b[6] = 1.0;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m + 1);
    c[m] = 1.0;
    const auto lp = solve_lp(a, b, c);
    if (lp.status != LpResult::Status::Optimal || lp.objective <= 1e-12) return 0.0;
  }

  // Ray shooting from the origin: the supporting facet hit along u gives a
  // new direction with no larger support value. Repeat until it stalls.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(7, m + 2);
  a.topLeftCorner(6, m) = w;
  a.block(6, 0, 1, m).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(7);
  b[6] = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m + 2);
  c[m] = 1.0;
  c[m + 1] = -1.0;
  auto descend = [&](Wrench u) {
    double best = support(w, u);
    for (int step = 0; step < kDescentSteps; ++step) {
      a.block(0, m, 6, 1) = -u;
      a.block(0, m + 1, 6, 1) = u;
      const auto lp = solve_lp(a, b, c);
      if (lp.status != LpResult::Status::Optimal) break;
      const Wrench g = -lp.dual.head<6>();
      if (!(g.norm() > 0.0)) break;
      const Wrench n = g.normalized();
      const double h = support(w, n);
      if (!(h < best * (1.0 - 1e-13))) break;
      best = h;
      u = n;
    }
    return best;
  };

  std::vector<std::pair<double, Wrench>> starts;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Wrench u = -w.col(i).normalized();
    starts.emplace_back(support(w, u), u);
  }
  std::sort(starts.begin(), starts.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  double eps = std::numeric_limits<double>::infinity();
  const std::size_t k = std::min<std::size_t>(starts.size(), kStarts);
  for (std::size_t i = 0; i < k; ++i) eps = std::min(eps, descend(starts[i].second));
  return std::max(eps, 0.0);
}

PosedGrasp pose_grasp(const GraspRecord& grasp, const RobotModel& robot, const LinkPointSet& pts,
                      const TriMesh& object) {
  check_config(robot, grasp.q);
  PosedGrasp out{point_cloud_fk(robot, config_in_object_frame(grasp.q, grasp.object.pose), pts),
                 scaled_object(object, grasp.object.pose)};
  return out;
}

GraspVerdict evaluate_grasp(const GraspRecord& grasp, const RobotModel& robot, const LinkPointSet& pts,
                            const TriMesh& object, const EvalConfig& cfg) {
  cfg.validate();
  const PosedGrasp pg = pose_grasp(grasp, robot, pts, object);
  if (!pg.object.watertight()) throw Error("evaluate_grasp: object mesh is not watertight");
  std::vector<SignedDistance> sd;
  sd.reserve(pg.hand.size());
  double depth = 0.0;
  for (const auto& p : pg.hand.points) {
    sd.push_back(signed_distance_query(pg.object, p));
    depth = std::max(depth, -sd.back().distance);
  }
  const auto contacts = contacts_from(pg.hand, sd, pg.object, cfg.contact_threshold_cm, 0.5);
  WrenchSpace ws;
  ws.mu = cfg.mu;
  ws.facets = cfg.facets;
  ws.center = pg.object.surface_centroid();
  ws.torque_scale = pg.object.bounds().diagonal();
  ws.torsion_radius = cfg.torsion_radius;

  GraspVerdict v;
  v.config = cfg;
  v.contact_count = contacts.size();
  v.epsilon = force_closure_epsilon(contacts, ws);
  v.penetration_depth = depth * 100.0;
  v.penetration_ok = v.penetration_depth <= cfg.penetration_gate_cm;
  v.success = v.penetration_ok && v.epsilon >= cfg.eps_min;
  return v;
}

JointConfig depenetrate(const GraspRecord& grasp, const RobotModel& robot, const LinkPointSet& pts,
                        const TriMesh& object, const DepenetrateOptions& opts) {
  const TriMesh obj = scaled_object(object, grasp.object.pose);
  if (!obj.watertight()) throw Error("depenetrate: object mesh is not watertight");
  const JointConfig start = config_in_object_frame(grasp.q, grasp.object.pose);
  const double anchor = 1e-3;
  auto residual = [&](const JointConfig& q, Eigen::VectorXd& r) {
    const PointCloud hand = point_cloud_fk(robot, q, pts);
    const auto n = static_cast<Eigen::Index>(hand.size());
    const auto dof = q.angles.size();
    r.resize(n + 6 + dof);
    for (Eigen::Index i = 0; i < n; ++i)
      r[i] = std::max(0.0, opts.margin - signed_distance(obj, hand.points[static_cast<std::size_t>(i)]));
    r.segment<3>(n) = anchor * (q.base.translation - start.base.translation);
    r.segment<3>(n + 3) = anchor * Eigen::AngleAxisd(q.base.rotation * start.base.rotation.inverse()).angle() *
                          Vec3::Ones() / std::sqrt(3.0);
    r.segment(n + 6, dof) = anchor * (q.angles - start.angles);
  };
  detail::LmOptions lm;
  lm.max_iters = opts.max_iters;
  const auto res = detail::minimize_config(robot, start, residual, lm);
  JointConfig out = res.q;
  const Pose pose{grasp.object.pose.translation, grasp.object.pose.rotation};
  out.base = pose * res.q.base;
  return out;
}

}  // namespace graspforge
