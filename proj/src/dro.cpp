#include "graspforge/dro.hpp"

#include <Eigen/Cholesky>

#include <cmath>

#include "graspforge/geometry.hpp"
#include "graspforge/hash.hpp"

namespace graspforge {

void DistanceMatrix::validate() const {
  if (values.size() != static_cast<std::size_t>(rows) * cols)
    throw Error("distance matrix: value count does not match dimensions");
  for (float v : values)
    if (!std::isfinite(v) || v < 0.0f) throw Error("distance matrix: entries must be finite and non-negative");
}

std::uint64_t cloud_identity(const PointCloud& cloud) {
  Fnv1a h;
  h.update_value(static_cast<std::uint64_t>(cloud.size()));
  for (const auto& p : cloud.points) {
    h.update_value(p.x());
    h.update_value(p.y());
    h.update_value(p.z());
  }
  return h.digest();
}

DistanceMatrix encode_distance_matrix(const PointCloud& robot_cloud, const PointCloud& object_cloud,
                                      std::uint64_t robot_identity) {
  if (robot_cloud.empty() || object_cloud.empty()) throw Error("encode_distance_matrix: empty cloud");
  DistanceMatrix d;
  d.rows = static_cast<std::uint32_t>(robot_cloud.size());
  d.cols = static_cast<std::uint32_t>(object_cloud.size());
  d.values.resize(static_cast<std::size_t>(d.rows) * d.cols);
  for (std::size_t i = 0; i < d.rows; ++i)
    for (std::size_t j = 0; j < d.cols; ++j)
      d.values[i * d.cols + j] = static_cast<float>((robot_cloud.points[i] - object_cloud.points[j]).norm());
  d.robot_identity = robot_identity;
  d.object_identity = cloud_identity(object_cloud);
  return d;
}

DistanceMatrix encode_distance_matrix(const PointCloud& robot_cloud, const PointCloud& object_cloud) {
  return encode_distance_matrix(robot_cloud, object_cloud, 0);
}

DistanceMatrix encode_grasp(const RobotModel& robot, const LinkPointSet& pts, const JointConfig& q,
                            const PointCloud& object_cloud) {
  return encode_distance_matrix(point_cloud_fk(robot, q, pts), object_cloud, pts.identity());
}

Multilaterator::Multilaterator(std::vector<Vec3> anchors, MultilaterationOptions opts)
    : anchors_(std::move(anchors)), center_(Vec3::Zero()), opts_(opts) {
  if (anchors_.size() < 4) throw Error("multilateration needs at least 4 anchors");
  for (const auto& a : anchors_) {
    if (!a.allFinite()) throw Error("multilateration: non-finite anchor");
    center_ += a;
  }
  center_ /= static_cast<double>(anchors_.size());
  for (auto& a : anchors_) a -= center_;
  const auto n = static_cast<Eigen::Index>(anchors_.size());
  a_.resize(n - 1, 3);
  for (Eigen::Index j = 1; j < n; ++j) a_.row(j - 1) = 2.0 * (anchors_[j] - anchors_[0]).transpose();
  qr_.setThreshold(1e-9);
  qr_.compute(a_);
  if (qr_.rank() < 3) throw Error("multilateration: anchors are coplanar or degenerate");
}

Multilateration Multilaterator::solve(std::span<const double> dists) const {
  if (dists.size() != anchors_.size()) throw Error("multilateration: distance count does not match anchors");
  const auto n = static_cast<Eigen::Index>(anchors_.size());
  Eigen::VectorXd b(n - 1);
  const double d0 = dists[0];
  const double a0 = anchors_[0].squaredNorm();
  for (Eigen::Index j = 1; j < n; ++j)
    b[j - 1] = anchors_[j].squaredNorm() - a0 - dists[j] * dists[j] + d0 * d0;
  Vec3 x = qr_.solve(b);

  auto cost = [&](const Vec3& p) {
    double c = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = (p - anchors_[j]).norm() - dists[j];
      c += r * r;
    }
    return c;
  };
  double c = cost(x);
  for (int it = 0; it < opts_.refine_iters && std::isfinite(c); ++it) {
    Mat3 jtj = Mat3::Zero();
    Vec3 jtr = Vec3::Zero();
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vec3 diff = x - anchors_[j];
      const double len = diff.norm();
      if (len == 0.0) continue;
      const Vec3 g = diff / len;
      jtj += g * g.transpose();
      jtr += g * (len - dists[j]);
    }
    const Vec3 step = jtj.ldlt().solve(-jtr);
    if (!step.allFinite()) break;
    const Vec3 cand = x + step;
    const double cc = cost(cand);
    if (!(cc < c)) break;
    x = cand;
    c = cc;
    if (step.norm() <= 1e-15 * (1.0 + x.norm())) break;
  }
  Multilateration out;
  out.point = x + center_;
  out.residual = std::sqrt(c / static_cast<double>(n));
  return out;
}

Multilateration multilaterate_point(std::span<const Vec3> anchors, std::span<const double> dists) {
  for (double d : dists)
    if (!(d >= 0.0) || !std::isfinite(d)) throw Error("multilateration: distances must be finite and non-negative");
  return Multilaterator(std::vector<Vec3>(anchors.begin(), anchors.end())).solve(dists);
}

std::size_t MultilateratedCloud::infeasible_count() const {
  std::size_t n = 0;
  for (bool f : feasible)
    if (!f) ++n;
  return n;
}

MultilateratedCloud multilaterate_cloud(const DistanceMatrix& d, const PointCloud& object_cloud,
                                        const MultilaterationOptions& opts) {
  if (d.values.size() != static_cast<std::size_t>(d.rows) * d.cols)
    throw Error("distance matrix: value count does not match dimensions");
  if (d.cols != object_cloud.size()) throw Error("distance matrix columns do not match the object cloud");
  const Multilaterator solver(object_cloud.points, opts);
  MultilateratedCloud out;
  out.cloud.points.resize(d.rows, Vec3::Zero());
  out.residuals.assign(d.rows, 0.0);
  out.feasible.assign(d.rows, false);
  std::vector<double> row(d.cols);
  for (std::size_t i = 0; i < d.rows; ++i) {
    bool ok = true;
    double sum = 0.0;
    for (std::size_t j = 0; j < d.cols; ++j) {
      row[j] = d.at(i, j);
      if (!std::isfinite(row[j]) || row[j] < 0.0) ok = false;
      sum += row[j];
    }
    if (!ok || sum == 0.0) {
      out.residuals[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    const Multilateration m = solver.solve(row);
    out.cloud.points[i] = m.point;
    out.residuals[i] = m.residual;
    const double mean = sum / static_cast<double>(d.cols);
    out.feasible[i] = m.point.allFinite() && std::isfinite(m.residual) &&
                      m.residual <= opts.infeasible_abs + opts.infeasible_rel * mean;
  }
  return out;
}

namespace {

// Best angle of cos(theta - best) within [lo, hi].
double clamp_angle(double best, double lo, double hi) {
  const double k = std::ceil((lo - best) / (2.0 * kPi));
  const double lifted = best + k * 2.0 * kPi;
  if (lifted <= hi) return lifted;
  return std::cos(lo - best) >= std::cos(hi - best) ? lo : hi;
}

void init_joint_angles(const RobotModel& robot, const LinkPointSet& pts, const PointCloud& target,
                       const std::vector<double>& w, JointConfig& q) {
  std::vector<Transform> tf(robot.links.size(), Transform::Identity());
  tf[robot.root] = q.base.matrix();
  for (int ji : robot.joint_order) {
    const Joint& j = robot.joints[ji];
    const Transform frame = tf[j.parent] * j.origin;
    if (j.dof >= 0) {
      const std::size_t off = pts.offsets[j.child];
      const auto& local = pts.per_link[j.child];
      const Transform inv = frame.inverse();
      const Vec3 a = j.axis;
      if (j.type == JointType::Revolute) {
        double s = 0.0, c = 0.0;
        for (std::size_t k = 0; k < local.size(); ++k) {
          const double wk = w[off + k];
          if (wk <= 0.0) continue;
          const Vec3 t = inv * target.points[off + k];
          const Vec3 p = local[k];
          const Vec3 pp = p - a.dot(p) * a;
          const Vec3 tp = t - a.dot(t) * a;
          s += wk * a.dot(pp.cross(tp));
          c += wk * pp.dot(tp);
        }
        if (std::hypot(s, c) > 1e-12) q.angles[j.dof] = clamp_angle(std::atan2(s, c), j.lower, j.upper);
      } else {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < local.size(); ++k) {
          const double wk = w[off + k];
          if (wk <= 0.0) continue;
          num += wk * a.dot(inv * target.points[off + k] - local[k]);
          den += wk;
        }
        if (den > 0.0) q.angles[j.dof] = std::clamp(num / den, j.lower, j.upper);
      }
    }
    tf[j.child] = frame * joint_motion(j, j.dof >= 0 ? q.angles[j.dof] : 0.0);
  }
}

}  // namespace

FitResult fit_configuration(const RobotModel& robot, const LinkPointSet& pts, const PointCloud& target,
                            const std::optional<JointConfig>& q0, const std::vector<double>& weights,
                            const detail::LmOptions& lm) {
  if (target.size() != pts.size()) throw Error("fit_configuration: target size does not match the point set");
  if (pts.per_link.size() != robot.links.size()) throw Error("fit_configuration: point set does not match robot");
  std::vector<double> w = weights.empty() ? std::vector<double>(target.size(), 1.0) : weights;
  if (w.size() != target.size()) throw Error("fit_configuration: weight count mismatch");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0)) throw Error("fit_configuration: weights must be non-negative");
    if (w[i] > 0.0 && !target.points[i].allFinite()) throw Error("fit_configuration: non-finite target");
  }

  JointConfig q = q0 ? *q0 : rest_config(robot);
  check_config(robot, q);

  std::vector<Vec3> src, dst;
  std::vector<double> sw;
  const std::size_t off = pts.offsets[robot.root];
  for (std::size_t k = 0; k < pts.per_link[robot.root].size(); ++k) {
    if (w[off + k] <= 0.0) continue;
    src.push_back(pts.per_link[robot.root][k]);
    dst.push_back(target.points[off + k]);
    sw.push_back(w[off + k]);
  }
  if (src.size() < 3) throw Error("fit_configuration: fewer than 3 usable root-link points");
  const SimilarityTransform base = fit_similarity(src, dst, sw, false);
  q.base.rotation = base.rotation;
  q.base.translation = base.translation;
  init_joint_angles(robot, pts, target, w, q);
  q = clamp_to_limits(robot, q);

  std::vector<double> sqrt_w(w.size());
  double wsum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sqrt_w[i] = std::sqrt(w[i]);
    wsum += w[i];
  }
  auto residual = [&](const JointConfig& c, Eigen::VectorXd& r) {
    const PointCloud cloud = point_cloud_fk(forward_kinematics(robot, c), pts);
    r.resize(3 * static_cast<Eigen::Index>(cloud.size()));
    for (std::size_t i = 0; i < cloud.size(); ++i)
      r.segment<3>(3 * static_cast<Eigen::Index>(i)) =
          w[i] > 0.0 ? Vec3(sqrt_w[i] * (cloud.points[i] - target.points[i])) : Vec3::Zero();
  };
  const auto solved = detail::minimize_config(robot, q, residual, lm);
  FitResult out;
  out.q = solved.q;
  out.history = solved.history;
  out.rms = std::sqrt(solved.objective / wsum);
  return out;
}

DecodeResult decode_grasp(const DistanceMatrix& d, const PointCloud& object_cloud, const RobotModel& robot,
                          const LinkPointSet& pts, const std::optional<JointConfig>& q0,
                          const DecodeOptions& opts) {
  if (d.rows != pts.size()) throw Error("distance matrix rows do not match the robot point set");
  if (d.robot_identity != 0 && d.robot_identity != pts.identity())
    throw Error("distance matrix was built for a different robot point set");
  if (opts.verify_object_identity && d.object_identity != 0 && d.object_identity != cloud_identity(object_cloud))
    throw Error("distance matrix was built for a different object cloud");
  DecodeResult out;
  out.points = multilaterate_cloud(d, object_cloud, opts.multilateration);
  std::vector<double> w(d.rows);
  Vec3 mean_target = Vec3::Zero();
  std::size_t used = 0;
  for (std::size_t i = 0; i < d.rows; ++i) {
    w[i] = out.points.feasible[i] ? 1.0 : 0.0;
    if (out.points.feasible[i]) {
      mean_target += out.points.cloud.points[i];
      ++used;
    }
  }
  JointConfig start;
  if (q0) {
    start = *q0;
  } else {
    start = rest_config(robot);
    if (used > 0) start.base.translation = mean_target / static_cast<double>(used) -
                                           point_cloud_fk(robot, start, pts).centroid();
  }
  out.fit = fit_configuration(robot, pts, out.points.cloud, start, w, opts.lm);
  out.record.robot = robot.name;
  out.record.q = out.fit.q;
  out.record.provenance = Provenance::Decoded;
  out.record.fit_rms = out.fit.rms;
  return out;
}

}  // namespace graspforge
