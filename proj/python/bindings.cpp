#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "graspforge/dro.hpp"
#include "graspforge/geometry.hpp"
#include "graspforge/grasp_eval.hpp"
#include "graspforge/io.hpp"
#include "graspforge/kinematics.hpp"
#include "graspforge/metrics.hpp"
#include "graspforge/retarget.hpp"

namespace py = pybind11;
using namespace graspforge;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

Points to_array(const std::vector<Vec3>& pts) {
  Points out(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return out;
}

std::vector<Vec3> from_array(const Points& a) {
  std::vector<Vec3> out(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) out[static_cast<std::size_t>(i)] = a.row(i).transpose();
  return out;
}

PointCloud cloud_of(const Points& a) { return PointCloud{from_array(a), {}}; }

struct Hand {
  RobotModel robot;
  std::vector<std::optional<TriMesh>> meshes;
  LinkPointSet pts;
};

Hand make_hand(const std::string& path, std::size_t points, std::uint64_t seed) {
  Hand h;
  h.robot = load_robot(path);
  h.meshes = load_link_meshes(h.robot);
  h.pts = sample_link_points(h.robot, h.meshes, allocate_counts(h.meshes, points), seed);
  return h;
}

JointConfig config_from(const Hand& h, const Eigen::VectorXd& angles, const Vec3& translation,
                        const Eigen::Vector4d& rotation_wxyz) {
  JointConfig q = rest_config(h.robot);
  if (angles.size() != q.angles.size()) throw Error("expected " + std::to_string(q.angles.size()) + " joint values");
  q.angles = angles;
  q.base.translation = translation;
  q.base.rotation = Quat(rotation_wxyz[0], rotation_wxyz[1], rotation_wxyz[2], rotation_wxyz[3]).normalized();
  return q;
}

py::dict config_dict(const JointConfig& q) {
  py::dict d;
  d["angles"] = q.angles;
  d["translation"] = q.base.translation;
  d["rotation"] = Eigen::Vector4d(q.base.rotation.w(), q.base.rotation.x(), q.base.rotation.y(), q.base.rotation.z());
  return d;
}

Eigen::MatrixXd matrix_of(const DistanceMatrix& d) {
  Eigen::MatrixXd m(d.rows, d.cols);
  for (std::uint32_t i = 0; i < d.rows; ++i)
    for (std::uint32_t j = 0; j < d.cols; ++j) m(i, j) = d.at(i, j);
  return m;
}

}  // namespace

PYBIND11_MODULE(_graspforge, m) {
  m.doc() = "Grasp retargeting, distance-matrix coding and grasp evaluation";

  py::register_exception<Error>(m, "GraspforgeError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  py::class_<TriMesh>(m, "TriMesh")
      .def(py::init([](const Points& v, const Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>& f) {
             std::vector<Triangle> tris(static_cast<std::size_t>(f.rows()));
             for (Eigen::Index i = 0; i < f.rows(); ++i) tris[static_cast<std::size_t>(i)] = {f(i, 0), f(i, 1), f(i, 2)};
             return TriMesh(from_array(v), std::move(tris));
           }),
           py::arg("vertices"), py::arg("triangles"))
      .def_property_readonly("vertices", [](const TriMesh& t) { return to_array(t.vertices()); })
      .def_property_readonly("triangles", [](const TriMesh& t) {
        Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> f(static_cast<Eigen::Index>(t.triangles().size()), 3);
        for (std::size_t i = 0; i < t.triangles().size(); ++i)
          for (int k = 0; k < 3; ++k) f(static_cast<Eigen::Index>(i), k) = t.triangles()[i][static_cast<std::size_t>(k)];
        return f;
      })
      .def_property_readonly("watertight", &TriMesh::watertight)
      .def_property_readonly("area", &TriMesh::total_area)
      .def("volume", &TriMesh::volume);

  m.def("load_mesh", &load_mesh, py::arg("path"));
  m.def("save_obj", &save_obj, py::arg("mesh"), py::arg("path"));
  m.def("make_box", &make_box, py::arg("lo"), py::arg("hi"));
  m.def("make_icosphere", &make_icosphere, py::arg("radius"), py::arg("subdivisions"),
        py::arg("center") = Vec3::Zero());

  m.def(
      "signed_distance",
      [](const TriMesh& mesh, const Points& q) {
        Eigen::VectorXd out(q.rows());
        for (Eigen::Index i = 0; i < q.rows(); ++i) out[i] = signed_distance(mesh, q.row(i).transpose());
        return out;
      },
      py::arg("mesh"), py::arg("points"), "Signed distances, negative inside.");
  m.def(
      "sample_surface", [](const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
        return to_array(sample_surface(mesh, n, seed).points);
      },
      py::arg("mesh"), py::arg("n"), py::arg("seed") = 0);
  m.def(
      "icp",
      [](const Points& source, const TriMesh& target, bool estimate_scale, int max_iters) {
        IcpOptions o;
        o.estimate_scale = estimate_scale;
        o.max_iters = max_iters;
        const IcpResult r = icp_align(cloud_of(source), target, o);
        py::dict d;
        d["rotation"] = Mat3(r.transform.rotation.toRotationMatrix());
        d["translation"] = r.transform.translation;
        d["scale"] = r.transform.scale;
        d["rms"] = r.rms;
        return d;
      },
      py::arg("source"), py::arg("target"), py::arg("estimate_scale") = false, py::arg("max_iters") = 100);
  m.def(
      "d2_histogram",
      [](const Points& cloud, double range_max, std::size_t pairs, std::size_t bins, std::uint64_t seed) {
        D2Options o;
        o.range_max = range_max;
        o.pairs = pairs;
        o.bins = bins;
        o.seed = seed;
        return d2_descriptor(cloud_of(cloud), o).masses;
      },
      py::arg("cloud"), py::arg("range_max"), py::arg("pairs") = 100000, py::arg("bins") = 64, py::arg("seed") = 0);
  m.def(
      "wasserstein_1d",
      [](const std::vector<double>& a, const std::vector<double>& b, double range_max) {
        return wasserstein_1d(D2Histogram{range_max, a, 0, 0}, D2Histogram{range_max, b, 0, 0});
      },
      py::arg("a"), py::arg("b"), py::arg("range_max"));

  py::class_<Hand>(m, "Hand")
      .def(py::init(&make_hand), py::arg("path"), py::arg("points") = 1024, py::arg("seed") = 0)
      .def_property_readonly("name", [](const Hand& h) { return h.robot.name; })
      .def_property_readonly("dof", [](const Hand& h) { return h.robot.dof(); })
      .def_property_readonly("point_count", [](const Hand& h) { return h.pts.size(); })
      .def_property_readonly("identity", [](const Hand& h) { return h.pts.identity(); })
      .def_property_readonly("limits",
                             [](const Hand& h) {
                               Eigen::MatrixXd l(static_cast<Eigen::Index>(h.robot.dof()), 2);
                               for (const auto& j : h.robot.joints)
                                 if (j.dof >= 0) l.row(j.dof) << j.lower, j.upper;
                               return l;
                             })
      .def("rest", [](const Hand& h) { return config_dict(rest_config(h.robot)); })
      .def(
          "points",
          [](const Hand& h, const Eigen::VectorXd& angles, const Vec3& t, const Eigen::Vector4d& r) {
            return to_array(point_cloud_fk(h.robot, config_from(h, angles, t, r), h.pts).points);
          },
          py::arg("angles"), py::arg("translation") = Vec3::Zero(),
          py::arg("rotation") = Eigen::Vector4d(1, 0, 0, 0), "Hand surface points posed by forward kinematics.")
      .def(
          "keypoints",
          [](const Hand& h, const Eigen::VectorXd& angles, const Vec3& t, const Eigen::Vector4d& r) {
            return to_array(keypoint_fk(h.robot, config_from(h, angles, t, r)));
          },
          py::arg("angles"), py::arg("translation") = Vec3::Zero(), py::arg("rotation") = Eigen::Vector4d(1, 0, 0, 0))
      .def(
          "retarget",
          [](const Hand& h, const Points& keypoints, std::optional<Eigen::VectorXd> confidence, double scale) {
            if (keypoints.rows() != 21) throw Error("expected 21 keypoints");
            HumanHandKeypoints kp;
            for (int i = 0; i < 21; ++i) {
              kp.points[static_cast<std::size_t>(i)] = keypoints.row(i).transpose();
              if (confidence) kp.confidence[static_cast<std::size_t>(i)] = (*confidence)[i];
            }
            RetargetMapping map = default_mapping(h.robot);
            map.scale = scale;
            const RetargetResult r = retarget(kp, h.robot, map, rest_config(h.robot));
            py::dict d = config_dict(r.q);
            d["residual"] = r.residual;
            return d;
          },
          py::arg("keypoints"), py::arg("confidence") = std::nullopt, py::arg("scale") = 1.0)
      .def(
          "encode",
          [](const Hand& h, const Eigen::VectorXd& angles, const Points& object, const Vec3& t,
             const Eigen::Vector4d& r) {
            return matrix_of(encode_grasp(h.robot, h.pts, config_from(h, angles, t, r), cloud_of(object)));
          },
          py::arg("angles"), py::arg("object"), py::arg("translation") = Vec3::Zero(),
          py::arg("rotation") = Eigen::Vector4d(1, 0, 0, 0), "Distance matrix (hand points x object points).")
      .def(
          "decode",
          [](const Hand& h, const Eigen::MatrixXd& dist, const Points& object) {
            DistanceMatrix d;
            d.rows = static_cast<std::uint32_t>(dist.rows());
            d.cols = static_cast<std::uint32_t>(dist.cols());
            d.values.resize(static_cast<std::size_t>(dist.size()));
            for (Eigen::Index i = 0; i < dist.rows(); ++i)
              for (Eigen::Index j = 0; j < dist.cols(); ++j)
                d.values[static_cast<std::size_t>(i * dist.cols() + j)] = static_cast<float>(dist(i, j));
            const DecodeResult r = decode_grasp(d, cloud_of(object), h.robot, h.pts);
            py::dict out = config_dict(r.record.q);
            out["fit_rms"] = r.fit.rms;
            out["infeasible_rows"] = r.points.infeasible_count();
            return out;
          },
          py::arg("distances"), py::arg("object"))
      .def(
          "evaluate",
          [](const Hand& h, const Eigen::VectorXd& angles, const TriMesh& object, const Vec3& t,
             const Eigen::Vector4d& r, double mu) {
            GraspRecord rec;
            rec.q = config_from(h, angles, t, r);
            EvalConfig cfg;
            cfg.mu = mu;
            const GraspVerdict v = evaluate_grasp(rec, h.robot, h.pts, object, cfg);
            const QualityMetrics qm = quality_report(rec, h.robot, h.pts, h.meshes, object, MetricsConfig{});
            py::dict d;
            d["success"] = v.success;
            d["epsilon"] = v.epsilon;
            d["contacts"] = v.contact_count;
            d["penetration_depth"] = qm.penetration_depth;
            d["penetration_volume"] = qm.penetration_volume;
            d["disjoint"] = qm.disjoint_mean;
            d["contact_ratio"] = qm.contact_ratio;
            return d;
          },
          py::arg("angles"), py::arg("object"), py::arg("translation") = Vec3::Zero(),
          py::arg("rotation") = Eigen::Vector4d(1, 0, 0, 0), py::arg("mu") = 0.5,
          "Force-closure verdict and quality metrics of a grasp on an object in its local frame.");

  m.def(
      "multilaterate",
      [](const Points& anchors, const std::vector<double>& dists) {
        const auto a = from_array(anchors);
        const Multilateration r = multilaterate_point(a, dists);
        return py::make_tuple(r.point, r.residual);
      },
      py::arg("anchors"), py::arg("distances"), "Least-squares point from ranges to known anchors.");
  m.def(
      "force_closure_epsilon",
      [](const Points& positions, const Points& normals, double mu, const Vec3& center, double torque_scale,
         double torsion_radius) {
        if (positions.rows() != normals.rows()) throw Error("positions and normals differ in length");
        std::vector<ContactPoint> c(static_cast<std::size_t>(positions.rows()));
        for (Eigen::Index i = 0; i < positions.rows(); ++i) {
          c[static_cast<std::size_t>(i)].position = positions.row(i).transpose();
          c[static_cast<std::size_t>(i)].normal = normals.row(i).transpose().normalized();
        }
        WrenchSpace ws;
        ws.mu = mu;
        ws.center = center;
        ws.torque_scale = torque_scale;
        ws.torsion_radius = torsion_radius;
        return force_closure_epsilon(c, ws);
      },
      py::arg("positions"), py::arg("normals"), py::arg("mu") = 0.5, py::arg("center") = Vec3::Zero(),
      py::arg("torque_scale") = 1.0, py::arg("torsion_radius") = 0.005,
      "Largest origin-centred ball inside the grasp wrench hull; normals point into the object.");
}
