#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graspforge/dro.hpp"
#include "graspforge/geometry.hpp"
#include "graspforge/grasp_eval.hpp"
#include "graspforge/io.hpp"
#include "graspforge/kinematics.hpp"
#include "graspforge/metrics.hpp"
#include "graspforge/pipeline.hpp"
#include "graspforge/retarget.hpp"

namespace fs = std::filesystem;
using namespace graspforge;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
};

struct HandOptions {
  std::string robot;
  std::size_t points = 1024;
};

struct Hand {
  RobotModel robot;
  std::vector<std::optional<TriMesh>> meshes;
  LinkPointSet pts;
};

Hand load_hand(const HandOptions& o, std::uint64_t seed) {
  if (o.robot.empty()) throw Error("--robot is required");
  Hand h;
  h.robot = load_robot(o.robot);
  h.meshes = load_link_meshes(h.robot);
  const auto counts = allocate_counts(h.meshes, o.points);
  h.pts = sample_link_points(h.robot, h.meshes, counts, seed);
  return h;
}

void add_hand_options(CLI::App* cmd, HandOptions& o) {
  cmd->add_option("--robot", o.robot, "robot description file")->required();
  cmd->add_option("--points", o.points, "total robot surface points (seeded by --seed)");
}

PipelineConfig config_of(const Globals& g) {
  PipelineConfig cfg = g.config.empty() ? PipelineConfig{} : load_config(g.config);
  cfg.validate();
  return cfg;
}

bool has_ext(const std::string& path, const std::string& ext) { return fs::path(path).extension() == ext; }

std::string dir_of(const std::string& path) {
  const fs::path p = fs::path(path).parent_path();
  return p.empty() ? std::string(".") : p.string();
}

// Mesh paths inside records are relative to the record file.
std::string mesh_path_for(const std::string& record_file, const std::string& mesh) {
  return resolve_path(dir_of(record_file), mesh);
}

std::string mesh_ref_from(const std::string& mesh, const std::string& out_file) {
  if (out_file.empty()) return mesh;
  return fs::relative(fs::absolute(mesh), fs::absolute(dir_of(out_file))).generic_string();
}

std::vector<GraspRecord> load_grasps(const std::string& path) {
  if (has_ext(path, ".json")) return {read_json_file(path).get<GraspRecord>()};
  return read_records(path);
}

PointCloud load_cloud(const std::string& path, std::size_t samples, std::uint64_t seed) {
  if (has_ext(path, ".ply")) return load_ply(path);
  return sample_surface(load_mesh(path), samples, seed);
}

void emit_text(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error("cannot write " + out);
  f << text;
}

void emit_json(const std::string& out, const Json& j) { emit_text(out, j.dump(2) + "\n"); }

void emit_records(const std::string& out, const std::vector<GraspRecord>& records) {
  if (out.empty())
    std::cout << records_to_jsonl(records);
  else
    write_records(out, records);
}

Json transform_json(const SimilarityTransform& t) {
  return {{"translation", {t.translation.x(), t.translation.y(), t.translation.z()}},
          {"rotation", {t.rotation.w(), t.rotation.x(), t.rotation.y(), t.rotation.z()}},
          {"scale", t.scale}};
}

std::string require_out(const Globals& g) {
  if (g.out.empty()) throw Error("--out is required");
  return g.out;
}

// ---- robot ------------------------------------------------------------------

void robot_commands(CLI::App& app, Globals& g) {
  auto* robot = app.add_subcommand("robot", "inspect robot descriptions")->require_subcommand(1);

  static std::string info_file;
  auto* info = robot->add_subcommand("info", "print links, joints and keypoints");
  info->add_option("file", info_file)->required();
  info->callback([&g] {
    const RobotModel m = load_robot(info_file);
    Json j;
    j["name"] = m.name;
    j["dof"] = m.dof();
    Json links = Json::array();
    for (std::size_t i = 0; i < m.links.size(); ++i)
      links.push_back({{"name", m.links[i].name}, {"mesh", m.links[i].mesh}, {"finger", m.is_finger(static_cast<int>(i))}});
    j["links"] = links;
    Json joints = Json::array();
    for (const auto& jt : m.joints) {
      const char* type = jt.type == JointType::Revolute ? "revolute" : jt.type == JointType::Prismatic ? "prismatic" : "fixed";
      joints.push_back({{"name", jt.name}, {"type", type}, {"parent", m.links[jt.parent].name},
                        {"child", m.links[jt.child].name}, {"lower", jt.lower}, {"upper", jt.upper}});
    }
    j["joints"] = joints;
    Json kps = Json::array();
    for (const auto& k : m.keypoints) kps.push_back({{"label", k.label}, {"link", m.links[k.link].name}});
    j["keypoints"] = kps;
    emit_json(g.out, j);
  });

  static std::string sample_file;
  static std::vector<std::size_t> counts;
  static std::size_t total = 1024;
  auto* sample = robot->add_subcommand("sample", "sample link surface points at the rest pose");
  sample->add_option("file", sample_file)->required();
  sample->add_option("--counts", counts, "points per link")->delimiter(',');
  sample->add_option("--points", total, "total points split by link area when --counts is absent");
  sample->callback([&g] {
    const RobotModel m = load_robot(sample_file);
    const auto meshes = load_link_meshes(m);
    const auto c = counts.empty() ? allocate_counts(meshes, total) : counts;
    const LinkPointSet pts = sample_link_points(m, meshes, c, g.seed);
    save_ply(point_cloud_fk(m, rest_config(m), pts), require_out(g));
    std::cout << pts.size() << " points, identity " << std::hex << pts.identity() << std::dec << "\n";
  });
}

// ---- mesh -------------------------------------------------------------------

void mesh_commands(CLI::App& app, Globals& g) {
  auto* mesh = app.add_subcommand("mesh", "mesh and point-cloud utilities")->require_subcommand(1);

  static std::string sdf_mesh, sdf_points;
  static std::vector<double> sdf_at;
  auto* sdf = mesh->add_subcommand("sdf", "signed distance queries (negative inside)");
  sdf->add_option("mesh", sdf_mesh)->required();
  sdf->add_option("--query", sdf_points, "PLY file of query points");
  sdf->add_option("--at", sdf_at, "single query point")->expected(3);
  sdf->callback([&g] {
    const TriMesh m = load_mesh(sdf_mesh);
    std::vector<Vec3> q;
    if (!sdf_points.empty()) q = load_ply(sdf_points).points;
    if (!sdf_at.empty()) q.emplace_back(sdf_at[0], sdf_at[1], sdf_at[2]);
    if (q.empty()) throw Error("give --query or --at");
    Json rows = Json::array();
    for (const auto& p : q) rows.push_back({{"point", {p.x(), p.y(), p.z()}}, {"sdf", signed_distance(m, p)}});
    emit_json(g.out, rows);
  });

  static std::string sample_mesh;
  static std::size_t sample_n = 2048;
  auto* sample = mesh->add_subcommand("sample", "area-weighted surface samples");
  sample->add_option("mesh", sample_mesh)->required();
  sample->add_option("-n,--count", sample_n);
  sample->callback([&g] { save_ply(sample_surface(load_mesh(sample_mesh), sample_n, g.seed), require_out(g)); });

  static std::string icp_src, icp_dst;
  static bool icp_scale = false;
  static int icp_iters = 100;
  static std::size_t icp_samples = 4096;
  auto* icp = mesh->add_subcommand("icp", "register a source cloud or mesh onto a target");
  icp->add_option("source", icp_src)->required();
  icp->add_option("target", icp_dst)->required();
  icp->add_flag("--scale", icp_scale, "estimate a uniform scale");
  icp->add_option("--iters", icp_iters);
  icp->add_option("--samples", icp_samples, "samples drawn from a source mesh");
  icp->callback([&g] {
    const PointCloud src = load_cloud(icp_src, icp_samples, g.seed);
    IcpOptions o;
    o.estimate_scale = icp_scale;
    o.max_iters = icp_iters;
    const IcpResult r = has_ext(icp_dst, ".ply") ? icp_align(src, load_ply(icp_dst), o) : icp_align(src, load_mesh(icp_dst), o);
    Json j = transform_json(r.transform);
    j["rms"] = r.rms;
    j["iterations"] = r.iterations;
    if (!g.out.empty()) save_ply(transform_cloud(src, r.transform), g.out);
    std::cout << j.dump(2) << "\n";
  });

  static std::vector<std::string> d2_in;
  static std::size_t d2_pairs = 100000, d2_bins = 64, d2_samples = 4096;
  static double d2_range = 0.0;
  auto* d2 = mesh->add_subcommand("d2", "D2 shape histogram, or the 1-D Wasserstein distance of two");
  d2->add_option("inputs", d2_in)->required()->expected(1, 2);
  d2->add_option("--pairs", d2_pairs);
  d2->add_option("--bins", d2_bins);
  d2->add_option("--samples", d2_samples);
  d2->add_option("--range", d2_range, "histogram range; defaults from the first input's bounds");
  d2->callback([&g] {
    const PointCloud a = load_cloud(d2_in[0], d2_samples, g.seed);
    D2Options o;
    o.pairs = d2_pairs;
    o.bins = d2_bins;
    o.seed = g.seed;
    o.range_max = d2_range > 0 ? d2_range : default_d2_range(bounds_of(a.points));
    const D2Histogram ha = d2_descriptor(a, o);
    if (d2_in.size() == 1) {
      emit_json(g.out, {{"range_max", ha.range_max}, {"masses", ha.masses}});
      return;
    }
    const D2Histogram hb = d2_descriptor(load_cloud(d2_in[1], d2_samples, g.seed), o);
    emit_json(g.out, {{"range_max", ha.range_max}, {"wasserstein", wasserstein_1d(ha, hb)}});
  });
}

// ---- retarget ---------------------------------------------------------------

void retarget_command(CLI::App& app, Globals& g) {
  static HandOptions hand;
  static std::string keypoints, mapping, object, category, id = "grasp";
  static int iters = 300;
  auto* cmd = app.add_subcommand("retarget", "fit robot joints to human hand keypoints");
  cmd->add_option("--robot", hand.robot)->required();
  cmd->add_option("--keypoints", keypoints)->required();
  cmd->add_option("--map", mapping, "keypoint mapping JSON; defaults to the five-finger mapping");
  cmd->add_option("--object", object, "object mesh recorded in the output");
  cmd->add_option("--category", category);
  cmd->add_option("--id", id);
  cmd->add_option("--iters", iters);
  cmd->callback([&g] {
    const PipelineConfig cfg = config_of(g);
    const RobotModel robot = load_robot(hand.robot);
    RetargetMapping map = mapping.empty() ? default_mapping(robot) : load_mapping(mapping);
    if (mapping.empty()) map.scale = cfg.retarget_scale;
    RetargetOptions o;
    o.max_iters = iters;
    const RetargetResult r = retarget(load_keypoints(keypoints), robot, map, rest_config(robot), o);
    GraspRecord rec;
    rec.id = id;
    rec.robot = robot.name;
    rec.object.id = object.empty() ? "" : fs::path(object).stem().string();
    rec.object.category = category;
    rec.object.mesh = object.empty() ? "" : mesh_ref_from(object, g.out);
    rec.q = r.q;
    rec.source = keypoints;
    emit_json(g.out, Json(rec));
    std::cerr << "residual " << r.residual << "\n";
  });
}

// ---- metrics ----------------------------------------------------------------

void metrics_command(CLI::App& app, Globals& g) {
  static HandOptions hand;
  static std::string grasps, object;
  static std::optional<double> thresh, voxel;
  auto* cmd = app.add_subcommand("metrics", "penetration, disjoint and contact metrics");
  cmd->add_option("grasps", grasps, "grasp JSON or JSON-lines file")->required();
  add_hand_options(cmd, hand);
  cmd->add_option("--object", object, "object mesh overriding the records' meshes");
  cmd->add_option("--contact-thresh", thresh, "contact threshold in cm");
  cmd->add_option("--voxel", voxel, "voxel edge in cm");
  cmd->callback([&g] {
    MetricsConfig mc = config_of(g).filter.metrics;
    if (thresh) mc.contact_threshold_cm = *thresh;
    if (voxel) mc.voxel_cm = *voxel;
    const Hand h = load_hand(hand, g.seed);
    MeshCache cache;
    std::vector<std::pair<std::string, QualityMetrics>> rows;
    Json report = Json::array();
    for (const auto& rec : load_grasps(grasps)) {
      const TriMesh& obj = cache.get(object.empty() ? mesh_path_for(grasps, rec.object.mesh) : object);
      const QualityMetrics m = quality_report(rec, h.robot, h.pts, h.meshes, obj, mc);
      rows.emplace_back(rec.id, m);
      report.push_back({{"id", rec.id}, {"metrics", m}});
    }
    std::cout << render_metrics_table(rows);
    if (!g.out.empty()) emit_json(g.out, report);
  });
}

// ---- dro --------------------------------------------------------------------

void dro_commands(CLI::App& app, Globals& g) {
  auto* dro = app.add_subcommand("dro", "distance-matrix grasp representation")->require_subcommand(1);

  static HandOptions enc_hand;
  static std::string enc_grasp, enc_cloud, enc_cloud_out;
  static std::size_t enc_samples = 512;
  auto* enc = dro->add_subcommand("encode", "encode a grasp against an object cloud");
  enc->add_option("grasp", enc_grasp)->required();
  add_hand_options(enc, enc_hand);
  enc->add_option("--cloud", enc_cloud, "object cloud (PLY, grasp frame) or mesh (sampled and posed)")->required();
  enc->add_option("--samples", enc_samples, "samples drawn when --cloud is a mesh");
  enc->add_option("--cloud-out", enc_cloud_out, "write the object cloud that was encoded");
  enc->callback([&g] {
    const Hand h = load_hand(enc_hand, g.seed);
    const auto recs = load_grasps(enc_grasp);
    if (recs.size() != 1) throw Error("dro encode takes exactly one grasp");
    PointCloud cloud = load_cloud(enc_cloud, enc_samples, g.seed);
    if (!has_ext(enc_cloud, ".ply")) cloud = transform_cloud(cloud, recs[0].object.pose);
    if (!enc_cloud_out.empty()) save_ply(cloud, enc_cloud_out);
    const DistanceMatrix d = encode_grasp(h.robot, h.pts, recs[0].q, cloud);
    write_distance_matrix(require_out(g), d);
    std::cout << d.rows << " x " << d.cols << "\n";
  });

  static HandOptions dec_hand;
  static std::string dec_in, dec_cloud, dec_id = "decoded";
  static bool dec_skip_object = false;
  auto* dec = dro->add_subcommand("decode", "recover a grasp from a distance matrix");
  dec->add_option("matrix", dec_in)->required();
  add_hand_options(dec, dec_hand);
  dec->add_option("--cloud", dec_cloud, "object cloud (PLY) the matrix was computed against")->required();
  dec->add_option("--id", dec_id);
  dec->add_flag("--no-object-check", dec_skip_object, "skip the object-cloud identity check");
  dec->callback([&g] {
    const Hand h = load_hand(dec_hand, g.seed);
    DecodeOptions o;
    o.verify_object_identity = !dec_skip_object;
    DecodeResult r = decode_grasp(read_distance_matrix(dec_in), load_ply(dec_cloud), h.robot, h.pts, std::nullopt, o);
    r.record.id = dec_id;
    emit_json(g.out, Json(r.record));
    std::cerr << "fit rms " << r.fit.rms << ", infeasible rows " << r.points.infeasible_count() << "\n";
  });
}

// ---- eval -------------------------------------------------------------------

void eval_command(CLI::App& app, Globals& g) {
  static HandOptions hand;
  static std::string grasps, object;
  static std::optional<double> mu;
  static bool depen = false;
  auto* cmd = app.add_subcommand("eval", "force-closure and penetration verdicts");
  cmd->add_option("grasps", grasps)->required();
  add_hand_options(cmd, hand);
  cmd->add_option("--object", object, "object mesh overriding the records' meshes");
  cmd->add_option("--mu", mu, "friction coefficient");
  cmd->add_flag("--depenetrate", depen, "push penetrating points out before evaluating");
  cmd->callback([&g] {
    EvalConfig ec = config_of(g).eval;
    if (mu) ec.mu = *mu;
    ec.validate();
    const Hand h = load_hand(hand, g.seed);
    MeshCache cache;
    std::vector<GraspRecord> out;
    std::vector<std::pair<std::string, GraspVerdict>> rows;
    for (auto rec : load_grasps(grasps)) {
      const TriMesh& obj = cache.get(object.empty() ? mesh_path_for(grasps, rec.object.mesh) : object);
      if (depen) rec.q = depenetrate(rec, h.robot, h.pts, obj);
      rec.verdict = evaluate_grasp(rec, h.robot, h.pts, obj, ec);
      rows.emplace_back(rec.id, *rec.verdict);
      if (!object.empty() && !g.out.empty()) rec.object.mesh = mesh_ref_from(object, g.out);
      out.push_back(std::move(rec));
    }
    emit_records(g.out, out);
    if (!g.out.empty()) std::cout << render_verdicts(rows);
  });
}

// ---- pipeline ---------------------------------------------------------------

void pipeline_commands(CLI::App& app, Globals& g) {
  auto* pipe = app.add_subcommand("pipeline", "dataset filtering and augmentation")->require_subcommand(1);

  static HandOptions f_hand;
  static std::string f_manifest, f_review;
  static std::vector<std::string> f_records, f_refs;
  auto* filter = pipe->add_subcommand("filter", "size, shape and penetration gates");
  filter->add_option("records", f_records, "record files (taken from the manifest when omitted)");
  filter->add_option("--manifest", f_manifest, "dataset manifest with robot, references, config and records");
  filter->add_option("--robot", f_hand.robot);
  filter->add_option("--points", f_hand.points);
  filter->add_option("--reference", f_refs, "category=mesh reference meshes");
  filter->add_option("--review-dir", f_review, "write a posed-hand OBJ per retained record here");
  filter->callback([&g] {
    PipelineConfig cfg = config_of(g);
    std::map<std::string, std::string> ref_paths;
    std::vector<std::string> files = f_records;
    Hand h;
    if (!f_manifest.empty()) {
      const DatasetManifest m = load_manifest(f_manifest);
      const std::string base = dir_of(f_manifest);
      h.robot = load_robot(resolve_path(base, m.robot.path));
      h.meshes = load_link_meshes(h.robot);
      h.pts = sample_link_points(h.robot, h.meshes, m.point_counts, m.point_seed);
      for (const auto& [cat, ref] : m.references) ref_paths[cat] = resolve_path(base, ref.path);
      if (g.config.empty()) cfg = m.config;
      for (const auto& r : m.records) files.push_back(resolve_path(base, r.path));
    } else {
      h = load_hand(f_hand, g.seed);
    }
    for (const auto& spec : f_refs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw Error("--reference expects category=mesh, got " + spec);
      ref_paths[spec.substr(0, eq)] = spec.substr(eq + 1);
    }
    if (files.empty()) throw Error("no record files given");
    std::map<std::string, TriMesh> refs;
    for (const auto& [cat, path] : ref_paths) refs.emplace(cat, load_mesh(path));

    MeshCache cache;
    std::vector<GraspRecord> records;
    for (const auto& file : files)
      for (auto rec : read_records(file)) {
        const std::string path = mesh_path_for(file, rec.object.mesh);
        cache.get(path);
        rec.object.mesh = path;
        records.push_back(std::move(rec));
      }
    const std::string review = f_review.empty() ? "review" : f_review;
    const FilterResult r = filter_dataset(records, {h.robot, h.pts, h.meshes}, refs, cache, cfg.filter, review);
    if (!f_review.empty()) {
      fs::create_directories(f_review);
      for (std::size_t i = 0; i < r.retained.size(); ++i) write_posed_hand(r.review[i].export_path, h.robot, h.meshes, r.retained[i].q);
    }
    std::vector<GraspRecord> kept = r.retained;
    if (!g.out.empty())
      for (auto& rec : kept) rec.object.mesh = mesh_ref_from(rec.object.mesh, g.out);
    emit_records(g.out, kept);
    (g.out.empty() ? std::cerr : std::cout) << render_filter_stats(r.stats);
  });

  static HandOptions m_hand;
  static std::vector<std::string> m_records, m_refs;
  auto* manifest = pipe->add_subcommand("manifest", "write a hashed dataset manifest");
  manifest->add_option("records", m_records, "record files")->required();
  add_hand_options(manifest, m_hand);
  manifest->add_option("--reference", m_refs, "category=mesh reference meshes");
  manifest->callback([&g] {
    const std::string out = require_out(g);
    const std::string base = dir_of(out);
    const Hand h = load_hand(m_hand, g.seed);
    DatasetManifest m;
    m.robot.path = mesh_ref_from(m_hand.robot, out);
    m.point_seed = g.seed;
    for (const auto& pts : h.pts.per_link) m.point_counts.push_back(pts.size());
    for (const auto& spec : m_refs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw Error("--reference expects category=mesh, got " + spec);
      m.references[spec.substr(0, eq)].path = mesh_ref_from(spec.substr(eq + 1), out);
    }
    m.config = config_of(g);
    for (const auto& r : m_records) m.records.push_back({mesh_ref_from(r, out), 0});
    hash_manifest_files(m, base);
    save_manifest(out, m);
  });

  static HandOptions a_hand;
  static std::string a_training, a_category;
  static std::vector<std::string> a_objects;
  static std::size_t a_target = 200, a_budget = 50;
  static bool a_parallel = false;
  auto* aug = pipe->add_subcommand("augment", "predict, decode and evaluate grasps on perturbed objects");
  add_hand_options(aug, a_hand);
  aug->add_option("--training", a_training, "records whose grasps seed the retrieval predictor")->required();
  aug->add_option("--object", a_objects, "object meshes to augment")->required();
  aug->add_option("--category", a_category);
  aug->add_option("--target", a_target, "accepted grasps per object");
  aug->add_option("--budget", a_budget, "attempt budget as a multiple of --target");
  aug->add_flag("--parallel", a_parallel, "process objects concurrently");
  aug->callback([&g] {
    const PipelineConfig cfg = config_of(g);
    const Hand h = load_hand(a_hand, g.seed);
    MeshCache cache;
    std::vector<TrainingEntry> training;
    for (const auto& rec : read_records(a_training)) {
      const TriMesh& mesh = cache.get(mesh_path_for(a_training, rec.object.mesh));
      const PointCloud cloud = transform_cloud(sample_surface(mesh, cfg.perturb.points, g.seed), rec.object.pose);
      training.push_back({rec, encode_grasp(h.robot, h.pts, rec.q, cloud), cloud});
    }
    const RetrievalPredictor predictor(std::move(training), h.pts.identity(), 20000, 64, g.seed);
    std::vector<AugmentObject> objects;
    for (const auto& path : a_objects)
      objects.push_back({fs::path(path).stem().string(), a_category, mesh_ref_from(path, g.out), load_mesh(path)});
    const AugmentOptions opts{a_target, a_budget, a_parallel};
    const AugmentResult r = augment_loop(predictor, objects, h.robot, h.pts, cfg.eval, cfg.perturb, g.seed, opts);
    emit_records(g.out, r.records);
    (g.out.empty() ? std::cerr : std::cout) << render_augment_stats(r.stats);
  });
}

// ---- export -----------------------------------------------------------------

void export_command(CLI::App& app, Globals& g) {
  static std::string grasp, robot;
  static bool with_object = false;
  auto* cmd = app.add_subcommand("export", "write the posed hand of a grasp as OBJ");
  cmd->add_option("grasp", grasp)->required();
  cmd->add_option("--robot", robot)->required();
  cmd->add_flag("--with-object", with_object, "append the posed object mesh");
  cmd->callback([&g] {
    const auto recs = load_grasps(grasp);
    if (recs.size() != 1) throw Error("export takes exactly one grasp");
    const RobotModel m = load_robot(robot);
    auto parts = export_posed_hand(m, load_link_meshes(m), recs[0].q);
    if (with_object) parts.push_back({"object", posed_object(load_mesh(mesh_path_for(grasp, recs[0].object.mesh)), recs[0].object.pose)});
    save_obj_objects(parts, require_out(g));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graspforge: grasp retargeting, distance-matrix coding, evaluation and dataset filtering"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--config", g.config, "pipeline configuration JSON");
  app.add_option("--out", g.out, "output file");
  app.fallthrough();

  robot_commands(app, g);
  mesh_commands(app, g);
  retarget_command(app, g);
  metrics_command(app, g);
  dro_commands(app, g);
  eval_command(app, g);
  pipeline_commands(app, g);
  export_command(app, g);
  for (auto* sub : app.get_subcommands({}))
    for (auto* leaf : sub->get_subcommands({})) leaf->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
