#include "graspforge/io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <initializer_list>
#include <sstream>

#include "graspforge/hash.hpp"

namespace graspforge {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw Error(std::string(what) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(std::string(what) + ": unknown field '" + key + "'");
  }
}

template <class T>
T field(const Json& j, const char* key, const char* what) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(std::string(what) + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string(what) + ": bad field '" + key + "': " + e.what());
  }
}

template <class T>
void optional_field(const Json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it != j.end()) out = it->get<T>();
}

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw Error(std::string(what) + ": expected 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Json quat_json(const Quat& q) { return Json::array({q.w(), q.x(), q.y(), q.z()}); }

Quat quat_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 4) throw Error(std::string(what) + ": expected 4 numbers [w, x, y, z]");
  return Quat(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

Json pose_json(const Pose& p) { return {{"translation", vec_json(p.translation)}, {"rotation", quat_json(p.rotation)}}; }

Pose pose_from(const Json& j, const char* what) {
  check_keys(j, {"translation", "rotation"}, what);
  return {vec_from(field<Json>(j, "translation", what), what), quat_from(field<Json>(j, "rotation", what), what)};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

template <class T>
void put_le(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get_le(std::string_view in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error("distance matrix: truncated data");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void to_json(Json& j, const QualityMetrics& m) {
  j = {{"penetration_depth", m.penetration_depth},   {"penetration_volume", m.penetration_volume},
       {"disjoint_mean", m.disjoint_mean},           {"contact_ratio", m.contact_ratio},
       {"contact_threshold_cm", m.contact_threshold_cm}, {"voxel_cm", m.voxel_cm}};
}

void from_json(const Json& j, QualityMetrics& m) {
  const char* w = "metrics";
  check_keys(j, {"penetration_depth", "penetration_volume", "disjoint_mean", "contact_ratio",
                 "contact_threshold_cm", "voxel_cm"}, w);
  m.penetration_depth = field<double>(j, "penetration_depth", w);
  m.penetration_volume = field<double>(j, "penetration_volume", w);
  m.disjoint_mean = field<double>(j, "disjoint_mean", w);
  m.contact_ratio = field<double>(j, "contact_ratio", w);
  m.contact_threshold_cm = field<double>(j, "contact_threshold_cm", w);
  m.voxel_cm = field<double>(j, "voxel_cm", w);
}

void to_json(Json& j, const EvalConfig& c) {
  j = {{"mu", c.mu}, {"facets", c.facets}, {"eps_min", c.eps_min}, {"penetration_gate_cm", c.penetration_gate_cm},
       {"contact_threshold_cm", c.contact_threshold_cm}, {"torsion_radius", c.torsion_radius}};
}

void from_json(const Json& j, EvalConfig& c) {
  check_keys(j, {"mu", "facets", "eps_min", "penetration_gate_cm", "contact_threshold_cm", "torsion_radius"}, "eval");
  optional_field(j, "mu", c.mu);
  optional_field(j, "facets", c.facets);
  optional_field(j, "eps_min", c.eps_min);
  optional_field(j, "penetration_gate_cm", c.penetration_gate_cm);
  optional_field(j, "contact_threshold_cm", c.contact_threshold_cm);
  optional_field(j, "torsion_radius", c.torsion_radius);
}

void to_json(Json& j, const GraspVerdict& v) {
  j = {{"success", v.success},
       {"epsilon", v.epsilon},
       {"contact_count", v.contact_count},
       {"penetration_ok", v.penetration_ok},
       {"penetration_depth", v.penetration_depth},
       {"config", v.config}};
}

void from_json(const Json& j, GraspVerdict& v) {
  const char* w = "verdict";
  check_keys(j, {"success", "epsilon", "contact_count", "penetration_ok", "penetration_depth", "config"}, w);
  v.success = field<bool>(j, "success", w);
  v.epsilon = field<double>(j, "epsilon", w);
  v.contact_count = field<std::size_t>(j, "contact_count", w);
  v.penetration_ok = field<bool>(j, "penetration_ok", w);
  v.penetration_depth = field<double>(j, "penetration_depth", w);
  v.config = field<EvalConfig>(j, "config", w);
}

void to_json(Json& j, const GraspRecord& r) {
  const auto& p = r.object.pose;
  j = Json::object();
  j["id"] = r.id;
  j["robot"] = r.robot;
  j["object"] = {{"id", r.object.id},
                 {"category", r.object.category},
                 {"mesh", r.object.mesh},
                 {"pose", {{"translation", vec_json(p.translation)}, {"rotation", quat_json(p.rotation)}, {"scale", p.scale}}}};
  j["q"] = {{"base", pose_json(r.q.base)}, {"angles", std::vector<double>(r.q.angles.data(), r.q.angles.data() + r.q.angles.size())}};
  if (r.metrics) j["metrics"] = *r.metrics;
  if (r.verdict) j["verdict"] = *r.verdict;
  j["provenance"] = to_string(r.provenance);
  if (!r.source.empty()) j["source"] = r.source;
  if (r.fit_rms) j["fit_rms"] = *r.fit_rms;
}

void from_json(const Json& j, GraspRecord& r) {
  const char* w = "record";
  check_keys(j, {"id", "robot", "object", "q", "metrics", "verdict", "provenance", "source", "fit_rms"}, w);
  r.id = field<std::string>(j, "id", w);
  r.robot = field<std::string>(j, "robot", w);
  const Json& o = field<Json>(j, "object", w);
  check_keys(o, {"id", "category", "mesh", "pose"}, "object");
  r.object.id = field<std::string>(o, "id", "object");
  r.object.category = field<std::string>(o, "category", "object");
  r.object.mesh = field<std::string>(o, "mesh", "object");
  const Json& p = field<Json>(o, "pose", "object");
  check_keys(p, {"translation", "rotation", "scale"}, "object pose");
  r.object.pose.translation = vec_from(field<Json>(p, "translation", "object pose"), "object pose");
  r.object.pose.rotation = quat_from(field<Json>(p, "rotation", "object pose"), "object pose");
  r.object.pose.scale = field<double>(p, "scale", "object pose");
  const Json& q = field<Json>(j, "q", w);
  check_keys(q, {"base", "angles"}, "q");
  r.q.base = pose_from(field<Json>(q, "base", "q"), "q.base");
  const auto angles = field<std::vector<double>>(q, "angles", "q");
  r.q.angles = Eigen::Map<const Eigen::VectorXd>(angles.data(), static_cast<Eigen::Index>(angles.size()));
  r.metrics.reset();
  r.verdict.reset();
  r.fit_rms.reset();
  if (j.contains("metrics")) r.metrics = field<QualityMetrics>(j, "metrics", w);
  if (j.contains("verdict")) r.verdict = field<GraspVerdict>(j, "verdict", w);
  r.provenance = provenance_from_string(field<std::string>(j, "provenance", w));
  r.source = j.contains("source") ? field<std::string>(j, "source", w) : std::string();
  if (j.contains("fit_rms")) r.fit_rms = field<double>(j, "fit_rms", w);
}

void to_json(Json& j, const MetricsConfig& c) {
  j = {{"contact_threshold_cm", c.contact_threshold_cm}, {"voxel_cm", c.voxel_cm},
       {"object_samples", c.object_samples}, {"sample_seed", c.sample_seed}};
}

void from_json(const Json& j, MetricsConfig& c) {
  check_keys(j, {"contact_threshold_cm", "voxel_cm", "object_samples", "sample_seed"}, "metrics config");
  optional_field(j, "contact_threshold_cm", c.contact_threshold_cm);
  optional_field(j, "voxel_cm", c.voxel_cm);
  optional_field(j, "object_samples", c.object_samples);
  optional_field(j, "sample_seed", c.sample_seed);
}

void to_json(Json& j, const FilterGates& g) {
  j = {{"size_min", g.size_min}, {"size_max", g.size_max}, {"shape_tau", g.shape_tau},
       {"depth_tau", g.depth_tau}, {"volume_tau", g.volume_tau}};
}

void from_json(const Json& j, FilterGates& g) {
  check_keys(j, {"size_min", "size_max", "shape_tau", "depth_tau", "volume_tau"}, "filter gates");
  optional_field(j, "size_min", g.size_min);
  optional_field(j, "size_max", g.size_max);
  optional_field(j, "shape_tau", g.shape_tau);
  optional_field(j, "depth_tau", g.depth_tau);
  optional_field(j, "volume_tau", g.volume_tau);
}

void to_json(Json& j, const FilterConfig& c) {
  j = {{"defaults", c.defaults}, {"categories", c.categories}, {"metrics", c.metrics}, {"d2_pairs", c.d2_pairs},
       {"d2_bins", c.d2_bins}, {"d2_samples", c.d2_samples}, {"seed", c.seed}};
}

void from_json(const Json& j, FilterConfig& c) {
  check_keys(j, {"defaults", "categories", "metrics", "d2_pairs", "d2_bins", "d2_samples", "seed"}, "filter config");
  optional_field(j, "defaults", c.defaults);
  if (j.contains("categories")) {
    for (const auto& [name, g] : j.at("categories").items()) {
      FilterGates gates = c.defaults;
      from_json(g, gates);
      c.categories[name] = gates;
    }
  }
  optional_field(j, "metrics", c.metrics);
  optional_field(j, "d2_pairs", c.d2_pairs);
  optional_field(j, "d2_bins", c.d2_bins);
  optional_field(j, "d2_samples", c.d2_samples);
  optional_field(j, "seed", c.seed);
}

void to_json(Json& j, const PerturbConfig& c) {
  j = {{"points", c.points}, {"max_rotation_deg", c.max_rotation_deg}, {"max_translation", c.max_translation}};
}

void from_json(const Json& j, PerturbConfig& c) {
  check_keys(j, {"points", "max_rotation_deg", "max_translation"}, "perturb config");
  optional_field(j, "points", c.points);
  optional_field(j, "max_rotation_deg", c.max_rotation_deg);
  optional_field(j, "max_translation", c.max_translation);
}

void to_json(Json& j, const PipelineConfig& c) {
  j = {{"filter", c.filter}, {"eval", c.eval}, {"perturb", c.perturb},
       {"retarget_scale", c.retarget_scale}, {"category_scale", c.category_scale}};
}

void from_json(const Json& j, PipelineConfig& c) {
  check_keys(j, {"filter", "eval", "perturb", "retarget_scale", "category_scale"}, "config");
  optional_field(j, "filter", c.filter);
  optional_field(j, "eval", c.eval);
  optional_field(j, "perturb", c.perturb);
  optional_field(j, "retarget_scale", c.retarget_scale);
  optional_field(j, "category_scale", c.category_scale);
}

void to_json(Json& j, const HumanHandKeypoints& k) {
  Json pts = Json::array();
  for (const auto& p : k.points) pts.push_back(vec_json(p));
  j = {{"keypoints", pts}, {"confidence", k.confidence}};
}

void from_json(const Json& j, HumanHandKeypoints& k) {
  check_keys(j, {"keypoints", "confidence"}, "keypoints");
  const Json& pts = field<Json>(j, "keypoints", "keypoints");
  if (!pts.is_array() || pts.size() != 21) throw Error("keypoints: expected exactly 21 points");
  for (std::size_t i = 0; i < 21; ++i) k.points[i] = vec_from(pts[i], "keypoints");
  if (j.contains("confidence")) {
    const auto conf = field<std::vector<double>>(j, "confidence", "keypoints");
    if (conf.size() != 21) throw Error("keypoints: expected 21 confidence values");
    std::copy(conf.begin(), conf.end(), k.confidence.begin());
  } else {
    k.confidence.fill(1.0);
  }
}

void to_json(Json& j, const RetargetMapping& m) {
  Json pairs = Json::array();
  for (const auto& p : m.pairs) pairs.push_back({{"human", p.human}, {"robot", p.robot}, {"weight", p.weight}});
  j = {{"pairs", pairs}, {"scale", m.scale}, {"regularization", m.regularization}};
}

void from_json(const Json& j, RetargetMapping& m) {
  check_keys(j, {"pairs", "scale", "regularization"}, "mapping");
  m.pairs.clear();
  const Json pairs = field<Json>(j, "pairs", "mapping");
  for (const auto& p : pairs) {
    check_keys(p, {"human", "robot", "weight"}, "mapping pair");
    KeypointPair kp;
    kp.human = field<int>(p, "human", "mapping pair");
    kp.robot = field<std::string>(p, "robot", "mapping pair");
    optional_field(p, "weight", kp.weight);
    m.pairs.push_back(kp);
  }
  optional_field(j, "scale", m.scale);
  optional_field(j, "regularization", m.regularization);
}

bool operator==(const GraspRecord& a, const GraspRecord& b) {
  auto same_quat = [](const Quat& x, const Quat& y) { return x.coeffs() == y.coeffs(); };
  return a.id == b.id && a.robot == b.robot && a.object.id == b.object.id &&
         a.object.category == b.object.category && a.object.mesh == b.object.mesh &&
         a.object.pose.translation == b.object.pose.translation && same_quat(a.object.pose.rotation, b.object.pose.rotation) &&
         a.object.pose.scale == b.object.pose.scale && a.q.base.translation == b.q.base.translation &&
         same_quat(a.q.base.rotation, b.q.base.rotation) && a.q.angles.size() == b.q.angles.size() &&
         a.q.angles == b.q.angles && a.metrics == b.metrics && a.verdict == b.verdict &&
         a.provenance == b.provenance && a.source == b.source && a.fit_rms == b.fit_rms;
}

std::string record_to_line(const GraspRecord& r) { return Json(r).dump(); }

GraspRecord record_from_line(std::string_view line, std::size_t line_number) {
  const std::string where = line_number ? "line " + std::to_string(line_number) + ": " : std::string();
  try {
    return Json::parse(line).get<GraspRecord>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + e.what());
  } catch (const Error& e) {
    throw Error(where + e.what());
  }
}

std::string records_to_jsonl(const std::vector<GraspRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_line(r);
    out += '\n';
  }
  return out;
}

std::vector<GraspRecord> records_from_jsonl(std::string_view text) {
  std::vector<GraspRecord> out;
  std::size_t pos = 0, line = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line;
    std::string_view l = text.substr(pos, end - pos);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (l.find_first_not_of(" \t") != std::string_view::npos) out.push_back(record_from_line(l, line));
    pos = end + 1;
  }
  return out;
}

void write_records(const std::string& path, const std::vector<GraspRecord>& records) {
  write_text(path, records_to_jsonl(records));
}

std::vector<GraspRecord> read_records(const std::string& path) {
  try {
    return records_from_jsonl(read_text(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

Json read_json_file(const std::string& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {
template <class T>
T load_as(const std::string& path) {
  const Json j = read_json_file(path);
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}
}  // namespace

PipelineConfig load_config(const std::string& path) {
  auto c = load_as<PipelineConfig>(path);
  c.validate();
  return c;
}

HumanHandKeypoints load_keypoints(const std::string& path) { return load_as<HumanHandKeypoints>(path); }
RetargetMapping load_mapping(const std::string& path) { return load_as<RetargetMapping>(path); }

std::string encode_drom(const DistanceMatrix& d) {
  d.validate();
  std::string out = "DROM";
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint32_t>(out, d.rows);
  put_le<std::uint32_t>(out, d.cols);
  for (float v : d.values) put_le<float>(out, v);
  put_le<std::uint64_t>(out, d.robot_identity);
  put_le<std::uint64_t>(out, d.object_identity);
  return out;
}

DistanceMatrix decode_drom(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "DROM") throw Error("distance matrix: bad magic");
  std::size_t pos = 4;
  const auto version = get_le<std::uint16_t>(bytes, pos);
  if (version != 1) throw Error("distance matrix: unsupported version " + std::to_string(version));
  DistanceMatrix d;
  d.rows = get_le<std::uint32_t>(bytes, pos);
  d.cols = get_le<std::uint32_t>(bytes, pos);
  const std::size_t n = static_cast<std::size_t>(d.rows) * d.cols;
  if (bytes.size() != pos + 4 * n + 16) throw Error("distance matrix: size does not match the header");
  d.values.resize(n);
  for (auto& v : d.values) v = get_le<float>(bytes, pos);
  d.robot_identity = get_le<std::uint64_t>(bytes, pos);
  d.object_identity = get_le<std::uint64_t>(bytes, pos);
  d.validate();
  return d;
}

void write_distance_matrix(const std::string& path, const DistanceMatrix& d) { write_text(path, encode_drom(d)); }

DistanceMatrix read_distance_matrix(const std::string& path) {
  try {
    return decode_drom(read_text(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
}

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16) throw Error("manifest: hash must be 16 hex digits");
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 16);
  if (used != 16) throw Error("manifest: bad hash '" + s + "'");
  return v;
}

Json ref_json(const FileRef& r) { return {{"path", r.path}, {"hash", hex64(r.hash)}}; }

FileRef ref_from(const Json& j) {
  check_keys(j, {"path", "hash"}, "manifest file");
  return {field<std::string>(j, "path", "manifest file"), parse_hex64(field<std::string>(j, "hash", "manifest file"))};
}

void verify(const FileRef& r, const std::string& base) {
  const std::string full = resolve_path(base, r.path);
  if (hash_file(full) != r.hash) throw Error("manifest: hash mismatch for '" + r.path + "'");
}

}  // namespace

void hash_manifest_files(DatasetManifest& m, const std::string& base_dir) {
  m.robot.hash = hash_file(resolve_path(base_dir, m.robot.path));
  for (auto& [name, r] : m.references) r.hash = hash_file(resolve_path(base_dir, r.path));
  for (auto& r : m.records) r.hash = hash_file(resolve_path(base_dir, r.path));
}

void save_manifest(const std::string& path, const DatasetManifest& m) {
  Json refs = Json::object();
  for (const auto& [name, r] : m.references) refs[name] = ref_json(r);
  Json recs = Json::array();
  for (const auto& r : m.records) recs.push_back(ref_json(r));
  const Json j = {{"robot", ref_json(m.robot)},
                  {"points", {{"seed", m.point_seed}, {"counts", m.point_counts}}},
                  {"references", refs},
                  {"config", m.config},
                  {"records", recs}};
  write_json_file(path, j);
}

DatasetManifest load_manifest(const std::string& path) {
  const Json j = read_json_file(path);
  DatasetManifest m;
  try {
    check_keys(j, {"robot", "points", "references", "config", "records"}, "manifest");
    m.robot = ref_from(field<Json>(j, "robot", "manifest"));
    const Json& pts = field<Json>(j, "points", "manifest");
    check_keys(pts, {"seed", "counts"}, "manifest points");
    m.point_seed = field<std::uint64_t>(pts, "seed", "manifest points");
    m.point_counts = field<std::vector<std::size_t>>(pts, "counts", "manifest points");
    const Json refs = field<Json>(j, "references", "manifest");
    for (const auto& [name, r] : refs.items()) m.references[name] = ref_from(r);
    m.config = field<PipelineConfig>(j, "config", "manifest");
    const Json recs = field<Json>(j, "records", "manifest");
    for (const auto& r : recs) m.records.push_back(ref_from(r));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
  m.config.validate();
  const std::string base = std::filesystem::path(path).parent_path().string();
  verify(m.robot, base);
  for (const auto& [name, r] : m.references) verify(r, base);
  for (const auto& r : m.records) verify(r, base);
  return m;
}

std::vector<NamedMesh> export_posed_hand(const RobotModel& robot,
                                         const std::vector<std::optional<TriMesh>>& link_meshes,
                                         const JointConfig& q) {
  if (link_meshes.size() != robot.links.size()) throw Error("link mesh count does not match robot");
  const auto tf = forward_kinematics(robot, q);
  std::vector<NamedMesh> out;
  for (std::size_t l = 0; l < robot.links.size(); ++l)
    if (link_meshes[l]) out.push_back({robot.links[l].name, link_meshes[l]->transformed(tf[l])});
  return out;
}

void write_posed_hand(const std::string& path, const RobotModel& robot,
                      const std::vector<std::optional<TriMesh>>& link_meshes, const JointConfig& q) {
  const auto parts = export_posed_hand(robot, link_meshes, q);
  save_obj_objects(parts, path);
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream ss;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == 0) ss << std::left << std::setw(static_cast<int>(width[c])) << cells[c];
      else ss << "  " << std::right << std::setw(static_cast<int>(width[c])) << cells[c];
    }
    ss << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  ss << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& r : rows) line(r);
  return ss.str();
}

}  // namespace

std::string render_metrics_table(const std::vector<std::pair<std::string, QualityMetrics>>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& [name, m] : rows)
    cells.push_back({name, fixed(m.penetration_depth, 2), fixed(m.penetration_volume, 2), fixed(m.disjoint_mean, 2),
                     fixed(m.contact_ratio, 2)});
  return table({"grasp", "depth (cm)", "volume (cm3)", "disjoint (cm)", "contact ratio"}, cells);
}

std::string render_filter_stats(const FilterStats& s) {
  std::vector<std::vector<std::string>> cells = {
      {"input", std::to_string(s.input)},
      {"rejected: size", std::to_string(s.rejected_size)},
      {"rejected: shape", std::to_string(s.rejected_shape)},
      {"rejected: penetration", std::to_string(s.rejected_penetration)},
      {"retained", std::to_string(s.retained)}};
  return table({"gate", "records"}, cells) + "retained " + fixed(100.0 * s.fraction(), 1) + "%\n";
}

std::string render_verdicts(const std::vector<std::pair<std::string, GraspVerdict>>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& [name, v] : rows)
    cells.push_back({name, v.success ? "yes" : "no", fixed(v.epsilon, 4), std::to_string(v.contact_count),
                     fixed(v.penetration_depth, 2)});
  return table({"grasp", "success", "epsilon", "contacts", "depth (cm)"}, cells);
}

std::string render_augment_stats(const std::vector<AugmentStats>& stats) {
  std::vector<std::vector<std::string>> cells;
  std::size_t acc = 0, att = 0;
  for (const auto& s : stats) {
    cells.push_back({s.object, std::to_string(s.accepted) + "/" + std::to_string(s.target), std::to_string(s.attempts),
                     fixed(100.0 * s.acceptance(), 1) + "%", s.exhausted ? "budget exhausted" : "target met"});
    acc += s.accepted;
    att += s.attempts;
  }
  cells.push_back({"mean", std::to_string(acc), std::to_string(att),
                   fixed(att == 0 ? 0.0 : 100.0 * static_cast<double>(acc) / static_cast<double>(att), 1) + "%", ""});
  return table({"object", "accepted", "attempts", "success rate", "status"}, cells);
}

}  // namespace graspforge
