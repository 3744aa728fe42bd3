#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "graspforge/dro.hpp"
#include "graspforge/pipeline.hpp"
#include "graspforge/record.hpp"
#include "graspforge/retarget.hpp"

namespace graspforge {

using Json = nlohmann::json;

// JSON mappings. Readers throw Error on missing or unknown fields.
void to_json(Json& j, const QualityMetrics& m);
void from_json(const Json& j, QualityMetrics& m);
void to_json(Json& j, const EvalConfig& c);
void from_json(const Json& j, EvalConfig& c);
void to_json(Json& j, const GraspVerdict& v);
void from_json(const Json& j, GraspVerdict& v);
void to_json(Json& j, const GraspRecord& r);
void from_json(const Json& j, GraspRecord& r);
void to_json(Json& j, const MetricsConfig& c);
void from_json(const Json& j, MetricsConfig& c);
void to_json(Json& j, const FilterGates& g);
void from_json(const Json& j, FilterGates& g);
void to_json(Json& j, const FilterConfig& c);
void from_json(const Json& j, FilterConfig& c);
void to_json(Json& j, const PerturbConfig& c);
void from_json(const Json& j, PerturbConfig& c);
void to_json(Json& j, const PipelineConfig& c);
void from_json(const Json& j, PipelineConfig& c);
void to_json(Json& j, const HumanHandKeypoints& k);
void from_json(const Json& j, HumanHandKeypoints& k);
void to_json(Json& j, const RetargetMapping& m);
void from_json(const Json& j, RetargetMapping& m);

bool operator==(const GraspRecord& a, const GraspRecord& b);

// ---- JSON-lines ------------------------------------------------------------

std::string record_to_line(const GraspRecord& r);
GraspRecord record_from_line(std::string_view line, std::size_t line_number = 0);

std::string records_to_jsonl(const std::vector<GraspRecord>& records);
std::vector<GraspRecord> records_from_jsonl(std::string_view text);

void write_records(const std::string& path, const std::vector<GraspRecord>& records);
std::vector<GraspRecord> read_records(const std::string& path);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
PipelineConfig load_config(const std::string& path);
HumanHandKeypoints load_keypoints(const std::string& path);
RetargetMapping load_mapping(const std::string& path);

// ---- distance matrices -----------------------------------------------------

/// "DROM", u16 version, u32 rows, u32 cols, f32 row-major values, u64 robot
/// identity, u64 object identity; everything little-endian.
std::string encode_drom(const DistanceMatrix& d);
DistanceMatrix decode_drom(std::string_view bytes);
void write_distance_matrix(const std::string& path, const DistanceMatrix& d);
DistanceMatrix read_distance_matrix(const std::string& path);

// ---- manifest --------------------------------------------------------------

struct FileRef {
  std::string path;  // relative to the manifest directory unless absolute
  std::uint64_t hash = 0;
};

struct DatasetManifest {
  FileRef robot;
  std::uint64_t point_seed = 0;
  std::vector<std::size_t> point_counts;
  std::map<std::string, FileRef> references;
  PipelineConfig config;
  std::vector<FileRef> records;
};

/// Fills in the hash of every referenced file.
void hash_manifest_files(DatasetManifest& m, const std::string& base_dir);
void save_manifest(const std::string& path, const DatasetManifest& m);
/// Loads and checks every referenced file's hash.
DatasetManifest load_manifest(const std::string& path);
std::string resolve_path(const std::string& base_dir, const std::string& path);

// ---- export and reports ----------------------------------------------------

std::vector<NamedMesh> export_posed_hand(const RobotModel& robot,
                                         const std::vector<std::optional<TriMesh>>& link_meshes,
                                         const JointConfig& q);
void write_posed_hand(const std::string& path, const RobotModel& robot,
                      const std::vector<std::optional<TriMesh>>& link_meshes, const JointConfig& q);

std::string render_metrics_table(const std::vector<std::pair<std::string, QualityMetrics>>& rows);
std::string render_filter_stats(const FilterStats& stats);
std::string render_verdicts(const std::vector<std::pair<std::string, GraspVerdict>>& rows);
std::string render_augment_stats(const std::vector<AugmentStats>& stats);

}  // namespace graspforge
