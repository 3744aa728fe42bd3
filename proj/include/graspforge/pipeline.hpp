#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "graspforge/dro.hpp"
#include "graspforge/geometry.hpp"
#include "graspforge/record.hpp"

namespace graspforge {

// ---- alignment -------------------------------------------------------------

struct AlignOptions {
  IcpOptions icp;
  double category_scale = 1.0;  // extra uniform scale of the reference mesh
  std::size_t samples = 4096;   // surface samples when the reconstruction is a mesh
  std::uint64_t seed = 0;
};

struct AlignResult {
  SimilarityTransform pose;  // reference-mesh frame -> grasp frame
  double residual = 0.0;
};

/// Registers the reconstruction onto the reference mesh and returns the pose
/// that places the reference in the reconstruction's (grasp) frame. The
/// category multiplier scales the reference about its surface centroid.
AlignResult align_object(const PointCloud& reconstructed, const TriMesh& reference, const AlignOptions& opts = {});
AlignResult align_object(const TriMesh& reconstructed, const TriMesh& reference, const AlignOptions& opts = {});

// ---- configuration ---------------------------------------------------------

struct FilterGates {
  double size_min = 0.02;      // m, bounding-box diagonal
  double size_max = 0.60;      // m
  double shape_tau = 0.01;     // m, D2 Wasserstein
  double depth_tau = 1.0;      // cm
  double volume_tau = 5.0;     // cm^3

  void validate() const;
  bool operator==(const FilterGates&) const = default;
};

struct FilterConfig {
  FilterGates defaults;
  std::map<std::string, FilterGates> categories;
  MetricsConfig metrics;
  std::size_t d2_pairs = 100000;
  std::size_t d2_bins = 64;
  std::size_t d2_samples = 4096;  // surface samples per mesh for D2
  std::uint64_t seed = 0;

  const FilterGates& gates_for(const std::string& category) const;
  void validate() const;
};

struct PerturbConfig {
  std::size_t points = 512;
  double max_rotation_deg = 5.0;
  double max_translation = 0.01;  // m, per axis

  void validate() const;
};

struct PipelineConfig {
  FilterConfig filter;
  EvalConfig eval;
  PerturbConfig perturb;
  double retarget_scale = 1.0;
  std::map<std::string, double> category_scale;

  double scale_for(const std::string& category) const;
  /// Rejects using both the hand-side and the object-side scale knob.
  void validate() const;
};

// ---- filtering -------------------------------------------------------------

/// Loads meshes by path once; meshes can also be registered directly.
class MeshCache {
 public:
  const TriMesh& get(const std::string& path);
  void put(const std::string& path, TriMesh mesh);

 private:
  std::map<std::string, std::shared_ptr<const TriMesh>> meshes_;
};

struct FilterStats {
  std::size_t input = 0;
  std::size_t rejected_size = 0;
  std::size_t rejected_shape = 0;
  std::size_t rejected_penetration = 0;
  std::size_t retained = 0;

  double fraction() const { return input == 0 ? 0.0 : static_cast<double>(retained) / static_cast<double>(input); }
  bool operator==(const FilterStats&) const = default;
};

enum class Gate { None, Size, Shape, Penetration };

struct ReviewEntry {
  std::string id;
  std::string export_path;
  QualityMetrics metrics;
};

struct FilterResult {
  std::vector<GraspRecord> retained;
  FilterStats stats;
  std::vector<ReviewEntry> review;
  std::vector<Gate> outcome;  // per input record, first failing gate
};

struct HandAssets {
  const RobotModel& robot;
  const LinkPointSet& pts;
  const std::vector<std::optional<TriMesh>>& link_meshes;
};

FilterResult filter_dataset(const std::vector<GraspRecord>& records, const HandAssets& hand,
                            const std::map<std::string, TriMesh>& references, MeshCache& meshes,
                            const FilterConfig& cfg, const std::string& review_dir = "review");

// ---- predictors and the augmentation loop ----------------------------------

using Predictor = std::function<DistanceMatrix(const PointCloud& query)>;

struct TrainingEntry {
  GraspRecord record;
  DistanceMatrix matrix;
  PointCloud object_cloud;
};

/// Nearest training object by D2 Wasserstein distance, its matrix columns
/// remapped onto the query through ICP and nearest-neighbour matching.
class RetrievalPredictor {
 public:
  RetrievalPredictor(std::vector<TrainingEntry> training, std::uint64_t robot_identity,
                     std::size_t d2_pairs = 20000, std::size_t d2_bins = 64, std::uint64_t seed = 0);
  DistanceMatrix operator()(const PointCloud& query) const;
  std::size_t select(const PointCloud& query) const;

 private:
  std::vector<TrainingEntry> training_;
  std::size_t pairs_, bins_;
  std::uint64_t seed_;
};

struct AugmentObject {
  std::string id;
  std::string category;
  std::string mesh_path;
  TriMesh mesh;  // object-local frame
};

struct AugmentOptions {
  std::size_t per_object_target = 200;
  std::size_t budget_factor = 50;
  bool parallel = false;
};

struct AugmentStats {
  std::string object;
  std::size_t attempts = 0;
  std::size_t accepted = 0;
  std::size_t target = 0;
  bool exhausted = false;

  double acceptance() const { return attempts == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempts); }
};

struct AugmentResult {
  std::vector<GraspRecord> records;
  std::vector<AugmentStats> stats;
};

AugmentResult augment_loop(const Predictor& predictor, const std::vector<AugmentObject>& objects,
                           const RobotModel& robot, const LinkPointSet& pts, const EvalConfig& eval,
                           const PerturbConfig& perturb, std::uint64_t seed, const AugmentOptions& opts = {});

}  // namespace graspforge
