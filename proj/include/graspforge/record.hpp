#pragma once

#include <optional>
#include <string>

#include "graspforge/kinematics.hpp"
#include "graspforge/mesh.hpp"

namespace graspforge {

enum class Provenance { Web, Decoded, SimAugmented };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct MetricsConfig {
  double contact_threshold_cm = 0.5;
  double voxel_cm = 0.2;
  std::size_t object_samples = 2048;  // surface samples for the contact ratio
  std::uint64_t sample_seed = 0;

  void validate() const;
};

/// Table-1 style quality numbers. Lengths in cm, volume in cm^3.
struct QualityMetrics {
  double penetration_depth = 0.0;
  double penetration_volume = 0.0;
  double disjoint_mean = 0.0;
  double contact_ratio = 0.0;
  double contact_threshold_cm = 0.5;
  double voxel_cm = 0.2;

  bool operator==(const QualityMetrics&) const = default;
};

struct EvalConfig {
  double mu = 0.5;
  int facets = 8;
  double eps_min = 0.05;
  double penetration_gate_cm = 0.5;
  double contact_threshold_cm = 0.5;
  double torsion_radius = 0.005;  // soft-finger patch radius, meters

  void validate() const;
  bool operator==(const EvalConfig&) const = default;
};

struct GraspVerdict {
  bool success = false;
  double epsilon = 0.0;
  std::size_t contact_count = 0;
  bool penetration_ok = false;
  double penetration_depth = 0.0;  // cm
  EvalConfig config;

  bool operator==(const GraspVerdict&) const = default;
};

struct ObjectRef {
  std::string id;
  std::string category;
  std::string mesh;  // path to the mesh in its local frame
  SimilarityTransform pose;  // object-local -> grasp frame
};

struct GraspRecord {
  std::string id;
  std::string robot;
  ObjectRef object;
  JointConfig q;
  std::optional<QualityMetrics> metrics;
  std::optional<GraspVerdict> verdict;
  Provenance provenance = Provenance::Web;
  std::string source;  // opaque source-image reference, may be empty
  std::optional<double> fit_rms;  // set by decoding
};

/// Object mesh expressed in the grasp frame (pose applied).
TriMesh posed_object(const TriMesh& local, const SimilarityTransform& pose);

}  // namespace graspforge
