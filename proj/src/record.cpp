#include "graspforge/record.hpp"

namespace graspforge {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Web: return "web";
    case Provenance::Decoded: return "decoded";
    case Provenance::SimAugmented: return "sim-augmented";
  }
  throw InvariantError("bad provenance value");
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "web") return Provenance::Web;
  if (s == "decoded") return Provenance::Decoded;
  if (s == "sim-augmented") return Provenance::SimAugmented;
  throw Error("unknown provenance '" + s + "'");
}

void MetricsConfig::validate() const {
  if (!(contact_threshold_cm > 0.0)) throw Error("contact threshold must be positive");
  if (!(voxel_cm > 0.0)) throw Error("voxel size must be positive");
  if (object_samples == 0) throw Error("object sample count must be positive");
}

void EvalConfig::validate() const {
  if (!(mu > 0.0)) throw Error("friction coefficient must be positive");
  if (facets < 3) throw Error("friction cone needs at least 3 facets");
  if (!(eps_min >= 0.0)) throw Error("eps_min must be non-negative");
  if (!(penetration_gate_cm >= 0.0)) throw Error("penetration gate must be non-negative");
  if (!(contact_threshold_cm > 0.0)) throw Error("contact threshold must be positive");
  if (!(torsion_radius >= 0.0)) throw Error("torsion radius must be non-negative");
}

TriMesh posed_object(const TriMesh& local, const SimilarityTransform& pose) {
  return local.transformed(pose);
}

}  // namespace graspforge
