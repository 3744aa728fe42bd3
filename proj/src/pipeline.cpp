#include "graspforge/pipeline.hpp"

#include <cmath>
#include <future>

#include "graspforge/grasp_eval.hpp"
#include "graspforge/hash.hpp"
#include "graspforge/metrics.hpp"
#include "graspforge/random.hpp"

namespace graspforge {

AlignResult align_object(const PointCloud& reconstructed, const TriMesh& reference, const AlignOptions& opts) {
  if (!(opts.category_scale > 0.0)) throw Error("category scale must be positive");
  const IcpResult icp = icp_align(reconstructed, reference, opts.icp);
  AlignResult out;
  out.pose = icp.transform.inverse();
  out.residual = icp.rms;
  if (opts.category_scale != 1.0) {
    const Vec3 c = reference.surface_centroid();
    SimilarityTransform s;
    s.scale = opts.category_scale;
    s.translation = (1.0 - opts.category_scale) * c;
    out.pose = out.pose * s;
  }
  return out;
}

AlignResult align_object(const TriMesh& reconstructed, const TriMesh& reference, const AlignOptions& opts) {
  return align_object(sample_surface(reconstructed, opts.samples, opts.seed), reference, opts);
}

void FilterGates::validate() const {
  if (!(size_min > 0.0) || !(size_max > size_min)) throw Error("size gate needs 0 < min < max");
  if (!(shape_tau > 0.0) || !(depth_tau > 0.0) || !(volume_tau > 0.0)) throw Error("filter gates must be positive");
}

const FilterGates& FilterConfig::gates_for(const std::string& category) const {
  const auto it = categories.find(category);
  return it == categories.end() ? defaults : it->second;
}

void FilterConfig::validate() const {
  defaults.validate();
  for (const auto& [name, g] : categories) g.validate();
  metrics.validate();
  if (d2_pairs == 0 || d2_bins == 0 || d2_samples < 2) throw Error("D2 settings must be positive");
}

void PerturbConfig::validate() const {
  if (points < 4) throw Error("perturbation needs at least 4 points per cloud");
  if (!(max_rotation_deg >= 0.0) || !(max_translation >= 0.0)) throw Error("perturbation ranges must be non-negative");
}

double PipelineConfig::scale_for(const std::string& category) const {
  const auto it = category_scale.find(category);
  return it == category_scale.end() ? 1.0 : it->second;
}

void PipelineConfig::validate() const {
  filter.validate();
  eval.validate();
  perturb.validate();
  if (!(retarget_scale > 0.0)) throw Error("retarget scale must be positive");
  for (const auto& [name, s] : category_scale) {
    if (!(s > 0.0)) throw Error("category scale for '" + name + "' must be positive");
    if (s != 1.0 && retarget_scale != 1.0)
      throw Error("scale the hand (retarget scale) or the objects (category scale), not both");
  }
}

const TriMesh& MeshCache::get(const std::string& path) {
  auto it = meshes_.find(path);
  if (it == meshes_.end()) it = meshes_.emplace(path, std::make_shared<const TriMesh>(load_mesh(path))).first;
  return *it->second;
}

void MeshCache::put(const std::string& path, TriMesh mesh) {
  meshes_[path] = std::make_shared<const TriMesh>(std::move(mesh));
}

FilterResult filter_dataset(const std::vector<GraspRecord>& records, const HandAssets& hand,
                            const std::map<std::string, TriMesh>& references, MeshCache& meshes,
                            const FilterConfig& cfg, const std::string& review_dir) {
  cfg.validate();
  FilterResult out;
  out.stats.input = records.size();
  std::map<std::string, D2Histogram> ref_hist;
  auto d2_of = [&](const TriMesh& mesh, double range) {
    D2Options o;
    o.pairs = cfg.d2_pairs;
    o.bins = cfg.d2_bins;
    o.range_max = range;
    o.seed = cfg.seed;
    return d2_descriptor(sample_surface(mesh, cfg.d2_samples, cfg.seed), o);
  };

  for (const auto& rec : records) {
    const auto ref = references.find(rec.object.category);
    if (ref == references.end())
      throw Error("no reference mesh for category '" + rec.object.category + "' (record " + rec.id + ")");
    const FilterGates& gates = cfg.gates_for(rec.object.category);
    const TriMesh& local = meshes.get(rec.object.mesh);
    const TriMesh scaled = scaled_object(local, rec.object.pose);

    const double size = scaled.bounds().diagonal();
    if (size < gates.size_min || size > gates.size_max) {
      ++out.stats.rejected_size;
      out.outcome.push_back(Gate::Size);
      continue;
    }
    const double range = default_d2_range(ref->second.bounds());
    auto hit = ref_hist.find(rec.object.category);
    if (hit == ref_hist.end()) hit = ref_hist.emplace(rec.object.category, d2_of(ref->second, range)).first;
    if (wasserstein_1d(d2_of(scaled, range), hit->second) > gates.shape_tau) {
      ++out.stats.rejected_shape;
      out.outcome.push_back(Gate::Shape);
      continue;
    }
    const QualityMetrics m = quality_report(rec, hand.robot, hand.pts, hand.link_meshes, local, cfg.metrics);
    if (m.penetration_depth > gates.depth_tau || m.penetration_volume > gates.volume_tau) {
      ++out.stats.rejected_penetration;
      out.outcome.push_back(Gate::Penetration);
      continue;
    }
    GraspRecord kept = rec;
    kept.metrics = m;
    out.retained.push_back(std::move(kept));
    out.review.push_back({rec.id, review_dir + "/" + rec.id + "_hand.obj", m});
    out.outcome.push_back(Gate::None);
  }
  out.stats.retained = out.retained.size();
  return out;
}

RetrievalPredictor::RetrievalPredictor(std::vector<TrainingEntry> training, std::uint64_t robot_identity,
                                       std::size_t d2_pairs, std::size_t d2_bins, std::uint64_t seed)
    : training_(std::move(training)), pairs_(d2_pairs), bins_(d2_bins), seed_(seed) {
  if (training_.empty()) throw Error("retrieval predictor: empty training set");
  for (const auto& e : training_) {
    if (e.matrix.robot_identity != robot_identity)
      throw Error("retrieval predictor: training matrix built for a different robot point set");
    if (e.matrix.cols != e.object_cloud.size())
      throw Error("retrieval predictor: matrix columns do not match the stored object cloud");
  }
}

std::size_t RetrievalPredictor::select(const PointCloud& query) const {
  D2Options o;
  o.pairs = pairs_;
  o.bins = bins_;
  o.seed = seed_;
  o.range_max = default_d2_range(bounds_of(query.points));
  const D2Histogram q = d2_descriptor(query, o);
  std::size_t best = 0;
  double best_w = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < training_.size(); ++i) {
    const double w = wasserstein_1d(q, d2_descriptor(training_[i].object_cloud, o));
    if (w < best_w) {
      best_w = w;
      best = i;
    }
  }
  return best;
}

DistanceMatrix RetrievalPredictor::operator()(const PointCloud& query) const {
  const TrainingEntry& e = training_[select(query)];
  const IcpResult icp = icp_align(e.object_cloud, query);
  const PointCloud moved = transform_cloud(e.object_cloud, icp.transform);
  const KdTree tree(moved.points);
  DistanceMatrix d;
  d.rows = e.matrix.rows;
  d.cols = static_cast<std::uint32_t>(query.size());
  d.values.resize(static_cast<std::size_t>(d.rows) * d.cols);
  for (std::size_t j = 0; j < query.size(); ++j) {
    const std::size_t k = tree.nearest(query.points[j]).index;
    for (std::size_t i = 0; i < d.rows; ++i) d.values[i * d.cols + j] = e.matrix.at(i, k);
  }
  d.robot_identity = e.matrix.robot_identity;
  d.object_identity = cloud_identity(query);
  return d;
}

namespace {

struct ObjectRun {
  std::vector<GraspRecord> records;
  AugmentStats stats;
};

ObjectRun run_object(const Predictor& predictor, const AugmentObject& obj, const RobotModel& robot,
                     const LinkPointSet& pts, const EvalConfig& eval, const PerturbConfig& perturb,
                     std::uint64_t seed, const AugmentOptions& opts) {
  Fnv1a h;
  h.update(obj.id);
  Rng rng(derive_seed(seed, h.digest()));
  ObjectRun run;
  run.stats.object = obj.id;
  run.stats.target = opts.per_object_target;
  const std::size_t budget = opts.per_object_target * opts.budget_factor;
  const double max_rot = perturb.max_rotation_deg * kPi / 180.0;
  while (run.stats.accepted < opts.per_object_target && run.stats.attempts < budget) {
    const std::size_t attempt = run.stats.attempts++;
    const PointCloud cloud = sample_surface(obj.mesh, perturb.points, rng.next());
    const Vec3 axis = rng.unit_vector();
    const double angle = rng.uniform(-max_rot, max_rot);
    const Vec3 shift(rng.uniform(-perturb.max_translation, perturb.max_translation),
                     rng.uniform(-perturb.max_translation, perturb.max_translation),
                     rng.uniform(-perturb.max_translation, perturb.max_translation));
    SimilarityTransform jitter;
    jitter.rotation = Quat(Eigen::AngleAxisd(angle, axis));
    jitter.translation = shift;
    const PointCloud query = transform_cloud(cloud, jitter);
    try {
      const DistanceMatrix d = predictor(query);
      GraspRecord rec = decode_grasp(d, query, robot, pts).record;
      rec.id = obj.id + "-" + std::to_string(attempt);
      rec.object = {obj.id, obj.category, obj.mesh_path, jitter};
      const GraspVerdict v = evaluate_grasp(rec, robot, pts, obj.mesh, eval);
      if (!v.success) continue;
      rec.verdict = v;
      rec.provenance = Provenance::SimAugmented;
      run.records.push_back(std::move(rec));
      ++run.stats.accepted;
    } catch (const Error&) {
    }
  }
  run.stats.exhausted = run.stats.accepted < opts.per_object_target;
  return run;
}

}  // namespace

AugmentResult augment_loop(const Predictor& predictor, const std::vector<AugmentObject>& objects,
                           const RobotModel& robot, const LinkPointSet& pts, const EvalConfig& eval,
                           const PerturbConfig& perturb, std::uint64_t seed, const AugmentOptions& opts) {
  if (opts.per_object_target == 0) throw Error("per-object target must be positive");
  if (opts.budget_factor == 0) throw Error("attempt budget factor must be positive");
  eval.validate();
  perturb.validate();
  std::vector<ObjectRun> runs;
  if (opts.parallel) {
    std::vector<std::future<ObjectRun>> futures;
    for (const auto& obj : objects)
      futures.push_back(std::async(std::launch::async, run_object, std::cref(predictor), std::cref(obj),
                                   std::cref(robot), std::cref(pts), std::cref(eval), std::cref(perturb), seed,
                                   std::cref(opts)));
    for (auto& f : futures) runs.push_back(f.get());
  } else {
    for (const auto& obj : objects) runs.push_back(run_object(predictor, obj, robot, pts, eval, perturb, seed, opts));
  }
  AugmentResult out;
  for (auto& r : runs) {
    out.records.insert(out.records.end(), std::make_move_iterator(r.records.begin()),
                       std::make_move_iterator(r.records.end()));
    out.stats.push_back(r.stats);
  }
  return out;
}

}  // namespace graspforge
