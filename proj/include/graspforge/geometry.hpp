#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "graspforge/common.hpp"
#include "graspforge/mesh.hpp"

namespace graspforge {

/// Area-weighted uniform surface samples, deterministic per seed.
PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

struct SignedDistance {
  double distance = 0.0;     // negative inside
  bool sign_reliable = true;  // false when the mesh is not watertight
  Vec3 closest = Vec3::Zero();
};

/// Distance to the nearest surface point, negative inside. The sign comes
/// from the generalized winding number (> 0.5 means inside). On meshes that
/// are not watertight only the magnitude is returned and `sign_reliable` is
/// cleared.
SignedDistance signed_distance_query(const TriMesh& mesh, const Vec3& p);
inline double signed_distance(const TriMesh& mesh, const Vec3& p) {
  return signed_distance_query(mesh, p).distance;
}

/// Normalized central-difference gradient of the signed distance.
Vec3 signed_distance_gradient(const TriMesh& mesh, const Vec3& p, double step = 1e-4);

/// Closed-form weighted similarity (or rigid, when estimate_scale is off)
/// fit mapping src onto dst in the least-squares sense (Umeyama).
SimilarityTransform fit_similarity(std::span<const Vec3> src, std::span<const Vec3> dst,
                                   std::span<const double> weights, bool estimate_scale);

struct IcpOptions {
  bool estimate_scale = false;
  int max_iters = 100;
  double tol = 1e-12;
  double trim_fraction = 0.1;
  /// Extra starting transform tried alongside the principal-axes candidates.
  std::optional<SimilarityTransform> initial;
};

struct IcpResult {
  SimilarityTransform transform;
  double rms = 0.0;
  int iterations = 0;
  std::vector<double> history;  // trimmed RMS per accepted iteration
};

/// Point-to-point ICP of `source` onto a mesh or a point cloud. Returns the
/// transform mapping source into the target frame.
IcpResult icp_align(const PointCloud& source, const TriMesh& target, const IcpOptions& opts = {});
IcpResult icp_align(const PointCloud& source, const PointCloud& target, const IcpOptions& opts = {});

/// Normalized histogram of distances between point pairs.
struct D2Histogram {
  double range_max = 0.0;
  std::vector<double> masses;
  std::size_t pair_count = 0;
  std::uint64_t seed = 0;

  std::size_t bins() const { return masses.size(); }
  double bin_width() const { return range_max / static_cast<double>(masses.size()); }
  std::vector<double> edges() const;
};

struct D2Options {
  std::size_t pairs = 100000;
  std::size_t bins = 64;
  double range_max = 0.0;  // required, > 0
  std::uint64_t seed = 0;
  bool exhaustive = false;  // every unordered pair once instead of sampling
};

D2Histogram d2_descriptor(const PointCloud& cloud, const D2Options& opts);

/// Histogram of raw distance samples with the D2 binning rules (values above
/// range_max land in the last bin).
D2Histogram histogram_from_samples(std::span<const double> samples, std::size_t bins,
                                   double range_max);

/// Earth mover's distance between two histograms on identical bins:
/// sum |CDF_a - CDF_b| * bin width.
double wasserstein_1d(const D2Histogram& a, const D2Histogram& b);

/// Default D2 range for a reference shape: 1.25 x bounding-box diagonal.
double default_d2_range(const Aabb& reference_bounds);

}  // namespace graspforge
