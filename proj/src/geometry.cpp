#include "graspforge/geometry.hpp"

#include <Eigen/SVD>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graspforge/random.hpp"

namespace graspforge {

PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  PointCloud cloud;
  if (n == 0) return cloud;
  if (mesh.empty() || !(mesh.total_area() > 0.0))
    throw Error("sample_surface: mesh has zero surface area");
  std::vector<double> cdf(mesh.areas().size());
  std::partial_sum(mesh.areas().begin(), mesh.areas().end(), cdf.begin());
  Rng rng(seed);
  cloud.points.reserve(n);
  const auto& v = mesh.vertices();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto ti = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
    const auto& t = mesh.triangles()[ti];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    cloud.points.push_back((1.0 - r1) * v[t[0]] + r1 * (1.0 - r2) * v[t[1]] + r1 * r2 * v[t[2]]);
  }
  return cloud;
}

SignedDistance signed_distance_query(const TriMesh& mesh, const Vec3& p) {
  if (mesh.empty()) throw Error("signed_distance: empty mesh");
  const ClosestPoint cp = mesh.closest_point(p);
  SignedDistance out;
  out.closest = cp.point;
  out.distance = std::sqrt(cp.squared_distance);
  if (!mesh.watertight()) {
    out.sign_reliable = false;
    return out;
  }
  if (out.distance > 0.0 && mesh.bounds().squared_distance(p) == 0.0 && mesh.winding_number(p) > 0.5)
    out.distance = -out.distance;
  return out;
}

Vec3 signed_distance_gradient(const TriMesh& mesh, const Vec3& p, double step) {
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 d = Vec3::Zero();
    d[k] = step;
    g[k] = (signed_distance(mesh, p + d) - signed_distance(mesh, p - d)) / (2.0 * step);
  }
  const double n = g.norm();
  if (n < 1e-12) return Vec3::Zero();
  return g / n;
}

SimilarityTransform fit_similarity(std::span<const Vec3> src, std::span<const Vec3> dst,
                                   std::span<const double> weights, bool estimate_scale) {
  if (src.size() != dst.size()) throw Error("fit_similarity: size mismatch");
  const bool weighted = !weights.empty();
  if (weighted && weights.size() != src.size()) throw Error("fit_similarity: weight count mismatch");
  double wsum = 0.0;
  Vec3 ms = Vec3::Zero(), md = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double w = weighted ? weights[i] : 1.0;
    wsum += w;
    ms += w * src[i];
    md += w * dst[i];
  }
  if (!(wsum > 0.0)) throw Error("fit_similarity: no weighted correspondences");
  ms /= wsum;
  md /= wsum;
  Mat3 cov = Mat3::Zero();
  double var_src = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double w = weighted ? weights[i] : 1.0;
    const Vec3 a = src[i] - ms, b = dst[i] - md;
    cov += w * b * a.transpose();
    var_src += w * a.squaredNorm();
  }
  cov /= wsum;
  var_src /= wsum;
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 s = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) s(2, 2) = -1.0;
  const Mat3 r = svd.matrixU() * s * svd.matrixV().transpose();
  SimilarityTransform out;
  out.rotation = Quat(r).normalized();
  out.scale = 1.0;
  if (estimate_scale) {
    if (!(var_src > 0.0)) throw Error("fit_similarity: degenerate source for scale estimation");
    out.scale = (svd.singularValues().asDiagonal() * s).trace() / var_src;
  }
  out.translation = md - out.scale * (r * ms);
  return out;
}

namespace {

struct Frame {
  Vec3 centroid;
  Mat3 axes;  // columns sorted by decreasing variance
  double spread;
  Eigen::Vector3d variances;
};

Frame principal_frame(std::span<const Vec3> pts) {
  Frame f;
  f.centroid = Vec3::Zero();
  for (const auto& p : pts) f.centroid += p;
  f.centroid /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - f.centroid) * (p - f.centroid).transpose();
  cov /= static_cast<double>(pts.size());
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  // Eigen returns ascending order.
  f.axes.col(0) = es.eigenvectors().col(2);
  f.axes.col(1) = es.eigenvectors().col(1);
  f.axes.col(2) = f.axes.col(0).cross(f.axes.col(1));
  f.variances = Eigen::Vector3d(es.eigenvalues()[2], es.eigenvalues()[1], es.eigenvalues()[0]);
  f.spread = std::sqrt(cov.trace());
  return f;
}

template <typename NearestFn>
IcpResult run_icp(const PointCloud& source, const std::vector<Vec3>& target_summary,
                  NearestFn nearest, const IcpOptions& opts) {
  if (source.size() < 3) throw Error("icp_align: need at least 3 source points");
  const Frame fs = principal_frame(source.points);
  if (!(fs.variances[1] > 1e-12 * fs.variances[0]) || !(fs.variances[0] > 0.0))
    throw Error("icp_align: degenerate (collinear or coincident) source");
  if (opts.trim_fraction < 0.0 || opts.trim_fraction >= 1.0)
    throw Error("icp_align: trim_fraction must be in [0, 1)");
  const Frame ft = principal_frame(target_summary);

  std::vector<SimilarityTransform> candidates;
  if (opts.initial) candidates.push_back(*opts.initial);
  const double s0 = opts.estimate_scale ? ft.spread / fs.spread : 1.0;
  {
    SimilarityTransform t;
    t.scale = s0;
    t.translation = ft.centroid - s0 * fs.centroid;
    candidates.push_back(t);
  }
  // Proper sign combinations of the principal axes.
  const double signs[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  for (const auto& sg : signs) {
    Mat3 ds = Eigen::Vector3d(sg[0], sg[1], sg[2]).asDiagonal();
    const Mat3 r = ft.axes * ds * fs.axes.transpose();
    SimilarityTransform t;
    t.rotation = Quat(r).normalized();
    t.scale = s0;
    t.translation = ft.centroid - s0 * (r * fs.centroid);
    candidates.push_back(t);
  }

  const std::size_t n = source.size();
  const std::size_t keep =
      std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil((1.0 - opts.trim_fraction) * n)));
  std::vector<Vec3> matched(n);
  std::vector<double> d2(n);
  std::vector<std::size_t> order(n);
  std::vector<Vec3> src_kept, dst_kept;

  auto evaluate = [&](const SimilarityTransform& t) {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 x = t.apply(source.points[i]);
      matched[i] = nearest(x);
      d2[i] = (matched[i] - x).squaredNorm();
    }
    std::iota(order.begin(), order.end(), 0);
    std::nth_element(order.begin(), order.begin() + (keep - 1), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return d2[a] != d2[b] ? d2[a] < d2[b] : a < b;
                     });
    double sum = 0.0;
    for (std::size_t k = 0; k < keep; ++k) sum += d2[order[k]];
    return std::sqrt(sum / static_cast<double>(keep));
  };

  struct Run {
    IcpResult result;
    bool converged = false;
  };
  auto advance = [&](Run& run, int iters) {
    run.result.rms = evaluate(run.result.transform);
    for (int it = 0; it < iters && run.result.rms > 0.0 && !run.converged; ++it) {
      src_kept.clear();
      dst_kept.clear();
      for (std::size_t k = 0; k < keep; ++k) {
        src_kept.push_back(source.points[order[k]]);
        dst_kept.push_back(matched[order[k]]);
      }
      const SimilarityTransform next = fit_similarity(src_kept, dst_kept, {}, opts.estimate_scale);
      const double rms = evaluate(next);
      if (!(rms <= run.result.rms)) {  // not accepted
        run.converged = true;
        break;
      }
      const double improvement = run.result.rms - rms;
      run.result.transform = next;
      run.result.rms = rms;
      run.result.history.push_back(rms);
      ++run.result.iterations;
      if (improvement < opts.tol) run.converged = true;
    }
  };

  // Screen every start briefly, then refine the best one.
  const int screen = std::min(opts.max_iters, 10);
  Run best;
  best.result.rms = std::numeric_limits<double>::infinity();
  for (const auto& init : candidates) {
    Run run;
    run.result.transform = init;
    run.result.history.push_back(evaluate(init));
    advance(run, screen);
    if (run.result.rms < best.result.rms) best = std::move(run);
  }
  advance(best, opts.max_iters - screen);
  return best.result;
}

}  // namespace

IcpResult icp_align(const PointCloud& source, const TriMesh& target, const IcpOptions& opts) {
  if (target.empty()) throw Error("icp_align: empty target mesh");
  const PointCloud summary = sample_surface(target, 4096, 0);
  return run_icp(source, summary.points, [&](const Vec3& x) { return target.closest_point(x).point; },
                 opts);
}

IcpResult icp_align(const PointCloud& source, const PointCloud& target, const IcpOptions& opts) {
  if (target.size() < 3) throw Error("icp_align: need at least 3 target points");
  KdTree tree(target.points);
  return run_icp(source, target.points,
                 [&](const Vec3& x) { return target.points[tree.nearest(x).index]; }, opts);
}

// --- D2 / Wasserstein ------------------------------------------------------

std::vector<double> D2Histogram::edges() const {
  std::vector<double> e(masses.size() + 1);
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = range_max * static_cast<double>(i) / static_cast<double>(masses.size());
  return e;
}

namespace {

std::size_t bin_of(double d, std::size_t bins, double range_max) {
  if (!(d > 0.0)) return 0;
  const double f = d / range_max * static_cast<double>(bins);
  if (f >= static_cast<double>(bins)) return bins - 1;
  return static_cast<std::size_t>(f);
}

}  // namespace

D2Histogram d2_descriptor(const PointCloud& cloud, const D2Options& opts) {
  if (cloud.size() < 2) throw Error("d2_descriptor: need at least two points");
  if (opts.bins < 1) throw Error("d2_descriptor: bins must be >= 1");
  if (!(opts.range_max > 0.0)) throw Error("d2_descriptor: range_max must be positive");
  D2Histogram h;
  h.range_max = opts.range_max;
  h.seed = opts.seed;
  h.masses.assign(opts.bins, 0.0);
  std::vector<std::size_t> counts(opts.bins, 0);
  const auto& p = cloud.points;
  if (opts.exhaustive) {
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j) {
        ++counts[bin_of((p[i] - p[j]).norm(), opts.bins, opts.range_max)];
        ++h.pair_count;
      }
  } else {
    if (opts.pairs < 1) throw Error("d2_descriptor: pairs must be >= 1");
    Rng rng(opts.seed);
    for (std::size_t k = 0; k < opts.pairs; ++k) {
      const std::size_t i = rng.index(p.size());
      std::size_t j = rng.index(p.size() - 1);
      if (j >= i) ++j;
      ++counts[bin_of((p[i] - p[j]).norm(), opts.bins, opts.range_max)];
    }
    h.pair_count = opts.pairs;
  }
  for (std::size_t b = 0; b < opts.bins; ++b)
    h.masses[b] = static_cast<double>(counts[b]) / static_cast<double>(h.pair_count);
  return h;
}

D2Histogram histogram_from_samples(std::span<const double> samples, std::size_t bins,
                                   double range_max) {
  if (samples.empty() || bins < 1 || !(range_max > 0.0))
    throw Error("histogram_from_samples: invalid arguments");
  D2Histogram h;
  h.range_max = range_max;
  h.masses.assign(bins, 0.0);
  std::vector<std::size_t> counts(bins, 0);
  for (double s : samples) ++counts[bin_of(s, bins, range_max)];
  for (std::size_t b = 0; b < bins; ++b)
    h.masses[b] = static_cast<double>(counts[b]) / static_cast<double>(samples.size());
  h.pair_count = samples.size();
  return h;
}

double wasserstein_1d(const D2Histogram& a, const D2Histogram& b) {
  if (a.bins() != b.bins() || a.bins() == 0 || a.range_max != b.range_max)
    throw Error("wasserstein_1d: histograms use different binnings");
  double ca = 0.0, cb = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < a.bins(); ++i) {
    ca += a.masses[i];
    cb += b.masses[i];
    sum += std::abs(ca - cb);
  }
  return sum * a.bin_width();
}

double default_d2_range(const Aabb& reference_bounds) {
  return 1.25 * reference_bounds.diagonal();
}

}  // namespace graspforge
