/*
 * Copyright 2026 The LRFKit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LRFKIT_GEOMETRY_HPP_
#define LRFKIT_GEOMETRY_HPP_

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "lrfkit/kdtree.hpp"
#include "lrfkit/random.hpp"
#include "lrfkit/types.hpp"

namespace lrfkit {

/// Mean distance from each point to its single nearest neighbor.
template <typename Scalar>
Scalar compute_mesh_resolution(const PointCloud<Scalar>& cloud) {
  const Eigen::Index n = cloud.size();
  if (n < 2) {
    throw_error(ErrorCode::kInvalidInput, "compute_mesh_resolution: need at least 2 points");
  }
  const KdTree3<Scalar> tree(cloud.points);
  Scalar total = Scalar(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3<Scalar> p = cloud.points.row(i).transpose();
    // Nearest excluding the point itself: search a growing radius until a
    // second point is found, then take the closest distinct index.
    Scalar best = std::numeric_limits<Scalar>::infinity();
    const Vec3<Scalar> extent = cloud.points.colwise().maxCoeff().transpose() -
                                cloud.points.colwise().minCoeff().transpose();
    Scalar radius = std::max(extent.norm() / Scalar(std::cbrt(double(n)) + 1.0), Scalar(1e-12));
    while (true) {
      const std::vector<int> hits = tree.radius_search(p, radius);
      for (int idx : hits) {
        if (idx == static_cast<int>(i)) continue;
        const Scalar d = (cloud.points.row(idx).transpose() - p).norm();
        best = std::min(best, d);
      }
      if (best <= radius || hits.size() >= static_cast<size_t>(n)) break;
      radius *= Scalar(2);
    }
    total += best;
  }
  return total / Scalar(n);
}

/// Resolution with the cloud's cache honored; does not mutate the cloud.
template <typename Scalar>
Scalar mesh_resolution(const PointCloud<Scalar>& cloud) {
  return cloud.has_resolution() ? cloud.resolution_mr : compute_mesh_resolution(cloud);
}

template <typename Scalar>
void cache_resolution(PointCloud<Scalar>& cloud) {
  if (!cloud.has_resolution()) {
    cloud.resolution_mr = compute_mesh_resolution(cloud);
  }
}

/// Mean edge length over the unique undirected edges of the mesh.
template <typename Scalar>
Scalar mesh_resolution(const TriangleMesh<Scalar>& mesh) {
  if (mesh.triangle_count() == 0) {
    throw_error(ErrorCode::kInvalidInput, "mesh_resolution: mesh has no triangles");
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(mesh.triangle_count() * 3);
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      int a = mesh.triangles(t, e);
      int b = mesh.triangles(t, (e + 1) % 3);
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Scalar total = Scalar(0);
  for (const auto& [a, b] : edges) {
    total += (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
  }
  return total / Scalar(edges.size());
}

/// Indices of points with distance <= r from `center`, ascending.
template <typename Scalar>
std::vector<int> radius_neighbors(const KdTree3<Scalar>& tree, const Vec3<Scalar>& center,
                                  Scalar r) {
  if (!(r > Scalar(0))) {
    throw_error(ErrorCode::kInvalidInput, "radius_neighbors: radius must be positive");
  }
  return tree.radius_search(center, r);
}

template <typename Scalar>
std::vector<int> radius_neighbors(const PointCloud<Scalar>& cloud, const Vec3<Scalar>& center,
                                  Scalar r) {
  return radius_neighbors(KdTree3<Scalar>(cloud.points), center, r);
}

template <typename Scalar>
LocalPatch<Scalar> extract_patch(const PointCloud<Scalar>& cloud, const KdTree3<Scalar>& tree,
                                 int keypoint_index, Scalar r) {
  if (keypoint_index < 0 || keypoint_index >= cloud.size()) {
    throw_error(ErrorCode::kInvalidInput, "extract_patch: keypoint index out of range");
  }
  const Vec3<Scalar> keypoint = cloud.points.row(keypoint_index).transpose();
  const std::vector<int> hits = radius_neighbors(tree, keypoint, r);
  LocalPatch<Scalar> patch;
  patch.keypoint = keypoint;
  patch.radius = r;
  patch.neighbors.resize(static_cast<Eigen::Index>(hits.size()) - (hits.empty() ? 0 : 1), 3);
  Eigen::Index row = 0;
  for (int idx : hits) {
    if (idx == keypoint_index) continue;
    if (row >= patch.neighbors.rows()) {
      patch.neighbors.conservativeResize(row + 1, 3);
    }
    patch.neighbors.row(row++) = cloud.points.row(idx);
  }
  patch.neighbors.conservativeResize(row, 3);
  if (row == 0) {
    throw_error(ErrorCode::kEmptyPatch, "extract_patch: no neighbors within radius");
  }
  return patch;
}

template <typename Scalar>
LocalPatch<Scalar> extract_patch(const PointCloud<Scalar>& cloud, int keypoint_index, Scalar r) {
  return extract_patch(cloud, KdTree3<Scalar>(cloud.points), keypoint_index, r);
}

/// Uniform random n-subset of the neighbors (deterministic per seed); patches
/// with <= n neighbors pass through unchanged. Selected rows keep their
/// original relative order.
template <typename Scalar>
LocalPatch<Scalar> subsample_patch(const LocalPatch<Scalar>& patch, int n, uint64_t seed) {
  if (n < 3) {
    throw_error(ErrorCode::kInvalidInput, "subsample_patch: n must be >= 3");
  }
  const int k = static_cast<int>(patch.size());
  if (k <= n) {
    return patch;
  }
  std::vector<int> indices(k);
  std::iota(indices.begin(), indices.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> pick(i, k - 1);
    std::swap(indices[i], indices[pick(rng)]);
  }
  indices.resize(n);
  std::sort(indices.begin(), indices.end());
  LocalPatch<Scalar> out;
  out.keypoint = patch.keypoint;
  out.radius = patch.radius;
  out.neighbors.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    out.neighbors.row(i) = patch.neighbors.row(indices[i]);
  }
  return out;
}

namespace detail {

/// Row order sorted lexicographically by (x, y, z). Accumulating in this order
/// makes results independent of the caller's neighbor ordering.
template <typename Scalar>
std::vector<int> coordinate_order(const PointMatrix<Scalar>& pts) {
  std::vector<int> order(static_cast<size_t>(pts.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (pts(a, 0) != pts(b, 0)) return pts(a, 0) < pts(b, 0);
    if (pts(a, 1) != pts(b, 1)) return pts(a, 1) < pts(b, 1);
    return pts(a, 2) < pts(b, 2);
  });
  return order;
}

/// Eigen-decomposition of a symmetric 3x3 with eigenvalues sorted descending.
template <typename Scalar>
void sorted_eigen(const Mat3<Scalar>& m, Vec3<Scalar>& eigenvalues, Mat3<Scalar>& eigenvectors) {
  Eigen::SelfAdjointEigenSolver<Mat3<Scalar>> solver(m);
  if (solver.info() != Eigen::Success) {
    throw_error(ErrorCode::kDegenerateGeometry, "eigen-decomposition failed");
  }
  // SelfAdjointEigenSolver sorts ascending; reverse.
  for (int i = 0; i < 3; ++i) {
    eigenvalues[i] = solver.eigenvalues()[2 - i];
    eigenvectors.col(i) = solver.eigenvectors().col(2 - i);
  }
}

}  // namespace detail

/// Unit normal of the patch surface, from a plane fit over the points within
/// `subset_fraction * radius` of the keypoint (falling back to the whole patch
/// below 5 points). The sign makes the summed projection of subset offsets
/// onto the normal non-positive.
template <typename Scalar>
Vec3<Scalar> estimate_normal(const LocalPatch<Scalar>& patch, const Vec3<Scalar>& keypoint,
                             Scalar subset_fraction = Scalar(1) / Scalar(3)) {
  if (patch.size() == 0) {
    throw_error(ErrorCode::kEmptyPatch, "estimate_normal: empty patch");
  }
  const Scalar subset_radius = patch.radius * subset_fraction;
  std::vector<int> subset;
  for (Eigen::Index i = 0; i < patch.size(); ++i) {
    if ((patch.neighbors.row(i).transpose() - keypoint).norm() <= subset_radius) {
      subset.push_back(static_cast<int>(i));
    }
  }
  if (subset.size() < 5) {
    subset.resize(static_cast<size_t>(patch.size()));
    std::iota(subset.begin(), subset.end(), 0);
  }
  if (subset.size() < 3) {
    throw_error(ErrorCode::kDegenerateGeometry, "estimate_normal: fewer than 3 points");
  }

  PointMatrix<Scalar> pts(static_cast<Eigen::Index>(subset.size()), 3);
  for (size_t i = 0; i < subset.size(); ++i) {
    pts.row(static_cast<Eigen::Index>(i)) = patch.neighbors.row(subset[i]);
  }
  const std::vector<int> order = detail::coordinate_order(pts);

  Vec3<Scalar> centroid = Vec3<Scalar>::Zero();
  for (int idx : order) {
    centroid += pts.row(idx).transpose();
  }
  centroid /= Scalar(order.size());

  Mat3<Scalar> cov = Mat3<Scalar>::Zero();
  for (int idx : order) {
    const Vec3<Scalar> d = pts.row(idx).transpose() - centroid;
    cov += d * d.transpose();
  }
  cov /= Scalar(order.size());

  Vec3<Scalar> eigenvalues;
  Mat3<Scalar> eigenvectors;
  detail::sorted_eigen(cov, eigenvalues, eigenvectors);
  const Scalar scale = eigenvalues[0];
  if (scale <= Scalar(0) || eigenvalues[1] <= scale * Scalar(1e-12)) {
    throw_error(ErrorCode::kDegenerateGeometry,
                "estimate_normal: coincident or collinear subset");
  }
  Vec3<Scalar> normal = eigenvectors.col(2);

  Scalar projection_sum = Scalar(0);
  for (int idx : order) {
    projection_sum += (pts.row(idx).transpose() - keypoint).dot(normal);
  }
  if (projection_sum > Scalar(0)) {
    normal = -normal;
  }
  return normal;
}

template <typename Scalar>
PointCloud<Scalar> apply_transform(const PointCloud<Scalar>& cloud,
                                   const RigidTransform<Scalar>& t) {
  PointCloud<Scalar> out;
  out.points = (cloud.points * t.rotation.transpose()).rowwise() + t.translation.transpose();
  if (cloud.has_normals()) {
    out.normals = cloud.normals * t.rotation.transpose();
  }
  out.resolution_mr = cloud.resolution_mr;  // rigid motion preserves spacing
  return out;
}

template <typename Scalar>
LocalPatch<Scalar> apply_transform(const LocalPatch<Scalar>& patch,
                                   const RigidTransform<Scalar>& t) {
  LocalPatch<Scalar> out;
  out.keypoint = t(patch.keypoint);
  out.neighbors = (patch.neighbors * t.rotation.transpose()).rowwise() + t.translation.transpose();
  out.radius = patch.radius;
  return out;
}

/// I.i.d. zero-mean Gaussian displacement of sigma_mr * resolution per
/// coordinate. Normals are invalidated; the cached resolution carries over so
/// later perturbations stay in the source cloud's unit.
template <typename Scalar>
PointCloud<Scalar> add_gaussian_noise(const PointCloud<Scalar>& cloud, Scalar sigma_mr,
                                      uint64_t seed) {
  if (sigma_mr < Scalar(0)) {
    throw_error(ErrorCode::kInvalidInput, "add_gaussian_noise: sigma must be non-negative");
  }
  PointCloud<Scalar> out;
  out.resolution_mr = mesh_resolution(cloud);
  if (sigma_mr == Scalar(0)) {
    out.points = cloud.points;
    out.normals = cloud.normals;
    return out;
  }
  const Scalar sigma = sigma_mr * out.resolution_mr;
  Rng rng(seed);
  std::normal_distribution<Scalar> gauss(Scalar(0), sigma);
  out.points = cloud.points;
  for (Eigen::Index i = 0; i < out.points.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      out.points(i, c) += gauss(rng);
    }
  }
  return out;
}

/// Uniform random subset of ceil(keep_fraction * n) points, deterministic per
/// seed. Normals follow their points; the resolution cache is invalidated.
template <typename Scalar>
PointCloud<Scalar> decimate(const PointCloud<Scalar>& cloud, Scalar keep_fraction, uint64_t seed) {
  if (!(keep_fraction > Scalar(0)) || keep_fraction > Scalar(1)) {
    throw_error(ErrorCode::kInvalidInput, "decimate: keep_fraction must be in (0, 1]");
  }
  if (keep_fraction == Scalar(1)) {
    return cloud;
  }
  const int n = static_cast<int>(cloud.size());
  const int keep = static_cast<int>(std::ceil(double(keep_fraction) * double(n)));
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < keep; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(indices[i], indices[pick(rng)]);
  }
  indices.resize(keep);
  std::sort(indices.begin(), indices.end());
  PointCloud<Scalar> out;
  out.points.resize(keep, 3);
  const bool normals = cloud.has_normals();
  if (normals) out.normals.resize(keep, 3);
  for (int i = 0; i < keep; ++i) {
    out.points.row(i) = cloud.points.row(indices[i]);
    if (normals) out.normals.row(i) = cloud.normals.row(indices[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic surfaces
// ---------------------------------------------------------------------------

enum class SurfaceKind { kPlaneWithBumps, kRidge, kHemisphere, kRandomSmooth };

inline const char* surface_kind_name(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::kPlaneWithBumps: return "plane-with-bumps";
    case SurfaceKind::kRidge: return "ridge";
    case SurfaceKind::kHemisphere: return "hemisphere";
    case SurfaceKind::kRandomSmooth: return "random-smooth";
  }
  return "unknown";
}

inline SurfaceKind surface_kind_from_name(const std::string& name) {
  if (name == "plane-with-bumps") return SurfaceKind::kPlaneWithBumps;
  if (name == "ridge") return SurfaceKind::kRidge;
  if (name == "hemisphere") return SurfaceKind::kHemisphere;
  if (name == "random-smooth") return SurfaceKind::kRandomSmooth;
  throw_error(ErrorCode::kConfig, "unknown surface kind: " + name +
                                      " (valid: plane-with-bumps, ridge, hemisphere, "
                                      "random-smooth)");
}

namespace detail {

struct Bump {
  double cx, cy, sigma, amplitude;
};

/// Fixed asymmetric bump layout; `bumps` selects a prefix.
inline const std::vector<Bump>& bump_layout() {
  static const std::vector<Bump> layout = {
      {0.22, 0.14, 0.085, 0.14},  {-0.27, 0.20, 0.110, -0.10}, {-0.08, -0.26, 0.070, 0.12},
      {0.30, -0.18, 0.095, 0.09}, {0.02, 0.33, 0.060, -0.07},  {-0.31, -0.05, 0.080, 0.11},
  };
  return layout;
}

/// Smooth-field coefficients for the random-smooth surface, seeded.
struct SmoothField {
  std::vector<double> amp, wx, wy, px, py;

  explicit SmoothField(uint64_t seed) {
    Rng rng(derive_seed(seed, 7));
    std::uniform_real_distribution<double> amp_d(0.03, 0.09);
    std::uniform_real_distribution<double> freq_d(2.5, 10.0);
    std::uniform_real_distribution<double> phase_d(0.0, 6.2831853071795864769);
    for (int k = 0; k < 5; ++k) {
      amp.push_back(amp_d(rng));
      wx.push_back(freq_d(rng));
      wy.push_back(freq_d(rng));
      px.push_back(phase_d(rng));
      py.push_back(phase_d(rng));
    }
  }

  double height(double x, double y) const {
    double z = 0.0;
    for (size_t k = 0; k < amp.size(); ++k) {
      z += amp[k] * std::sin(wx[k] * x + px[k]) * std::sin(wy[k] * y + py[k]);
    }
    return z;
  }
};

inline double heightfield(SurfaceKind kind, double x, double y, int bumps,
                          const SmoothField* field) {
  switch (kind) {
    case SurfaceKind::kPlaneWithBumps: {
      double z = 0.0;
      const auto& layout = bump_layout();
      const int count = std::min<int>(bumps, static_cast<int>(layout.size()));
      for (int k = 0; k < count; ++k) {
        const Bump& b = layout[k];
        const double dx = x - b.cx;
        const double dy = y - b.cy;
        z += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
      }
      return z;
    }
    case SurfaceKind::kRidge: {
      const double crest = 0.08 * std::sin(2.5 * y);
      const double dx = x - crest;
      return 0.22 * std::exp(-dx * dx / (2.0 * 0.13 * 0.13)) * (0.75 + 0.45 * y) +
             0.05 * y * y + 0.03 * x;
    }
    case SurfaceKind::kRandomSmooth:
      return field->height(x, y);
    case SurfaceKind::kHemisphere:
      break;
  }
  throw_error(ErrorCode::kInvalidInput, "heightfield: kind has no height function");
}

}  // namespace detail

/// Deterministic-per-seed sampling of an analytic surface with unit bounding
/// extent. Heightfield kinds sample (x, y) uniformly over [-1/2, 1/2]^2; the
/// hemisphere samples uniformly by area on the radius-1/2 upper half sphere.
template <typename Scalar = double>
PointCloud<Scalar> synth_surface(SurfaceKind kind, int n, uint64_t seed, int bumps = 6) {
  if (n < 100) {
    throw_error(ErrorCode::kInvalidInput, "synth_surface: need n >= 100");
  }
  PointCloud<Scalar> cloud;
  cloud.points.resize(n, 3);
  Rng rng(derive_seed(seed, 1));
  if (kind == SurfaceKind::kHemisphere) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 6.2831853071795864769);
    for (int i = 0; i < n; ++i) {
      const double cos_theta = u01(rng);  // uniform area on the upper hemisphere
      const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
      const double phi = angle(rng);
      cloud.points(i, 0) = Scalar(0.5 * sin_theta * std::cos(phi));
      cloud.points(i, 1) = Scalar(0.5 * sin_theta * std::sin(phi));
      cloud.points(i, 2) = Scalar(0.5 * cos_theta);
    }
    return cloud;
  }
  const detail::SmoothField field(seed);
  std::uniform_real_distribution<double> xy(-0.5, 0.5);
  for (int i = 0; i < n; ++i) {
    const double x = xy(rng);
    const double y = xy(rng);
    cloud.points(i, 0) = Scalar(x);
    cloud.points(i, 1) = Scalar(y);
    cloud.points(i, 2) = Scalar(detail::heightfield(kind, x, y, bumps, &field));
  }
  return cloud;
}

/// Triangulated counterpart of synth_surface on a regular grid (heightfield
/// kinds) or a polar grid (hemisphere, with degenerate pole triangles
/// dropped).
template <typename Scalar = double>
TriangleMesh<Scalar> synth_surface_mesh(SurfaceKind kind, int grid, uint64_t seed, int bumps = 6) {
  if (grid < 2) {
    throw_error(ErrorCode::kInvalidInput, "synth_surface_mesh: need grid >= 2");
  }
  TriangleMesh<Scalar> mesh;
  const detail::SmoothField field(seed);
  std::vector<std::array<int, 3>> tris;

  if (kind == SurfaceKind::kHemisphere) {
    // Rings of constant polar angle; the apex is a single vertex.
    mesh.vertices.resize(1 + grid * grid, 3);
    mesh.vertices.row(0) << Scalar(0), Scalar(0), Scalar(0.5);
    for (int i = 1; i <= grid; ++i) {
      const double theta = 1.5707963267948966 * double(i) / double(grid);
      for (int j = 0; j < grid; ++j) {
        const double phi = 6.2831853071795864769 * double(j) / double(grid);
        const Eigen::Index v = 1 + (i - 1) * grid + j;
        mesh.vertices(v, 0) = Scalar(0.5 * std::sin(theta) * std::cos(phi));
        mesh.vertices(v, 1) = Scalar(0.5 * std::sin(theta) * std::sin(phi));
        mesh.vertices(v, 2) = Scalar(0.5 * std::cos(theta));
      }
    }
    for (int j = 0; j < grid; ++j) {
      tris.push_back({0, 1 + j, 1 + (j + 1) % grid});
    }
    for (int i = 1; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        const int a = 1 + (i - 1) * grid + j;
        const int b = 1 + (i - 1) * grid + (j + 1) % grid;
        const int c = 1 + i * grid + j;
        const int d = 1 + i * grid + (j + 1) % grid;
        tris.push_back({a, c, d});
        tris.push_back({a, d, b});
      }
    }
  } else {
    mesh.vertices.resize(grid * grid, 3);
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        const double x = -0.5 + double(j) / double(grid - 1);
        const double y = -0.5 + double(i) / double(grid - 1);
        const Eigen::Index v = i * grid + j;
        mesh.vertices(v, 0) = Scalar(x);
        mesh.vertices(v, 1) = Scalar(y);
        mesh.vertices(v, 2) = Scalar(detail::heightfield(kind, x, y, bumps, &field));
      }
    }
    for (int i = 0; i + 1 < grid; ++i) {
      for (int j = 0; j + 1 < grid; ++j) {
        const int a = i * grid + j;
        const int b = i * grid + j + 1;
        const int c = (i + 1) * grid + j;
        const int d = (i + 1) * grid + j + 1;
        tris.push_back({a, b, c});
        tris.push_back({b, d, c});
      }
    }
  }

  // Drop zero-area triangles (hemisphere apex ring duplicates).
  mesh.triangles.resize(static_cast<Eigen::Index>(tris.size()), 3);
  Eigen::Index count = 0;
  for (const auto& t : tris) {
    const Vec3<Scalar> e1 =
        mesh.vertices.row(t[1]).transpose() - mesh.vertices.row(t[0]).transpose();
    const Vec3<Scalar> e2 =
        mesh.vertices.row(t[2]).transpose() - mesh.vertices.row(t[0]).transpose();
    if (e1.cross(e2).squaredNorm() > Scalar(0)) {
      mesh.triangles.row(count++) << t[0], t[1], t[2];
    }
  }
  mesh.triangles.conservativeResize(count, 3);
  return mesh;
}

}  // namespace lrfkit

#endif  // LRFKIT_GEOMETRY_HPP_
