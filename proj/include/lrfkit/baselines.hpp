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

#ifndef LRFKIT_BASELINES_HPP_
#define LRFKIT_BASELINES_HPP_

#include <vector>

#include "lrfkit/geometry.hpp"
#include "lrfkit/types.hpp"

namespace lrfkit {

namespace detail {

/// Degenerate when the covariance is rank deficient or an eigen-gap vanishes
/// (an isotropic or axially symmetric neighborhood has no unique frame).
template <typename Scalar>
void check_eigen_gaps(const Vec3<Scalar>& eigenvalues) {
  const Scalar scale = eigenvalues[0];
  if (!(scale > Scalar(0)) || eigenvalues[2] <= scale * Scalar(1e-9) ||
      eigenvalues[0] - eigenvalues[1] <= scale * Scalar(1e-9) ||
      eigenvalues[1] - eigenvalues[2] <= scale * Scalar(1e-9)) {
    throw_error(ErrorCode::kDegenerateGeometry,
                "covariance eigenvalues do not determine a unique frame");
  }
}

/// Unweighted neighbor covariance about the keypoint, normalized by the
/// neighbor count.
template <typename Scalar>
Mat3<Scalar> mian_covariance(const LocalPatch<Scalar>& patch, const Vec3<Scalar>& keypoint) {
  const std::vector<int> order = coordinate_order(patch.neighbors);
  Mat3<Scalar> cov = Mat3<Scalar>::Zero();
  for (int idx : order) {
    const Vec3<Scalar> d = patch.neighbors.row(idx).transpose() - keypoint;
    cov += d * d.transpose();
  }
  return cov / Scalar(patch.size());
}

/// Distance-weighted covariance with weights radius − ||q − p||, normalized
/// by the weight sum. A vanishing weight sum is degenerate.
template <typename Scalar>
Mat3<Scalar> shot_covariance(const LocalPatch<Scalar>& patch, const Vec3<Scalar>& keypoint) {
  const Scalar radius = patch.radius;
  const std::vector<int> order = coordinate_order(patch.neighbors);
  Scalar weight_sum = Scalar(0);
  Mat3<Scalar> cov = Mat3<Scalar>::Zero();
  for (int idx : order) {
    const Vec3<Scalar> d = patch.neighbors.row(idx).transpose() - keypoint;
    const Scalar w = radius - d.norm();
    weight_sum += w;
    cov += w * (d * d.transpose());
  }
  if (weight_sum <= Scalar(1e-12) * radius) {
    throw_error(ErrorCode::kDegenerateGeometry, "lrf_shot: vanishing weight sum");
  }
  return cov / weight_sum;
}

/// Triangles whose centroid lies within r of the keypoint, plus the sum of
/// their cross-product norms (twice the total area).
template <typename Scalar>
struct RopsSupport {
  std::vector<Eigen::Index> triangles;
  Scalar total_cross = Scalar(0);
};

template <typename Scalar>
RopsSupport<Scalar> rops_support(const TriangleMesh<Scalar>& mesh, const Vec3<Scalar>& keypoint,
                                 Scalar r) {
  RopsSupport<Scalar> support;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3<Scalar> a = mesh.vertices.row(mesh.triangles(t, 0)).transpose();
    const Vec3<Scalar> b = mesh.vertices.row(mesh.triangles(t, 1)).transpose();
    const Vec3<Scalar> c = mesh.vertices.row(mesh.triangles(t, 2)).transpose();
    const Vec3<Scalar> centroid = (a + b + c) / Scalar(3);
    if ((centroid - keypoint).norm() <= r) {
      support.triangles.push_back(t);
      support.total_cross += (b - a).cross(c - a).norm();
    }
  }
  if (support.triangles.empty()) {
    throw_error(ErrorCode::kEmptyPatch, "lrf_rops: no triangle centroid within radius");
  }
  if (support.total_cross <= Scalar(0)) {
    throw_error(ErrorCode::kDegenerateGeometry, "lrf_rops: zero total triangle area");
  }
  return support;
}

/// Covariance of one triangle's vertices about the keypoint: the outer
/// product of the offset sum plus the per-vertex outer products, over 12.
template <typename Scalar>
Mat3<Scalar> rops_triangle_covariance(const Vec3<Scalar>& d0, const Vec3<Scalar>& d1,
                                      const Vec3<Scalar>& d2) {
  const Vec3<Scalar> sum = d0 + d1 + d2;
  Mat3<Scalar> c_tri = sum * sum.transpose();
  c_tri += d0 * d0.transpose() + d1 * d1.transpose() + d2 * d2.transpose();
  return c_tri / Scalar(12);
}

/// Aggregated triangle covariance with area weights (cross norm over total)
/// and distance weights (r − centroid distance)².
template <typename Scalar>
Mat3<Scalar> rops_covariance(const TriangleMesh<Scalar>& mesh, const Vec3<Scalar>& keypoint,
                             Scalar r, const RopsSupport<Scalar>& support) {
  Mat3<Scalar> cov = Mat3<Scalar>::Zero();
  for (Eigen::Index t : support.triangles) {
    const Vec3<Scalar> d0 = mesh.vertices.row(mesh.triangles(t, 0)).transpose() - keypoint;
    const Vec3<Scalar> d1 = mesh.vertices.row(mesh.triangles(t, 1)).transpose() - keypoint;
    const Vec3<Scalar> d2 = mesh.vertices.row(mesh.triangles(t, 2)).transpose() - keypoint;

    const Vec3<Scalar> v1 = d1 - d0;
    const Vec3<Scalar> v2 = d2 - d0;
    const Scalar w1 = v1.cross(v2).norm() / support.total_cross;
    const Scalar centroid_dist = ((d0 + d1 + d2) / Scalar(3)).norm();
    const Scalar w2 = (r - centroid_dist) * (r - centroid_dist);
    cov += w1 * w2 * rops_triangle_covariance(d0, d1, d2);
  }
  return cov;
}

/// Tangent-plane weighted vector sum with weights
/// (r − d)² · ((q − p) · z)², accumulated in canonical coordinate order.
template <typename Scalar>
Vec3<Scalar> toldi_weighted_sum(const LocalPatch<Scalar>& patch, const Vec3<Scalar>& keypoint,
                                const Vec3<Scalar>& z) {
  const Scalar r = patch.radius;
  const std::vector<int> order = coordinate_order(patch.neighbors);
  Vec3<Scalar> sum = Vec3<Scalar>::Zero();
  for (int idx : order) {
    const Vec3<Scalar> d = patch.neighbors.row(idx).transpose() - keypoint;
    const Scalar dist = d.norm();
    const Scalar w1 = (r - dist) * (r - dist);
    const Scalar depth = d.dot(z);
    const Scalar w2 = depth * depth;
    const Vec3<Scalar> v = d - depth * z;
    sum += (w1 * w2) * v;
  }
  return sum;
}

}  // namespace detail

/// Covariance-eigenvector frame about the keypoint. The z-axis (smallest
/// eigenvalue) is oriented along the given normal; the x-axis keeps the
/// solver's sign and therefore carries a documented sign ambiguity.
template <typename Scalar>
Lrf<Scalar> lrf_mian(const LocalPatch<Scalar>& patch, const Vec3<Scalar>& keypoint,
                     const Vec3<Scalar>& normal) {
  if (patch.size() == 0) {
    throw_error(ErrorCode::kEmptyPatch, "lrf_mian: empty patch");
  }
  const Mat3<Scalar> cov = detail::mian_covariance(patch, keypoint);

  Vec3<Scalar> eigenvalues;
  Mat3<Scalar> eigenvectors;
  detail::sorted_eigen(cov, eigenvalues, eigenvectors);
  detail::check_eigen_gaps(eigenvalues);

  Vec3<Scalar> x = eigenvectors.col(0);
  Vec3<Scalar> z = eigenvectors.col(2);
  if (z.dot(normal) < Scalar(0)) {
    z = -z;
  }
  Lrf<Scalar> frame;
  frame.axes.col(0) = x;
  frame.axes.col(2) = z;
  frame.axes.col(1) = z.cross(x);
  return frame;
}

/// Distance-weighted covariance frame: x from the largest eigenvalue, z from
/// the smallest, each flipped toward the majority of the neighbor offsets,
/// y = z × x. Before counting, each axis is oriented along the neighbors'
/// summed offset, so an exactly tied count resolves to a data-determined
/// orientation and the eigen-solver's arbitrary sign never reaches the frame.
template <typename Scalar>
Lrf<Scalar> lrf_shot(const LocalPatch<Scalar>& patch, const Vec3<Scalar>& keypoint) {
  if (patch.size() == 0) {
    throw_error(ErrorCode::kEmptyPatch, "lrf_shot: empty patch");
  }
  const Mat3<Scalar> cov = detail::shot_covariance(patch, keypoint);

  Vec3<Scalar> eigenvalues;
  Mat3<Scalar> eigenvectors;
  detail::sorted_eigen(cov, eigenvalues, eigenvectors);
  detail::check_eigen_gaps(eigenvalues);

  Vec3<Scalar> x = eigenvectors.col(0);
  Vec3<Scalar> z = eigenvectors.col(2);
  const std::vector<int> order = detail::coordinate_order(patch.neighbors);
  const auto disambiguate = [&](Vec3<Scalar>& axis) {
    Scalar moment = Scalar(0);
    for (int idx : order) {
      moment += (patch.neighbors.row(idx).transpose() - keypoint).dot(axis);
    }
    if (moment < Scalar(0)) {
      axis = -axis;
    }
    Eigen::Index with = 0;
    for (Eigen::Index i = 0; i < patch.size(); ++i) {
      const Vec3<Scalar> d = patch.neighbors.row(i).transpose() - keypoint;
      if (d.dot(axis) >= Scalar(0)) ++with;
    }
    if (Scalar(2) * Scalar(with) < Scalar(patch.size())) {
      axis = -axis;
    }
  };
  disambiguate(x);
  disambiguate(z);

  Lrf<Scalar> frame;
  frame.axes.col(0) = x;
  frame.axes.col(2) = z;
  frame.axes.col(1) = z.cross(x);
  return frame;
}

/// Triangle-accumulated covariance frame over the mesh triangles whose
/// centroid lies within r of the keypoint; x and z signs are fixed by the
/// weighted mean offset along each axis (a zero offset keeps the sign).
template <typename Scalar>
Lrf<Scalar> lrf_rops(const TriangleMesh<Scalar>& mesh, const Vec3<Scalar>& keypoint, Scalar r) {
  if (!(r > Scalar(0))) {
    throw_error(ErrorCode::kInvalidInput, "lrf_rops: radius must be positive");
  }
  const detail::RopsSupport<Scalar> support = detail::rops_support(mesh, keypoint, r);
  const Mat3<Scalar> cov = detail::rops_covariance(mesh, keypoint, r, support);

  Vec3<Scalar> eigenvalues;
  Mat3<Scalar> eigenvectors;
  detail::sorted_eigen(cov, eigenvalues, eigenvectors);
  detail::check_eigen_gaps(eigenvalues);

  Vec3<Scalar> x = eigenvectors.col(0);
  Vec3<Scalar> z = eigenvectors.col(2);
  const auto disambiguate = [&](Vec3<Scalar>& axis) {
    Scalar h = Scalar(0);
    for (Eigen::Index t : support.triangles) {
      const Vec3<Scalar> d0 = mesh.vertices.row(mesh.triangles(t, 0)).transpose() - keypoint;
      const Vec3<Scalar> d1 = mesh.vertices.row(mesh.triangles(t, 1)).transpose() - keypoint;
      const Vec3<Scalar> d2 = mesh.vertices.row(mesh.triangles(t, 2)).transpose() - keypoint;
      const Scalar w1 = (d1 - d0).cross(d2 - d0).norm() / support.total_cross;
      const Scalar centroid_dist = ((d0 + d1 + d2) / Scalar(3)).norm();
      const Scalar w2 = (r - centroid_dist) * (r - centroid_dist);
      h += w1 * w2 * ((d0 + d1 + d2).dot(axis) / Scalar(6));
    }
    if (h < Scalar(0)) {
      axis = -axis;
    }
  };
  disambiguate(x);
  disambiguate(z);

  Lrf<Scalar> frame;
  frame.axes.col(0) = x;
  frame.axes.col(2) = z;
  frame.axes.col(1) = z.cross(x);
  return frame;
}

/// Normal-anchored frame: z is the given normal; x is the normalized
/// weighted sum of the neighbors' tangent-plane projections with weights
/// (r − d)² · ((q−p)·z)².
template <typename Scalar>
Lrf<Scalar> lrf_toldi(const LocalPatch<Scalar>& patch, const Vec3<Scalar>& keypoint,
                      const Vec3<Scalar>& normal) {
  if (patch.size() == 0) {
    throw_error(ErrorCode::kEmptyPatch, "lrf_toldi: empty patch");
  }
  const Vec3<Scalar> z = normal.normalized();
  const Vec3<Scalar> sum = detail::toldi_weighted_sum(patch, keypoint, z);
  const Scalar norm = sum.norm();
  if (norm <= Scalar(1e-12)) {
    throw_error(ErrorCode::kDegenerateGeometry, "lrf_toldi: vanishing weighted vector sum");
  }
  Lrf<Scalar> frame;
  frame.axes.col(0) = sum / norm;
  frame.axes.col(2) = z;
  frame.axes.col(1) = z.cross(frame.axes.col(0));
  return frame;
}

}  // namespace lrfkit

#endif  // LRFKIT_BASELINES_HPP_
