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

#ifndef LRFKIT_TYPES_HPP_
#define LRFKIT_TYPES_HPP_

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <limits>

#include "lrfkit/error.hpp"

namespace lrfkit {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

/// One point per row.
template <typename Scalar>
using PointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;

using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using PointMatrixd = PointMatrix<double>;

/// Point set with optional per-point unit normals. `resolution_mr` caches the
/// mean nearest-neighbor spacing; NaN until computed.
template <typename Scalar = double>
struct PointCloud {
  PointMatrix<Scalar> points;
  PointMatrix<Scalar> normals{0, 3};
  Scalar resolution_mr = std::numeric_limits<Scalar>::quiet_NaN();

  Eigen::Index size() const { return points.rows(); }
  bool has_normals() const { return normals.rows() == points.rows() && points.rows() > 0; }
  bool has_resolution() const { return std::isfinite(resolution_mr); }
};

template <typename Scalar = double>
struct TriangleMesh {
  PointMatrix<Scalar> vertices;
  Eigen::Matrix<int, Eigen::Dynamic, 3> triangles;

  Eigen::Index vertex_count() const { return vertices.rows(); }
  Eigen::Index triangle_count() const { return triangles.rows(); }
};

using PointCloudd = PointCloud<double>;
using TriangleMeshd = TriangleMesh<double>;

template <typename Scalar = double>
struct RigidTransform {
  Mat3<Scalar> rotation = Mat3<Scalar>::Identity();
  Vec3<Scalar> translation = Vec3<Scalar>::Zero();

  Vec3<Scalar> operator()(const Vec3<Scalar>& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }

  /// Composition: (a * b)(p) == a(b(p)).
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
  }
};

using RigidTransformd = RigidTransform<double>;

template <typename Scalar>
bool is_rotation_matrix(const Mat3<Scalar>& m, Scalar tol = Scalar(1e-6)) {
  const Mat3<Scalar> residual = m.transpose() * m - Mat3<Scalar>::Identity();
  return residual.cwiseAbs().maxCoeff() <= tol && std::abs(m.determinant() - Scalar(1)) <= tol;
}

/// Keypoint plus its radius neighborhood; the keypoint itself is excluded from
/// `neighbors`.
template <typename Scalar = double>
struct LocalPatch {
  Vec3<Scalar> keypoint;
  PointMatrix<Scalar> neighbors;
  Scalar radius = Scalar(0);

  Eigen::Index size() const { return neighbors.rows(); }
};

using LocalPatchd = LocalPatch<double>;

/// Orthonormal right-handed frame; columns of `axes` are x, y, z.
template <typename Scalar = double>
struct Lrf {
  Mat3<Scalar> axes = Mat3<Scalar>::Identity();

  Vec3<Scalar> x() const { return axes.col(0); }
  Vec3<Scalar> y() const { return axes.col(1); }
  Vec3<Scalar> z() const { return axes.col(2); }
};

using Lrfd = Lrf<double>;

/// Builds a frame from an x direction and a z direction. x is re-projected
/// onto the plane orthogonal to z so the invariants hold to machine precision,
/// and y = z x x.
template <typename Scalar>
Lrf<Scalar> make_lrf(const Vec3<Scalar>& x_dir, const Vec3<Scalar>& z_dir) {
  const Scalar zn = z_dir.norm();
  if (zn <= Scalar(1e-12)) {
    throw_error(ErrorCode::kDegenerateGeometry, "make_lrf: z direction has vanishing norm");
  }
  const Vec3<Scalar> z = z_dir / zn;
  Vec3<Scalar> x = x_dir - x_dir.dot(z) * z;
  const Scalar xn = x.norm();
  if (xn <= Scalar(1e-12)) {
    throw_error(ErrorCode::kDegenerateGeometry, "make_lrf: x direction parallel to z");
  }
  x /= xn;
  Lrf<Scalar> frame;
  frame.axes.col(0) = x;
  frame.axes.col(1) = z.cross(x);
  frame.axes.col(2) = z;
  return frame;
}

/// Rotates every axis of the frame: axes transform as directions.
template <typename Scalar>
Lrf<Scalar> rotate_lrf(const Lrf<Scalar>& frame, const Mat3<Scalar>& rotation) {
  Lrf<Scalar> out;
  out.axes = rotation * frame.axes;
  return out;
}

}  // namespace lrfkit

#endif  // LRFKIT_TYPES_HPP_
