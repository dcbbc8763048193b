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

#ifndef LRFKIT_LRFNET_HPP_
#define LRFKIT_LRFNET_HPP_

#include <string>
#include <vector>

#include "lrfkit/geometry.hpp"
#include "lrfkit/types.hpp"
#include "lrfkit/weightnet.hpp"

namespace lrfkit {

enum class LrfVariant { kSum1, kSum2, kMax };

inline const char* lrf_variant_name(LrfVariant v) {
  switch (v) {
    case LrfVariant::kSum1: return "sum1";
    case LrfVariant::kSum2: return "sum2";
    case LrfVariant::kMax: return "max";
  }
  return "unknown";
}

inline LrfVariant lrf_variant_from_name(const std::string& name) {
  if (name == "sum1") return LrfVariant::kSum1;
  if (name == "sum2") return LrfVariant::kSum2;
  if (name == "max") return LrfVariant::kMax;
  throw_error(ErrorCode::kConfig, "unknown variant: " + name + " (valid: sum1, sum2, max)");
}

struct LrfNetConfig {
  int n_points = 256;
  double z_subset_fraction = 1.0 / 3.0;
  std::vector<int> hidden_widths = {32, 64, 128, 64, 32};
  uint64_t seed = 0;

  void validate() const {
    if (n_points < 8) {
      throw_error(ErrorCode::kConfig, "LrfNetConfig: n_points must be >= 8");
    }
    if (!(z_subset_fraction > 0.0) || z_subset_fraction > 1.0) {
      throw_error(ErrorCode::kConfig, "LrfNetConfig: z_subset_fraction must be in (0, 1]");
    }
  }

  int network_input_width(LrfVariant variant) const {
    return variant == LrfVariant::kSum2 ? 6 : 2;
  }
};

/// Rotation-invariant per-neighbor attributes: column 0 the relative distance
/// ||q - p|| / r in [0,1], column 1 the cosine between the z-axis and q - p
/// in [-1,1]. A neighbor coincident with the keypoint (distance < 1e-12)
/// yields the pair (0, 0) — its projection is the zero vector, so it cannot
/// influence the frame regardless of weight.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 2> compute_attributes(const LocalPatch<Scalar>& patch,
                                                            const Vec3<Scalar>& keypoint,
                                                            const Vec3<Scalar>& z_axis) {
  if (!(patch.radius > Scalar(0))) {
    throw_error(ErrorCode::kInvalidInput, "compute_attributes: radius must be positive");
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> attrs(patch.size(), 2);
  for (Eigen::Index i = 0; i < patch.size(); ++i) {
    const Vec3<Scalar> d = patch.neighbors.row(i).transpose() - keypoint;
    const Scalar dist = d.norm();
    if (dist < Scalar(1e-12)) {
      attrs(i, 0) = Scalar(0);
      attrs(i, 1) = Scalar(0);
    } else {
      attrs(i, 0) = dist / patch.radius;
      attrs(i, 1) = z_axis.dot(d) / dist;
    }
  }
  return attrs;
}

/// v = (q - p) - ((q - p)·z) z; the component of the offset in the tangent
/// plane of z.
template <typename Scalar>
Vec3<Scalar> project_to_tangent(const Vec3<Scalar>& keypoint, const Vec3<Scalar>& neighbor,
                                const Vec3<Scalar>& z_axis) {
  const Vec3<Scalar> d = neighbor - keypoint;
  return d - d.dot(z_axis) * z_axis;
}

/// Tangent-plane projections of all neighbors, one per row.
template <typename Scalar>
PointMatrix<Scalar> tangent_projections(const LocalPatch<Scalar>& patch,
                                        const Vec3<Scalar>& keypoint,
                                        const Vec3<Scalar>& z_axis) {
  PointMatrix<Scalar> v(patch.size(), 3);
  for (Eigen::Index i = 0; i < patch.size(); ++i) {
    v.row(i) =
        project_to_tangent<Scalar>(keypoint, patch.neighbors.row(i).transpose(), z_axis)
            .transpose();
  }
  return v;
}

/// Compensated (Kahan) weighted vector sum, independent of input order well
/// below the 1e-9 assertion used by the property tests.
template <typename Scalar>
Vec3<Scalar> weighted_vector_sum(const PointMatrix<Scalar>& projections,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& weights) {
  if (projections.rows() != weights.size()) {
    throw_error(ErrorCode::kInvalidInput, "weighted_vector_sum: length mismatch");
  }
  Vec3<Scalar> sum = Vec3<Scalar>::Zero();
  Vec3<Scalar> carry = Vec3<Scalar>::Zero();
  for (Eigen::Index i = 0; i < projections.rows(); ++i) {
    const Vec3<Scalar> term =
        (weights[i] * projections.row(i).transpose()).eval() - carry;
    const Vec3<Scalar> next = sum + term;
    carry = (next - sum) - term;
    sum = next;
  }
  return sum;
}

/// Normalized weighted vector sum.
template <typename Scalar>
Vec3<Scalar> weighted_x_axis(const PointMatrix<Scalar>& projections,
                             const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& weights) {
  const Vec3<Scalar> sum = weighted_vector_sum(projections, weights);
  const Scalar norm = sum.norm();
  if (norm <= Scalar(1e-12)) {
    throw_error(ErrorCode::kDegenerateGeometry, "weighted_x_axis: vanishing vector sum");
  }
  return sum / norm;
}

/// The projection carrying the largest weight, normalized; ties resolve to
/// the lowest index.
template <typename Scalar>
Vec3<Scalar> max_weight_x_axis(const PointMatrix<Scalar>& projections,
                               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& weights) {
  if (projections.rows() != weights.size()) {
    throw_error(ErrorCode::kInvalidInput, "max_weight_x_axis: length mismatch");
  }
  if (projections.rows() == 0) {
    throw_error(ErrorCode::kInvalidInput, "max_weight_x_axis: empty input");
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < weights.size(); ++i) {
    if (weights[i] > weights[best]) {
      best = i;
    }
  }
  const Vec3<Scalar> v = projections.row(best).transpose();
  const Scalar norm = v.norm();
  if (norm <= Scalar(1e-12)) {
    throw_error(ErrorCode::kDegenerateGeometry, "max_weight_x_axis: winning projection is zero");
  }
  return v / norm;
}

/// Network input rows for the given variant: the invariant attribute pair for
/// sum1/max, or the keypoint-relative offset concatenated with the z-axis for
/// sum2.
inline Eigen::MatrixXd network_inputs(const LocalPatch<double>& patch, const Vec3d& keypoint,
                                      const Vec3d& z_axis, LrfVariant variant) {
  if (variant == LrfVariant::kSum2) {
    Eigen::MatrixXd in(patch.size(), 6);
    for (Eigen::Index i = 0; i < patch.size(); ++i) {
      in.row(i).head<3>() = (patch.neighbors.row(i).transpose() - keypoint).transpose();
      in.row(i).tail<3>() = z_axis.transpose();
    }
    return in;
  }
  return compute_attributes<double>(patch, keypoint, z_axis);
}

/// Full frame estimation: subsample to cfg.n_points, fit the z-axis on the
/// inner subset, run the weight network, and assemble x per the variant.
inline Lrfd estimate_lrf(const WeightNet& net, const LocalPatch<double>& patch,
                         const Vec3d& keypoint, const LrfNetConfig& cfg,
                         LrfVariant variant = LrfVariant::kSum1) {
  cfg.validate();
  if (net.input_width != cfg.network_input_width(variant)) {
    throw_error(ErrorCode::kConfig, "estimate_lrf: network input width does not match variant");
  }
  const LocalPatch<double> sub = subsample_patch(patch, cfg.n_points, cfg.seed);
  const Vec3d z = estimate_normal(sub, keypoint, cfg.z_subset_fraction);
  const Eigen::MatrixXd inputs = network_inputs(sub, keypoint, z, variant);
  const Eigen::VectorXd weights = net.forward(inputs);
  const PointMatrixd projections = tangent_projections(sub, keypoint, z);
  const Vec3d x = variant == LrfVariant::kMax ? max_weight_x_axis<double>(projections, weights)
                                              : weighted_x_axis<double>(projections, weights);
  Lrfd frame;
  frame.axes.col(0) = x;
  frame.axes.col(2) = z;
  frame.axes.col(1) = z.cross(x);
  return frame;
}

/// Ablation path: identical pipeline with every per-point weight equal
/// (no network).
inline Lrfd estimate_lrf_uniform(const LocalPatch<double>& patch, const Vec3d& keypoint,
                                 const LrfNetConfig& cfg) {
  cfg.validate();
  const LocalPatch<double> sub = subsample_patch(patch, cfg.n_points, cfg.seed);
  const Vec3d z = estimate_normal(sub, keypoint, cfg.z_subset_fraction);
  const PointMatrixd projections = tangent_projections(sub, keypoint, z);
  const Eigen::VectorXd weights = Eigen::VectorXd::Ones(projections.rows());
  const Vec3d x = weighted_x_axis<double>(projections, weights);
  Lrfd frame;
  frame.axes.col(0) = x;
  frame.axes.col(2) = z;
  frame.axes.col(1) = z.cross(x);
  return frame;
}

}  // namespace lrfkit

#endif  // LRFKIT_LRFNET_HPP_
