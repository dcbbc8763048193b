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

#include "lrfkit/eval.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lrfkit/error.hpp"
#include "lrfkit/geometry.hpp"
#include "lrfkit/kdtree.hpp"
#include "lrfkit/random.hpp"

namespace lrfkit {

double mean_cos(const Lrfd& model_frame, const Lrfd& scene_frame, const RigidTransformd& gt) {
  const Mat3d back = gt.rotation.transpose() * scene_frame.axes;
  const double cos_x = model_frame.x().dot(back.col(0));
  const double cos_z = model_frame.z().dot(back.col(2));
  return 0.5 * (cos_x + cos_z);
}

RepeatabilityResult repeatability_experiment(const PointCloudd& model, const PointCloudd& scene,
                                             const RigidTransformd& model_to_scene,
                                             const LrfFn& model_fn, const LrfFn& scene_fn,
                                             int n_keypoints, double r, uint64_t seed) {
  if (n_keypoints < 1) {
    throw_error(ErrorCode::kInvalidInput, "repeatability_experiment: n_keypoints must be >= 1");
  }
  PointCloudd model_cached = model;
  cache_resolution(model_cached);
  const double mr = model_cached.resolution_mr;
  const KdTree3d model_tree(model_cached.points);
  const KdTree3d scene_tree(scene.points);

  // Uniform keypoint sample without replacement (partial Fisher-Yates).
  const int n = static_cast<int>(model_cached.size());
  const int wanted = std::min(n_keypoints, n);
  std::vector<int> indices(static_cast<size_t>(n));
  std::iota(indices.begin(), indices.end(), 0);
  Rng rng(derive_seed(seed, 0xE001));
  for (int i = 0; i < wanted; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(indices[static_cast<size_t>(i)], indices[static_cast<size_t>(pick(rng))]);
  }

  RepeatabilityResult result;
  double total = 0.0;
  for (int k = 0; k < wanted; ++k) {
    const int model_index = indices[static_cast<size_t>(k)];
    const Vec3d model_keypoint = model_cached.points.row(model_index).transpose();
    double scene_sq = 0.0;
    const int scene_index = scene_tree.nearest(model_to_scene(model_keypoint), &scene_sq);
    if (std::sqrt(scene_sq) > mr) {
      continue;  // keypoint outside the overlap
    }
    const Vec3d scene_keypoint = scene.points.row(scene_index).transpose();
    try {
      const LocalPatchd model_patch = extract_patch(model_cached, model_tree, model_index, r);
      const LocalPatchd scene_patch = extract_patch(scene, scene_tree, scene_index, r);
      const Lrfd lm = model_fn(model_patch, model_keypoint);
      const Lrfd ls = scene_fn(scene_patch, scene_keypoint);
      total += mean_cos(lm, ls, model_to_scene);
      ++result.n_valid;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kDegenerateGeometry || e.code() == ErrorCode::kEmptyPatch) {
        ++result.n_degenerate;
        continue;
      }
      throw;
    }
  }
  if (result.n_valid == 0) {
    throw_error(ErrorCode::kInsufficientData, "repeatability_experiment: no valid keypoints");
  }
  result.mean_meancos = total / double(result.n_valid);
  return result;
}

Eigen::VectorXd simple_descriptor(const LocalPatchd& patch, const Vec3d& keypoint,
                                  const Lrfd& frame, int bins) {
  if (bins < 2) {
    throw_error(ErrorCode::kInvalidInput, "simple_descriptor: bins must be >= 2");
  }
  if (patch.size() == 0) {
    throw_error(ErrorCode::kEmptyPatch, "simple_descriptor: empty patch");
  }
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(Eigen::Index(bins) * bins * bins);
  const auto bin_of = [bins](double v) {
    const int b = static_cast<int>(std::floor((v + 1.0) * 0.5 * bins));
    return std::clamp(b, 0, bins - 1);
  };
  for (Eigen::Index i = 0; i < patch.size(); ++i) {
    const Vec3d local =
        frame.axes.transpose() * (patch.neighbors.row(i).transpose() - keypoint) / patch.radius;
    const int ix = bin_of(local.x());
    const int iy = bin_of(local.y());
    const int iz = bin_of(local.z());
    hist[(Eigen::Index(ix) * bins + iy) * bins + iz] += 1.0;
  }
  hist /= double(patch.size());
  return hist;
}

std::vector<RpcPoint> rpc_curve(const std::vector<Eigen::VectorXd>& model_descriptors,
                                const std::vector<Eigen::VectorXd>& scene_descriptors,
                                const std::vector<std::pair<int, int>>& ground_truth_matches,
                                const std::vector<double>& thresholds) {
  if (model_descriptors.empty() || scene_descriptors.empty()) {
    throw_error(ErrorCode::kInvalidInput, "rpc_curve: empty descriptor set");
  }
  if (ground_truth_matches.empty()) {
    throw_error(ErrorCode::kInsufficientData, "rpc_curve: no ground-truth correspondences");
  }

  // Nearest and second-nearest scene descriptor per model descriptor.
  struct Candidate {
    int scene_index = -1;
    double ratio = std::numeric_limits<double>::infinity();
  };
  std::vector<Candidate> candidates(model_descriptors.size());
  for (size_t i = 0; i < model_descriptors.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    int best_j = -1;
    for (size_t j = 0; j < scene_descriptors.size(); ++j) {
      const double d = (model_descriptors[i] - scene_descriptors[j]).norm();
      if (d < best) {
        second = best;
        best = d;
        best_j = static_cast<int>(j);
      } else if (d < second) {
        second = d;
      }
    }
    candidates[i].scene_index = best_j;
    if (scene_descriptors.size() == 1) {
      candidates[i].ratio = 0.0;  // no second neighbor; always passes
    } else if (second > 0.0) {
      candidates[i].ratio = best / second;
    } else {
      candidates[i].ratio = 1.0;  // both distances zero
    }
  }

  const auto is_true_match = [&](int model_index, int scene_index) {
    for (const auto& [gm, gs] : ground_truth_matches) {
      if (gm == model_index && gs == scene_index) return true;
    }
    return false;
  };

  std::vector<RpcPoint> curve;
  curve.reserve(thresholds.size());
  for (double threshold : thresholds) {
    int n_match = 0;
    int n_true = 0;
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i].ratio <= threshold) {
        ++n_match;
        if (is_true_match(static_cast<int>(i), candidates[i].scene_index)) {
          ++n_true;
        }
      }
    }
    RpcPoint point;
    point.threshold = threshold;
    point.recall = double(n_true) / double(ground_truth_matches.size());
    point.one_minus_precision =
        n_match > 0 ? double(n_match - n_true) / double(n_match) : 0.0;
    curve.push_back(point);
  }
  return curve;
}

namespace {

/// Least-squares rigid transform mapping the `source` rows onto the `target`
/// rows (standard SVD absolute orientation with reflection correction).
RigidTransformd absolute_orientation(const PointMatrixd& source, const PointMatrixd& target) {
  const Vec3d source_centroid = source.colwise().mean().transpose();
  const Vec3d target_centroid = target.colwise().mean().transpose();
  const PointMatrixd src = source.rowwise() - source_centroid.transpose();
  const PointMatrixd tgt = target.rowwise() - target_centroid.transpose();
  const Mat3d cross = tgt.transpose() * src;
  Eigen::JacobiSVD<Mat3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3d rotation = svd.matrixU() * svd.matrixV().transpose();
  if (rotation.determinant() < 0.0) {
    Mat3d flip = Mat3d::Identity();
    flip(2, 2) = -1.0;
    rotation = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  RigidTransformd t;
  t.rotation = rotation;
  t.translation = target_centroid - rotation * source_centroid;
  return t;
}

double rotation_error_deg(const Mat3d& estimate, const Mat3d& truth) {
  const Mat3d residual = truth * estimate.transpose();
  const double c = std::clamp(0.5 * (residual.trace() - 1.0), -1.0, 1.0);
  return std::acos(c) * 180.0 / 3.14159265358979323846;
}

struct Hypothesis {
  RigidTransformd transform;
  int inliers = -1;
  int iteration = 0;
};

int count_inliers(const std::vector<Correspondence>& correspondences,
                  const PointMatrixd& model_keypoints, const PointMatrixd& scene_keypoints,
                  const RigidTransformd& pose, double radius) {
  int inliers = 0;
  for (const Correspondence& c : correspondences) {
    const Vec3d mapped = pose(scene_keypoints.row(c.scene_index).transpose());
    if ((mapped - model_keypoints.row(c.model_index).transpose()).norm() <= radius) {
      ++inliers;
    }
  }
  return inliers;
}

PoseEstimate finalize_pose(const std::vector<Correspondence>& correspondences,
                           const PointMatrixd& model_keypoints,
                           const PointMatrixd& scene_keypoints, const Hypothesis& best,
                           double radius, double mr, const RigidTransformd& gt) {
  if (best.inliers < 1) {
    throw_error(ErrorCode::kPoseFailure, "ransac: no hypothesis gathered any inliers");
  }
  RigidTransformd pose = best.transform;
  // Refit over the best hypothesis's inlier correspondences when possible.
  std::vector<int> inlier_rows;
  for (size_t k = 0; k < correspondences.size(); ++k) {
    const Correspondence& c = correspondences[k];
    const Vec3d mapped = pose(scene_keypoints.row(c.scene_index).transpose());
    if ((mapped - model_keypoints.row(c.model_index).transpose()).norm() <= radius) {
      inlier_rows.push_back(static_cast<int>(k));
    }
  }
  if (inlier_rows.size() >= 3) {
    PointMatrixd src(static_cast<Eigen::Index>(inlier_rows.size()), 3);
    PointMatrixd tgt(static_cast<Eigen::Index>(inlier_rows.size()), 3);
    for (size_t k = 0; k < inlier_rows.size(); ++k) {
      const Correspondence& c = correspondences[static_cast<size_t>(inlier_rows[k])];
      src.row(static_cast<Eigen::Index>(k)) = scene_keypoints.row(c.scene_index);
      tgt.row(static_cast<Eigen::Index>(k)) = model_keypoints.row(c.model_index);
    }
    pose = absolute_orientation(src, tgt);
  }
  PoseEstimate estimate;
  estimate.transform = pose;
  estimate.err_r_deg = rotation_error_deg(pose.rotation, gt.rotation);
  estimate.err_t_mr = (gt.translation - pose.translation).norm() / mr;
  estimate.iterations_used = best.iteration;
  estimate.inliers = best.inliers;
  return estimate;
}

}  // namespace

RigidTransformd pose_from_correspondence(const Vec3d& model_keypoint, const Vec3d& scene_keypoint,
                                         const Lrfd& model_frame, const Lrfd& scene_frame) {
  PointMatrixd source(3, 3);
  PointMatrixd target(3, 3);
  source.row(0) = scene_keypoint.transpose();
  source.row(1) = (scene_keypoint + scene_frame.x()).transpose();
  source.row(2) = (scene_keypoint + scene_frame.z()).transpose();
  target.row(0) = model_keypoint.transpose();
  target.row(1) = (model_keypoint + model_frame.x()).transpose();
  target.row(2) = (model_keypoint + model_frame.z()).transpose();
  return absolute_orientation(source, target);
}

RigidTransformd pose_from_correspondence(const LocalPatchd& model_patch,
                                         const LocalPatchd& scene_patch, const Lrfd& model_frame,
                                         const Lrfd& scene_frame) {
  return pose_from_correspondence(model_patch.keypoint, scene_patch.keypoint, model_frame,
                                  scene_frame);
}

PoseEstimate one_point_ransac(const std::vector<Correspondence>& correspondences,
                              const PointMatrixd& model_keypoints,
                              const PointMatrixd& scene_keypoints,
                              const std::vector<Lrfd>& model_frames,
                              const std::vector<Lrfd>& scene_frames, int iterations,
                              double inlier_radius_mr, double mr, const RigidTransformd& gt,
                              uint64_t seed, std::vector<int>* best_consensus_history) {
  if (correspondences.empty() || iterations < 1) {
    throw_error(ErrorCode::kInvalidInput, "one_point_ransac: need correspondences and iterations");
  }
  const double radius = inlier_radius_mr * mr;
  Rng rng(derive_seed(seed, 0xF001));
  std::uniform_int_distribution<int> pick(0, static_cast<int>(correspondences.size()) - 1);
  Hypothesis best;
  if (best_consensus_history != nullptr) {
    best_consensus_history->clear();
    best_consensus_history->reserve(static_cast<size_t>(iterations));
  }
  for (int it = 1; it <= iterations; ++it) {
    const Correspondence& c = correspondences[static_cast<size_t>(pick(rng))];
    const RigidTransformd pose = pose_from_correspondence(
        model_keypoints.row(c.model_index).transpose(),
        scene_keypoints.row(c.scene_index).transpose(),
        model_frames[static_cast<size_t>(c.model_index)],
        scene_frames[static_cast<size_t>(c.scene_index)]);
    const int inliers =
        count_inliers(correspondences, model_keypoints, scene_keypoints, pose, radius);
    if (inliers > best.inliers) {
      best.transform = pose;
      best.inliers = inliers;
      best.iteration = it;
    }
    if (best_consensus_history != nullptr) {
      best_consensus_history->push_back(std::max(best.inliers, 0));
    }
  }
  if (best.inliers < 1) {
    throw_error(ErrorCode::kPoseFailure, "one_point_ransac: zero inliers for every hypothesis");
  }
  return finalize_pose(correspondences, model_keypoints, scene_keypoints, best, radius, mr, gt);
}

PoseEstimate ransac3_baseline(const std::vector<Correspondence>& correspondences,
                              const PointMatrixd& model_keypoints,
                              const PointMatrixd& scene_keypoints, int iterations,
                              double inlier_radius_mr, double mr, const RigidTransformd& gt,
                              uint64_t seed, std::vector<int>* best_consensus_history) {
  if (correspondences.size() < 3 || iterations < 1) {
    throw_error(ErrorCode::kInvalidInput,
                "ransac3_baseline: need >= 3 correspondences and iterations >= 1");
  }
  const double radius = inlier_radius_mr * mr;
  Rng rng(derive_seed(seed, 0xF002));
  const int n = static_cast<int>(correspondences.size());
  std::uniform_int_distribution<int> pick(0, n - 1);
  Hypothesis best;
  if (best_consensus_history != nullptr) {
    best_consensus_history->clear();
    best_consensus_history->reserve(static_cast<size_t>(iterations));
  }
  for (int it = 1; it <= iterations; ++it) {
    int a = pick(rng);
    int b = pick(rng);
    int c = pick(rng);
    while (b == a) b = pick(rng);
    while (c == a || c == b) c = pick(rng);

    PointMatrixd src(3, 3);
    PointMatrixd tgt(3, 3);
    const int rows[3] = {a, b, c};
    for (int k = 0; k < 3; ++k) {
      const Correspondence& corr = correspondences[static_cast<size_t>(rows[k])];
      src.row(k) = scene_keypoints.row(corr.scene_index);
      tgt.row(k) = model_keypoints.row(corr.model_index);
    }
    const RigidTransformd pose = absolute_orientation(src, tgt);
    const int inliers =
        count_inliers(correspondences, model_keypoints, scene_keypoints, pose, radius);
    if (inliers > best.inliers) {
      best.transform = pose;
      best.inliers = inliers;
      best.iteration = it;
    }
    if (best_consensus_history != nullptr) {
      best_consensus_history->push_back(std::max(best.inliers, 0));
    }
  }
  if (best.inliers < 1) {
    throw_error(ErrorCode::kPoseFailure, "ransac3_baseline: zero inliers for every hypothesis");
  }
  return finalize_pose(correspondences, model_keypoints, scene_keypoints, best, radius, mr, gt);
}

}  // namespace lrfkit
