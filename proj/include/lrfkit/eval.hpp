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

#ifndef LRFKIT_EVAL_HPP_
#define LRFKIT_EVAL_HPP_

#include <functional>
#include <utility>
#include <vector>

#include "lrfkit/types.hpp"

namespace lrfkit {

/// Repeatability score of two corresponding frames: the average of the x- and
/// z-axis cosines after carrying the scene frame back into model coordinates.
/// `gt` maps model coordinates into scene coordinates (the transform that
/// built the scene), so the scene axes are rotated by its inverse; a frame
/// built as rotate_lrf(L, gt.rotation) scores exactly 1 against L. The y-axis
/// is implied by the other two and excluded.
double mean_cos(const Lrfd& model_frame, const Lrfd& scene_frame, const RigidTransformd& gt);

/// Frame estimator over a patch: (patch, keypoint) -> Lrf. Estimators that
/// need more context (a mesh, a weight network) are closures capturing it.
using LrfFn = std::function<Lrfd(const LocalPatchd&, const Vec3d&)>;

struct RepeatabilityResult {
  double mean_meancos = 0.0;
  int n_valid = 0;       // keypoints contributing to the mean
  int n_degenerate = 0;  // keypoints skipped due to degenerate frames
};

/// Samples model keypoints whose gt-mapped location has a scene point within
/// 1 mr, estimates both frames around each, and averages mean_cos.
/// `model_to_scene` maps model coordinates into scene coordinates.
RepeatabilityResult repeatability_experiment(const PointCloudd& model, const PointCloudd& scene,
                                             const RigidTransformd& model_to_scene,
                                             const LrfFn& model_fn, const LrfFn& scene_fn,
                                             int n_keypoints, double r, uint64_t seed);

/// Occupancy histogram of the patch in LRF coordinates: points are expressed
/// in the frame, scaled by 1/radius into [-1,1]^3, and counted into a
/// bins^3 grid (flattened x-major), then L1-normalized.
Eigen::VectorXd simple_descriptor(const LocalPatchd& patch, const Vec3d& keypoint,
                                  const Lrfd& frame, int bins);

struct Correspondence {
  int model_index = 0;
  int scene_index = 0;
  double similarity = 0.0;  // descriptor distance; lower is better
};

struct RpcPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double one_minus_precision = 0.0;
};

/// Ratio-test matching swept over thresholds: each model descriptor is
/// matched to its nearest scene descriptor when the nearest/second-nearest
/// distance ratio is at or below the threshold. recall = true matches over
/// ground-truth pairs; 1-precision = false matches over all matches (0 when
/// nothing matches).
std::vector<RpcPoint> rpc_curve(const std::vector<Eigen::VectorXd>& model_descriptors,
                                const std::vector<Eigen::VectorXd>& scene_descriptors,
                                const std::vector<std::pair<int, int>>& ground_truth_matches,
                                const std::vector<double>& thresholds);

/// Rigid transform mapping scene coordinates into model coordinates from a
/// single LRF-equipped correspondence, via the SVD absolute-orientation
/// solution over the keypoint and its x/z axis endpoints (algebraically
/// R = L_m · L_s^T, t = p_m - R p_s).
RigidTransformd pose_from_correspondence(const Vec3d& model_keypoint, const Vec3d& scene_keypoint,
                                         const Lrfd& model_frame, const Lrfd& scene_frame);
RigidTransformd pose_from_correspondence(const LocalPatchd& model_patch,
                                         const LocalPatchd& scene_patch, const Lrfd& model_frame,
                                         const Lrfd& scene_frame);

struct PoseEstimate {
  RigidTransformd transform;  // scene -> model
  double err_r_deg = 0.0;
  double err_t_mr = 0.0;
  int iterations_used = 0;  // iteration (1-based) where the best consensus first appeared
  int inliers = 0;
};

/// One hypothesis per iteration from a single sampled correspondence; the
/// best-consensus pose is refined over its inliers (when >= 3) before the
/// errors against `gt` (the true scene-to-model transform) are reported.
/// `best_consensus_history`, when given, receives the best-so-far inlier
/// count after each iteration.
PoseEstimate one_point_ransac(const std::vector<Correspondence>& correspondences,
                              const PointMatrixd& model_keypoints,
                              const PointMatrixd& scene_keypoints,
                              const std::vector<Lrfd>& model_frames,
                              const std::vector<Lrfd>& scene_frames, int iterations,
                              double inlier_radius_mr, double mr, const RigidTransformd& gt,
                              uint64_t seed, std::vector<int>* best_consensus_history = nullptr);

/// Classical baseline: three distinct correspondences per hypothesis, pose by
/// SVD absolute orientation over the three keypoint pairs.
PoseEstimate ransac3_baseline(const std::vector<Correspondence>& correspondences,
                              const PointMatrixd& model_keypoints,
                              const PointMatrixd& scene_keypoints, int iterations,
                              double inlier_radius_mr, double mr, const RigidTransformd& gt,
                              uint64_t seed, std::vector<int>* best_consensus_history = nullptr);

}  // namespace lrfkit

#endif  // LRFKIT_EVAL_HPP_
