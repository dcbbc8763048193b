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

#include <gtest/gtest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "lrfkit/baselines.hpp"
#include "lrfkit/error.hpp"
#include "lrfkit/geometry.hpp"
#include "lrfkit/random.hpp"
#include "test_util.hpp"

namespace lrfkit {
namespace {

Lrfd RandomFrame(Rng& rng) {
  Lrfd frame;
  frame.axes = random_rotation<double>(rng);
  return frame;
}

// ---------------------------------------------------------------------------
// mean_cos
// ---------------------------------------------------------------------------

TEST(MeanCos, GtRotatedCopyScoresOne) {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const Lrfd model_frame = RandomFrame(rng);
    const RigidTransformd gt = random_rigid_transform<double>(rng, 5.0);
    const Lrfd scene_frame = rotate_lrf(model_frame, gt.rotation);
    EXPECT_NEAR(mean_cos(model_frame, scene_frame, gt), 1.0, 1e-9);
  }
}

TEST(MeanCos, BothAxesFlippedScoresMinusOne) {
  Rng rng(102);
  const Lrfd model_frame = RandomFrame(rng);
  // Negating x and z keeps the frame right-handed: (-z) x (-x) = z x x = y.
  Lrfd scene_frame = model_frame;
  scene_frame.axes.col(0) = -model_frame.axes.col(0);
  scene_frame.axes.col(2) = -model_frame.axes.col(2);
  RigidTransformd gt;  // identity
  EXPECT_NEAR(mean_cos(model_frame, scene_frame, gt), -1.0, 1e-12);
}

TEST(MeanCos, AgreeingXOrthogonalZScoresHalf) {
  Lrfd model_frame;  // identity axes: x=e1, y=e2, z=e3
  // Same x, z rotated into e2: frame [e1, -e3, e2] is orthonormal and
  // right-handed (det +1).
  Lrfd scene_frame;
  scene_frame.axes.col(0) = Vec3d(1, 0, 0);
  scene_frame.axes.col(1) = Vec3d(0, 0, -1);
  scene_frame.axes.col(2) = Vec3d(0, 1, 0);
  ASSERT_NEAR(scene_frame.axes.determinant(), 1.0, 1e-12);
  RigidTransformd gt;  // identity
  EXPECT_NEAR(mean_cos(model_frame, scene_frame, gt), 0.5, 1e-12);
}

TEST(MeanCos, SymmetricUnderSwapWithInverseGt) {
  Rng rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    const Lrfd model_frame = RandomFrame(rng);
    const Lrfd scene_frame = RandomFrame(rng);
    const RigidTransformd gt = random_rigid_transform<double>(rng, 2.0);
    const double forward = mean_cos(model_frame, scene_frame, gt);
    const double swapped = mean_cos(scene_frame, model_frame, gt.inverse());
    EXPECT_NEAR(forward, swapped, 1e-9);
  }
}

TEST(MeanCos, StaysInUnitInterval) {
  Rng rng(104);
  for (int trial = 0; trial < 50; ++trial) {
    const Lrfd model_frame = RandomFrame(rng);
    const Lrfd scene_frame = RandomFrame(rng);
    const RigidTransformd gt = random_rigid_transform<double>(rng, 1.0);
    const double score = mean_cos(model_frame, scene_frame, gt);
    EXPECT_GE(score, -1.0 - 1e-12);
    EXPECT_LE(score, 1.0 + 1e-12);
  }
}

// ---------------------------------------------------------------------------
// repeatability_experiment
// ---------------------------------------------------------------------------

LrfFn ShotFn() {
  return [](const LocalPatchd& patch, const Vec3d& keypoint) { return lrf_shot(patch, keypoint); };
}

LrfFn ToldiFn() {
  return [](const LocalPatchd& patch, const Vec3d& keypoint) {
    const Vec3d normal = estimate_normal(patch, keypoint);
    return lrf_toldi(patch, keypoint, normal);
  };
}

struct RepeatabilityScene {
  PointCloudd model;
  PointCloudd scene;
  RigidTransformd model_to_scene;
  double r = 0.0;
};

RepeatabilityScene MakeRepeatabilityScene(uint64_t seed) {
  RepeatabilityScene setup;
  setup.model = synth_surface(SurfaceKind::kRandomSmooth, 700, seed);
  cache_resolution(setup.model);
  Rng rng(derive_seed(seed, 5));
  setup.model_to_scene = random_rigid_transform<double>(rng, 0.5);
  setup.scene = apply_transform(setup.model, setup.model_to_scene);
  setup.r = 8.0 * setup.model.resolution_mr;
  return setup;
}

TEST(Repeatability, ExactCopyScoresNearOneForShotAndToldi) {
  const RepeatabilityScene setup = MakeRepeatabilityScene(201);
  for (const LrfFn& fn : {ShotFn(), ToldiFn()}) {
    const RepeatabilityResult result = repeatability_experiment(
        setup.model, setup.scene, setup.model_to_scene, fn, fn, 50, setup.r, 7);
    EXPECT_GT(result.mean_meancos, 0.999);
    EXPECT_GT(result.n_valid, 0);
    EXPECT_LE(result.n_valid + result.n_degenerate, 50);
  }
}

TEST(Repeatability, NoiseDegradesScore) {
  const RepeatabilityScene setup = MakeRepeatabilityScene(202);
  const PointCloudd noisy_scene =
      add_gaussian_noise(setup.scene, 0.5 * setup.model.resolution_mr, 77);
  const LrfFn fn = ShotFn();
  const RepeatabilityResult clean = repeatability_experiment(
      setup.model, setup.scene, setup.model_to_scene, fn, fn, 40, setup.r, 7);
  const RepeatabilityResult noisy = repeatability_experiment(
      setup.model, noisy_scene, setup.model_to_scene, fn, fn, 40, setup.r, 7);
  EXPECT_LT(noisy.mean_meancos, clean.mean_meancos);
}

TEST(Repeatability, KeypointBudgetCapsAtCloudSize) {
  RepeatabilityScene setup = MakeRepeatabilityScene(203);
  // Ask for more keypoints than the cloud holds: every point is considered at
  // most once, so valid + degenerate never exceeds the cloud size.
  const LrfFn fn = ShotFn();
  const RepeatabilityResult result = repeatability_experiment(
      setup.model, setup.scene, setup.model_to_scene, fn, fn, 1000, setup.r, 7);
  EXPECT_LE(result.n_valid + result.n_degenerate, static_cast<int>(setup.model.size()));
  EXPECT_LE(result.n_valid, 1000);
}

TEST(Repeatability, DeterministicPerSeed) {
  const RepeatabilityScene setup = MakeRepeatabilityScene(204);
  const LrfFn fn = ToldiFn();
  const RepeatabilityResult a = repeatability_experiment(
      setup.model, setup.scene, setup.model_to_scene, fn, fn, 30, setup.r, 9);
  const RepeatabilityResult b = repeatability_experiment(
      setup.model, setup.scene, setup.model_to_scene, fn, fn, 30, setup.r, 9);
  EXPECT_EQ(a.mean_meancos, b.mean_meancos);
  EXPECT_EQ(a.n_valid, b.n_valid);
  EXPECT_EQ(a.n_degenerate, b.n_degenerate);
}

TEST(Repeatability, NoOverlapThrowsInsufficientData) {
  RepeatabilityScene setup = MakeRepeatabilityScene(205);
  // Push the scene far away while claiming the transform is identity: no
  // mapped keypoint finds a scene point within one resolution unit.
  RigidTransformd shift;
  shift.translation = Vec3d(100.0, 0.0, 0.0);
  const PointCloudd far_scene = apply_transform(setup.model, shift);
  const LrfFn fn = ShotFn();
  ExpectError(ErrorCode::kInsufficientData, [&] {
    repeatability_experiment(setup.model, far_scene, RigidTransformd{}, fn, fn, 20, setup.r, 7);
  });
}

TEST(Repeatability, RejectsNonPositiveKeypointCount) {
  const RepeatabilityScene setup = MakeRepeatabilityScene(206);
  const LrfFn fn = ShotFn();
  ExpectError(ErrorCode::kInvalidInput, [&] {
    repeatability_experiment(setup.model, setup.scene, setup.model_to_scene, fn, fn, 0, setup.r, 7);
  });
}

// ---------------------------------------------------------------------------
// simple_descriptor
// ---------------------------------------------------------------------------

TEST(SimpleDescriptor, HandComputedOctantHistogram) {
  LocalPatchd patch;
  patch.keypoint = Vec3d::Zero();
  patch.radius = 1.0;
  patch.neighbors.resize(2, 3);
  patch.neighbors.row(0) << 0.5, 0.5, 0.5;    // all-positive octant
  patch.neighbors.row(1) << -0.5, -0.5, -0.5;  // all-negative octant
  const Eigen::VectorXd hist = simple_descriptor(patch, patch.keypoint, Lrfd{}, 2);
  ASSERT_EQ(hist.size(), 8);
  // x-major flattening: (ix*bins + iy)*bins + iz.
  EXPECT_DOUBLE_EQ(hist[0], 0.5);  // bins (0,0,0)
  EXPECT_DOUBLE_EQ(hist[7], 0.5);  // bins (1,1,1)
  for (int i : {1, 2, 3, 4, 5, 6}) EXPECT_DOUBLE_EQ(hist[i], 0.0);
}

TEST(SimpleDescriptor, SumsToOne) {
  Rng rng(301);
  for (int trial = 0; trial < 10; ++trial) {
    LocalPatchd patch;
    patch.keypoint = Vec3d(0.1, -0.2, 0.05);
    patch.neighbors = RandomBox(80, 3000 + uint64_t(trial), 0.4).rowwise() +
                      patch.keypoint.transpose();
    patch.radius = 1.0;
    const Lrfd frame = RandomFrame(rng);
    const Eigen::VectorXd hist = simple_descriptor(patch, patch.keypoint, frame, 4);
    ASSERT_EQ(hist.size(), 64);
    EXPECT_NEAR(hist.sum(), 1.0, 1e-9);
    EXPECT_GE(hist.minCoeff(), 0.0);
  }
}

TEST(SimpleDescriptor, SameInputsGiveIdenticalVectors) {
  LocalPatchd patch;
  patch.keypoint = Vec3d(0.02, 0.03, -0.01);
  patch.neighbors = RandomBox(120, 310, 0.5).rowwise() + patch.keypoint.transpose();
  patch.radius = 0.8;
  Rng rng(311);
  const Lrfd frame = RandomFrame(rng);
  const Eigen::VectorXd a = simple_descriptor(patch, patch.keypoint, frame, 5);
  const Eigen::VectorXd b = simple_descriptor(patch, patch.keypoint, frame, 5);
  EXPECT_EQ(a, b);
}

TEST(SimpleDescriptor, RotatedPatchWithEquivariantFrameMatches) {
  Rng rng(312);
  for (int trial = 0; trial < 5; ++trial) {
    LocalPatchd patch;
    patch.keypoint = Vec3d(0.05, -0.02, 0.03);
    patch.neighbors = RandomBox(150, 3200 + uint64_t(trial), 0.3).rowwise() +
                      patch.keypoint.transpose();
    patch.radius = 1.0;
    const RigidTransformd t = random_rigid_transform<double>(rng, 1.0);
    const LocalPatchd moved = apply_transform(patch, t);

    const Lrfd frame = lrf_shot(patch, patch.keypoint);
    const Lrfd moved_frame = lrf_shot(moved, moved.keypoint);
    const Eigen::VectorXd a = simple_descriptor(patch, patch.keypoint, frame, 4);
    const Eigen::VectorXd b = simple_descriptor(moved, moved.keypoint, moved_frame, 4);
    // The local coordinates agree to roundoff, so at most a vanishing amount
    // of mass can hop bins (none for generic points away from bin edges).
    EXPECT_LE((a - b).lpNorm<1>(), 1e-6);
  }
}

TEST(SimpleDescriptor, RejectsBadInputs) {
  LocalPatchd patch;
  patch.keypoint = Vec3d::Zero();
  patch.neighbors = RandomBox(10, 33, 0.5);
  patch.radius = 1.0;
  ExpectError(ErrorCode::kInvalidInput,
              [&] { simple_descriptor(patch, patch.keypoint, Lrfd{}, 1); });
  LocalPatchd empty;
  empty.keypoint = Vec3d::Zero();
  empty.neighbors.resize(0, 3);
  empty.radius = 1.0;
  ExpectError(ErrorCode::kEmptyPatch,
              [&] { simple_descriptor(empty, empty.keypoint, Lrfd{}, 2); });
}

// ---------------------------------------------------------------------------
// rpc_curve
// ---------------------------------------------------------------------------

Eigen::VectorXd Descriptor1d(double x) {
  Eigen::VectorXd v(2);
  v << x, 0.0;
  return v;
}

// Ten model descriptors against ten scene descriptors at integer positions.
// Models 0..7 sit 0.1 away from their true partner (ratio 1/9); models 8 and 9
// sit nearest to the wrong scene descriptor with a looser ratio 0.3/0.7.
struct RpcToyInstance {
  std::vector<Eigen::VectorXd> model;
  std::vector<Eigen::VectorXd> scene;
  std::vector<std::pair<int, int>> gt;
};

RpcToyInstance MakeRpcToyInstance() {
  RpcToyInstance inst;
  for (int j = 0; j < 10; ++j) inst.scene.push_back(Descriptor1d(double(j)));
  for (int i = 0; i < 8; ++i) inst.model.push_back(Descriptor1d(double(i) + 0.1));
  inst.model.push_back(Descriptor1d(3.7));  // model 8 -> nearest scene 4 (wrong)
  inst.model.push_back(Descriptor1d(6.7));  // model 9 -> nearest scene 7 (wrong)
  for (int i = 0; i < 10; ++i) inst.gt.emplace_back(i, i);
  return inst;
}

TEST(RpcCurve, HandCountedToyInstance) {
  const RpcToyInstance inst = MakeRpcToyInstance();
  const std::vector<RpcPoint> curve =
      rpc_curve(inst.model, inst.scene, inst.gt, {0.05, 0.2, 0.5, 1.0});
  ASSERT_EQ(curve.size(), 4u);

  // threshold 0.05: no candidate passes (tightest ratio is 1/9 ~ 0.111).
  EXPECT_DOUBLE_EQ(curve[0].recall, 0.0);
  EXPECT_DOUBLE_EQ(curve[0].one_minus_precision, 0.0);

  // threshold 0.2: the 8 true matches pass, both false ones (ratio 3/7) do not.
  EXPECT_DOUBLE_EQ(curve[1].recall, 0.8);
  EXPECT_DOUBLE_EQ(curve[1].one_minus_precision, 0.0);

  // threshold 0.5: all 10 pass; 8 true of 10 matches.
  EXPECT_DOUBLE_EQ(curve[2].recall, 0.8);
  EXPECT_DOUBLE_EQ(curve[2].one_minus_precision, 0.2);

  // threshold 1.0: same population.
  EXPECT_DOUBLE_EQ(curve[3].recall, 0.8);
  EXPECT_DOUBLE_EQ(curve[3].one_minus_precision, 0.2);

  for (size_t k = 0; k < curve.size(); ++k) {
    EXPECT_EQ(curve[k].threshold, std::vector<double>({0.05, 0.2, 0.5, 1.0})[k]);
  }
}

TEST(RpcCurve, MonotoneWhenFalseMatchesAreLooser) {
  // When true matches carry tighter ratios than false ones (the regime the
  // ratio test is built for), loosening the threshold only adds matches, so
  // recall and 1-precision are both non-decreasing along the sweep.
  const RpcToyInstance inst = MakeRpcToyInstance();
  std::vector<double> thresholds;
  for (int k = 0; k <= 20; ++k) thresholds.push_back(0.05 * double(k));
  const std::vector<RpcPoint> curve = rpc_curve(inst.model, inst.scene, inst.gt, thresholds);
  for (size_t k = 1; k < curve.size(); ++k) {
    EXPECT_GE(curve[k].recall, curve[k - 1].recall);
    EXPECT_GE(curve[k].one_minus_precision, curve[k - 1].one_minus_precision);
  }
}

TEST(RpcCurve, AllCorrectMatchesGiveZeroOneMinusPrecision) {
  RpcToyInstance inst;
  for (int j = 0; j < 6; ++j) inst.scene.push_back(Descriptor1d(double(j)));
  for (int i = 0; i < 6; ++i) inst.model.push_back(Descriptor1d(double(i) + 0.05));
  for (int i = 0; i < 6; ++i) inst.gt.emplace_back(i, i);
  const std::vector<RpcPoint> curve =
      rpc_curve(inst.model, inst.scene, inst.gt, {0.01, 0.3, 0.9});
  for (const RpcPoint& point : curve) {
    EXPECT_DOUBLE_EQ(point.one_minus_precision, 0.0);
  }
  EXPECT_DOUBLE_EQ(curve.back().recall, 1.0);
}

TEST(RpcCurve, SingleSceneDescriptorAlwaysPasses) {
  // With one scene descriptor there is no second neighbor; the ratio is
  // defined as 0 so the candidate passes any threshold.
  std::vector<Eigen::VectorXd> model = {Descriptor1d(0.4)};
  std::vector<Eigen::VectorXd> scene = {Descriptor1d(0.0)};
  const std::vector<RpcPoint> curve = rpc_curve(model, scene, {{0, 0}}, {0.0, 0.5});
  EXPECT_DOUBLE_EQ(curve[0].recall, 1.0);
  EXPECT_DOUBLE_EQ(curve[0].one_minus_precision, 0.0);
}

TEST(RpcCurve, RejectsEmptyInputs) {
  const RpcToyInstance inst = MakeRpcToyInstance();
  ExpectError(ErrorCode::kInsufficientData,
              [&] { rpc_curve(inst.model, inst.scene, {}, {0.5}); });
  ExpectError(ErrorCode::kInvalidInput, [&] { rpc_curve({}, inst.scene, inst.gt, {0.5}); });
  ExpectError(ErrorCode::kInvalidInput, [&] { rpc_curve(inst.model, {}, inst.gt, {0.5}); });
}

// ---------------------------------------------------------------------------
// pose_from_correspondence
// ---------------------------------------------------------------------------

TEST(PoseFromCorrespondence, RecoversGroundTruthExactly) {
  Rng rng(401);
  for (int trial = 0; trial < 20; ++trial) {
    const RigidTransformd model_to_scene = random_rigid_transform<double>(rng, 3.0);
    const Vec3d model_keypoint = Vec3d(rng() % 100, rng() % 100, rng() % 100) / 50.0;
    const Vec3d scene_keypoint = model_to_scene(model_keypoint);
    const Lrfd model_frame = RandomFrame(rng);
    const Lrfd scene_frame = rotate_lrf(model_frame, model_to_scene.rotation);

    const RigidTransformd pose =
        pose_from_correspondence(model_keypoint, scene_keypoint, model_frame, scene_frame);
    const RigidTransformd expected = model_to_scene.inverse();
    EXPECT_LE((pose.rotation - expected.rotation).cwiseAbs().maxCoeff(), 1e-9);
    ExpectVecNear(pose.translation, expected.translation, 1e-9);
    ExpectVecNear(pose(scene_keypoint), model_keypoint, 1e-9);
  }
}

TEST(PoseFromCorrespondence, IdentityFramesCoincidentKeypointsGiveIdentity) {
  const Vec3d p(0.3, -0.4, 0.9);
  const RigidTransformd pose = pose_from_correspondence(p, p, Lrfd{}, Lrfd{});
  EXPECT_LE((pose.rotation - Mat3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(pose.translation.norm(), 1e-12);
}

TEST(PoseFromCorrespondence, MatchesClosedForm) {
  Rng rng(402);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3d model_keypoint = random_unit_vector<double>(rng) * 2.0;
    const Vec3d scene_keypoint = random_unit_vector<double>(rng) * 2.0;
    const Lrfd model_frame = RandomFrame(rng);
    const Lrfd scene_frame = RandomFrame(rng);
    const RigidTransformd pose =
        pose_from_correspondence(model_keypoint, scene_keypoint, model_frame, scene_frame);
    const Mat3d closed_form = model_frame.axes * scene_frame.axes.transpose();
    EXPECT_LE((pose.rotation - closed_form).cwiseAbs().maxCoeff(), 1e-9);
    ExpectVecNear(pose.translation, Vec3d(model_keypoint - closed_form * scene_keypoint), 1e-9);
  }
}

TEST(PoseFromCorrespondence, PatchOverloadUsesPatchKeypoints) {
  Rng rng(403);
  LocalPatchd model_patch;
  model_patch.keypoint = Vec3d(0.1, 0.2, 0.3);
  model_patch.neighbors = RandomBox(10, 44, 0.5);
  model_patch.radius = 1.0;
  LocalPatchd scene_patch;
  scene_patch.keypoint = Vec3d(-0.5, 0.0, 0.25);
  scene_patch.neighbors = RandomBox(10, 45, 0.5);
  scene_patch.radius = 1.0;
  const Lrfd model_frame = RandomFrame(rng);
  const Lrfd scene_frame = RandomFrame(rng);
  const RigidTransformd a =
      pose_from_correspondence(model_patch, scene_patch, model_frame, scene_frame);
  const RigidTransformd b = pose_from_correspondence(model_patch.keypoint, scene_patch.keypoint,
                                                     model_frame, scene_frame);
  EXPECT_EQ(a.rotation, b.rotation);
  EXPECT_EQ(a.translation, b.translation);
}

TEST(PoseFromCorrespondence, AlwaysReturnsProperRotation) {
  // Even a left-handed axes matrix (never produced by the estimators, but
  // constructible) must come back as a proper rotation: the reflection case is
  // corrected, never returned.
  Lrfd left_handed;
  left_handed.axes = Mat3d::Identity();
  left_handed.axes(2, 2) = -1.0;
  const RigidTransformd pose =
      pose_from_correspondence(Vec3d::Zero(), Vec3d::Zero(), Lrfd{}, left_handed);
  EXPECT_TRUE(is_rotation_matrix(pose.rotation));

  Rng rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    const RigidTransformd pose2 = pose_from_correspondence(
        random_unit_vector<double>(rng), random_unit_vector<double>(rng), RandomFrame(rng),
        RandomFrame(rng));
    EXPECT_TRUE(is_rotation_matrix(pose2.rotation));
  }
}

// ---------------------------------------------------------------------------
// one_point_ransac / ransac3_baseline
// ---------------------------------------------------------------------------

struct RansacInstance {
  std::vector<Correspondence> correspondences;
  PointMatrixd model_keypoints;
  PointMatrixd scene_keypoints;
  std::vector<Lrfd> model_frames;
  std::vector<Lrfd> scene_frames;
  RigidTransformd gt;  // scene -> model
  double mr = 0.05;
};

// `n` correspondences, the first `n_inliers` exact under a random transform,
// the rest pointing at unrelated scene positions with unrelated frames.
RansacInstance MakeRansacInstance(int n, int n_inliers, uint64_t seed) {
  RansacInstance inst;
  Rng rng(seed);
  const RigidTransformd model_to_scene = random_rigid_transform<double>(rng, 1.0);
  inst.gt = model_to_scene.inverse();
  inst.model_keypoints = RandomBox(n, derive_seed(seed, 1), 1.0);
  inst.scene_keypoints.resize(n, 3);
  const PointMatrixd garbage = RandomBox(n, derive_seed(seed, 2), 1.0);
  for (int i = 0; i < n; ++i) {
    const Vec3d pm = inst.model_keypoints.row(i).transpose();
    if (i < n_inliers) {
      inst.scene_keypoints.row(i) = model_to_scene(pm).transpose();
    } else {
      inst.scene_keypoints.row(i) = garbage.row(i);
    }
    const Lrfd model_frame = RandomFrame(rng);
    inst.model_frames.push_back(model_frame);
    if (i < n_inliers) {
      inst.scene_frames.push_back(rotate_lrf(model_frame, model_to_scene.rotation));
    } else {
      inst.scene_frames.push_back(RandomFrame(rng));
    }
    Correspondence c;
    c.model_index = i;
    c.scene_index = i;
    inst.correspondences.push_back(c);
  }
  return inst;
}

TEST(OnePointRansac, ExactCorrespondencesRecoverPose) {
  const RansacInstance inst = MakeRansacInstance(100, 100, 501);
  const PoseEstimate estimate =
      one_point_ransac(inst.correspondences, inst.model_keypoints, inst.scene_keypoints,
                       inst.model_frames, inst.scene_frames, 100, 2.0, inst.mr, inst.gt, 13);
  EXPECT_LT(estimate.err_r_deg, 0.01);
  EXPECT_LT(estimate.err_t_mr, 0.01);
  EXPECT_EQ(estimate.inliers, 100);
  // The very first hypothesis already gathers every correspondence; later
  // iterations can only tie and ties keep the first.
  EXPECT_EQ(estimate.iterations_used, 1);
}

TEST(OnePointRansac, HalfOutliersStillRecoverPose) {
  const RansacInstance inst = MakeRansacInstance(100, 50, 502);
  std::vector<int> history;
  const PoseEstimate estimate = one_point_ransac(
      inst.correspondences, inst.model_keypoints, inst.scene_keypoints, inst.model_frames,
      inst.scene_frames, 100, 2.0, inst.mr, inst.gt, 13, &history);
  EXPECT_GE(estimate.inliers, 50);
  EXPECT_LT(estimate.err_r_deg, 1.0);
  EXPECT_LT(estimate.err_t_mr, 1.0);
  ASSERT_EQ(history.size(), 100u);
  for (size_t k = 1; k < history.size(); ++k) {
    EXPECT_GE(history[k], history[k - 1]);
  }
  EXPECT_EQ(history.back(), estimate.inliers);
}

TEST(OnePointRansac, DeterministicPerSeed) {
  const RansacInstance inst = MakeRansacInstance(60, 30, 503);
  std::vector<int> history_a;
  std::vector<int> history_b;
  const PoseEstimate a = one_point_ransac(
      inst.correspondences, inst.model_keypoints, inst.scene_keypoints, inst.model_frames,
      inst.scene_frames, 50, 2.0, inst.mr, inst.gt, 99, &history_a);
  const PoseEstimate b = one_point_ransac(
      inst.correspondences, inst.model_keypoints, inst.scene_keypoints, inst.model_frames,
      inst.scene_frames, 50, 2.0, inst.mr, inst.gt, 99, &history_b);
  EXPECT_EQ(a.transform.rotation, b.transform.rotation);
  EXPECT_EQ(a.transform.translation, b.transform.translation);
  EXPECT_EQ(a.err_r_deg, b.err_r_deg);
  EXPECT_EQ(a.err_t_mr, b.err_t_mr);
  EXPECT_EQ(a.iterations_used, b.iterations_used);
  EXPECT_EQ(a.inliers, b.inliers);
  EXPECT_EQ(history_a, history_b);
}

TEST(OnePointRansac, AllWrongCorrespondencesGatherAlmostNoConsensus) {
  // Every hypothesis maps its own scene keypoint exactly onto its model
  // keypoint, so the sampled correspondence is always an inlier; with random
  // unrelated pairs nothing else agrees at a tight radius.
  RansacInstance inst = MakeRansacInstance(30, 0, 504);
  inst.mr = 0.01;
  const PoseEstimate estimate =
      one_point_ransac(inst.correspondences, inst.model_keypoints, inst.scene_keypoints,
                       inst.model_frames, inst.scene_frames, 50, 2.0, inst.mr, inst.gt, 13);
  EXPECT_GE(estimate.inliers, 1);
  EXPECT_LE(estimate.inliers, 2);
}

TEST(OnePointRansac, RejectsDegenerateArguments) {
  const RansacInstance inst = MakeRansacInstance(10, 10, 505);
  ExpectError(ErrorCode::kInvalidInput, [&] {
    one_point_ransac({}, inst.model_keypoints, inst.scene_keypoints, inst.model_frames,
                     inst.scene_frames, 10, 2.0, inst.mr, inst.gt, 13);
  });
  ExpectError(ErrorCode::kInvalidInput, [&] {
    one_point_ransac(inst.correspondences, inst.model_keypoints, inst.scene_keypoints,
                     inst.model_frames, inst.scene_frames, 0, 2.0, inst.mr, inst.gt, 13);
  });
}

TEST(Ransac3Baseline, ExactCorrespondencesRecoverPose) {
  const RansacInstance inst = MakeRansacInstance(100, 100, 506);
  const PoseEstimate estimate =
      ransac3_baseline(inst.correspondences, inst.model_keypoints, inst.scene_keypoints, 100, 2.0,
                       inst.mr, inst.gt, 13);
  EXPECT_LT(estimate.err_r_deg, 1e-6);
  EXPECT_LT(estimate.err_t_mr, 1e-6);
  EXPECT_EQ(estimate.inliers, 100);
}

TEST(Ransac3Baseline, ThirtyPercentInliersSucceedWithManyIterations) {
  const RansacInstance inst = MakeRansacInstance(100, 30, 507);
  const PoseEstimate estimate =
      ransac3_baseline(inst.correspondences, inst.model_keypoints, inst.scene_keypoints, 1000, 2.0,
                       inst.mr, inst.gt, 13);
  EXPECT_GE(estimate.inliers, 27);  // >= 0.9 x the 30 true inliers
  EXPECT_LT(estimate.err_r_deg, 1.0);
  EXPECT_LT(estimate.err_t_mr, 1.0);
}

TEST(Ransac3Baseline, DeterministicPerSeed) {
  const RansacInstance inst = MakeRansacInstance(40, 20, 508);
  const PoseEstimate a = ransac3_baseline(inst.correspondences, inst.model_keypoints,
                                          inst.scene_keypoints, 200, 2.0, inst.mr, inst.gt, 21);
  const PoseEstimate b = ransac3_baseline(inst.correspondences, inst.model_keypoints,
                                          inst.scene_keypoints, 200, 2.0, inst.mr, inst.gt, 21);
  EXPECT_EQ(a.transform.rotation, b.transform.rotation);
  EXPECT_EQ(a.transform.translation, b.transform.translation);
  EXPECT_EQ(a.inliers, b.inliers);
  EXPECT_EQ(a.iterations_used, b.iterations_used);
}

TEST(Ransac3Baseline, ZeroInliersEverywhereIsPoseFailure) {
  // Wrong correspondences and a vanishing inlier radius: a three-point
  // least-squares fit over incongruent triangles never lands a keypoint
  // within the radius, so every hypothesis has zero inliers.
  RansacInstance inst = MakeRansacInstance(30, 0, 509);
  inst.mr = 1e-3;
  ExpectError(ErrorCode::kPoseFailure, [&] {
    ransac3_baseline(inst.correspondences, inst.model_keypoints, inst.scene_keypoints, 50, 1e-6,
                     inst.mr, inst.gt, 13);
  });
}

TEST(Ransac3Baseline, RejectsFewerThanThreeCorrespondences) {
  const RansacInstance inst = MakeRansacInstance(2, 2, 510);
  ExpectError(ErrorCode::kInvalidInput, [&] {
    ransac3_baseline(inst.correspondences, inst.model_keypoints, inst.scene_keypoints, 10, 2.0,
                     inst.mr, inst.gt, 13);
  });
}

}  // namespace
}  // namespace lrfkit
