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

#ifndef LRFKIT_TRAINING_HPP_
#define LRFKIT_TRAINING_HPP_

#include <cstdint>
#include <vector>

#include "lrfkit/chamfer.hpp"
#include "lrfkit/lrfnet.hpp"
#include "lrfkit/types.hpp"
#include "lrfkit/weightnet.hpp"

namespace lrfkit {

/// A corresponding patch pair; `gt` maps scene coordinates into model
/// coordinates, and the scene keypoint lands within 1 mr of the model
/// keypoint under it.
struct PatchPair {
  LocalPatchd model_patch;
  LocalPatchd scene_patch;
  RigidTransformd gt;
};

struct TrainConfig {
  int batch_size = 512;
  double learning_rate = 1e-4;
  double decay_per_epoch = 0.05;
  int epochs = 20;
  int n_points = 256;
  uint64_t seed = 0;
  ChamferMode chamfer = ChamferMode::kMin;
  LrfVariant variant = LrfVariant::kSum1;
  LrfNetConfig lrfnet;

  void validate() const {
    if (batch_size < 1 || epochs < 1 || n_points < 8) {
      throw_error(ErrorCode::kConfig, "TrainConfig: counts must be positive (n_points >= 8)");
    }
    if (!(learning_rate > 0.0)) {
      throw_error(ErrorCode::kConfig, "TrainConfig: learning_rate must be positive");
    }
    if (!(decay_per_epoch >= 0.0) || decay_per_epoch >= 1.0) {
      throw_error(ErrorCode::kConfig, "TrainConfig: decay_per_epoch must be in [0, 1)");
    }
    lrfnet.validate();
  }
};

/// Gradient container shaped like a WeightNet's parameters.
struct WeightNetGrad {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;

  static WeightNetGrad zeros_like(const WeightNet& net);
  void add_scaled(const WeightNetGrad& other, double scale);
  void scale(double factor);
  bool all_finite() const;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_bias, v_bias;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState zeros_like(const WeightNet& net);
};

/// Samples keypoint pairs from the model and its transformed (optionally
/// noised / decimated) copy. `model_to_scene` is the construction transform;
/// each emitted pair stores its inverse as the scene-to-model ground truth.
/// Patches are subsampled to cfg.n_points. Throws an insufficient-data error
/// when valid pairs cannot be found within 10x n_pairs attempts.
std::vector<PatchPair> generate_pairs(const PointCloudd& model,
                                      const RigidTransformd& model_to_scene, int n_pairs,
                                      double r, const TrainConfig& cfg,
                                      double noise_sigma_mr = 0.0, double keep_fraction = 1.0);

/// Chamfer distance between the two patches after expressing each in its own
/// estimated frame (keypoint-centered coordinates rotated into the LRF).
double pair_loss(const WeightNet& net, const PatchPair& pair, const TrainConfig& cfg);

struct BatchStats {
  double mean_loss = 0.0;  // over non-skipped pairs
  int skipped = 0;         // degenerate pairs excluded from loss and gradient
  int contributing = 0;
};

/// Mean gradient of pair_loss over the batch. Nearest-neighbor assignments
/// inside the Chamfer term are held fixed (subgradient); the z-axis does not
/// depend on the parameters. Degenerate pairs are skipped and counted.
WeightNetGrad loss_gradient(const WeightNet& net, const std::vector<PatchPair>& batch,
                            const TrainConfig& cfg, BatchStats* stats = nullptr);

/// Standard bias-corrected first/second-moment update; increments the step
/// counter. Non-finite gradient components raise a training-diverged error.
void adam_step(WeightNet& net, AdamState& state, const WeightNetGrad& gradient, double lr);

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  int skipped_pairs = 0;
  double lr = 0.0;
};

struct TrainResult {
  WeightNet net;
  std::vector<EpochStats> epochs;
};

/// Full loop: fresh network (or `initial_net` when given, e.g. to resume from
/// a saved file), per-epoch shuffles of the pair order, per-batch optimizer
/// steps with learning rate lr0 * (1 - decay)^epoch.
TrainResult train(const std::vector<PatchPair>& pairs, const TrainConfig& cfg,
                  const WeightNet* initial_net = nullptr);

}  // namespace lrfkit

#endif  // LRFKIT_TRAINING_HPP_
