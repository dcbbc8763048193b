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

#include "lrfkit/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lrfkit/geometry.hpp"
#include "lrfkit/kdtree.hpp"
#include "lrfkit/random.hpp"

namespace lrfkit {

WeightNetGrad WeightNetGrad::zeros_like(const WeightNet& net) {
  WeightNetGrad grad;
  grad.weights.reserve(net.layers.size());
  grad.bias.reserve(net.layers.size());
  for (const DenseLayer& layer : net.layers) {
    grad.weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    grad.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return grad;
}

void WeightNetGrad::add_scaled(const WeightNetGrad& other, double scale) {
  for (size_t i = 0; i < weights.size(); ++i) {
    weights[i] += scale * other.weights[i];
    bias[i] += scale * other.bias[i];
  }
}

void WeightNetGrad::scale(double factor) {
  for (size_t i = 0; i < weights.size(); ++i) {
    weights[i] *= factor;
    bias[i] *= factor;
  }
}

bool WeightNetGrad::all_finite() const {
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!weights[i].allFinite() || !bias[i].allFinite()) {
      return false;
    }
  }
  return true;
}

AdamState AdamState::zeros_like(const WeightNet& net) {
  AdamState state;
  for (const DenseLayer& layer : net.layers) {
    state.m_weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    state.v_weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    state.m_bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
    state.v_bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return state;
}

namespace {

/// One patch pushed through the frame pipeline with everything the backward
/// pass needs.
struct SideEval {
  Vec3d z;
  Vec3d x;
  Vec3d sum;               // unnormalized weighted vector sum
  double sum_norm = 0.0;
  Eigen::MatrixXd frame_points;  // N x 3: keypoint-centered points in the LRF
  PointMatrixd centered;         // N x 3: keypoint-centered points
  PointMatrixd projections;      // N x 3: tangent projections
  ForwardTrace trace;
};

SideEval evaluate_side(const WeightNet& net, const LocalPatchd& patch, LrfVariant variant,
                       const LrfNetConfig& lrf_cfg) {
  SideEval side;
  side.z = estimate_normal(patch, patch.keypoint, lrf_cfg.z_subset_fraction);
  const Eigen::MatrixXd inputs = network_inputs(patch, patch.keypoint, side.z, variant);
  const Eigen::VectorXd weights = net.forward_traced(inputs, &side.trace);
  side.projections = tangent_projections(patch, patch.keypoint, side.z);
  if (variant == LrfVariant::kMax) {
    side.x = max_weight_x_axis<double>(side.projections, weights);
    side.sum = side.x;
    side.sum_norm = 1.0;
  } else {
    side.sum = weighted_vector_sum<double>(side.projections, weights);
    side.sum_norm = side.sum.norm();
    if (side.sum_norm <= 1e-12) {
      throw_error(ErrorCode::kDegenerateGeometry, "pair_loss: vanishing weighted vector sum");
    }
    side.x = side.sum / side.sum_norm;
  }
  Mat3d frame;
  frame.col(0) = side.x;
  frame.col(2) = side.z;
  frame.col(1) = side.z.cross(side.x);
  side.centered = patch.neighbors.rowwise() - patch.keypoint.transpose();
  side.frame_points = side.centered * frame;
  return side;
}

LocalPatchd prepared_patch(const LocalPatchd& patch, const TrainConfig& cfg) {
  return subsample_patch(patch, cfg.n_points, cfg.lrfnet.seed);
}

/// Gradients of the Chamfer value with respect to both transformed sets,
/// nearest-neighbor assignments held fixed. Zero-distance matches get a zero
/// subgradient.
void chamfer_backward(const ChamferDetail<double>& detail, const Eigen::MatrixXd& a,
                      const Eigen::MatrixXd& b, Eigen::MatrixXd& da, Eigen::MatrixXd& db) {
  da = Eigen::MatrixXd::Zero(a.rows(), 3);
  db = Eigen::MatrixXd::Zero(b.rows(), 3);
  if (detail.ab_active) {
    const double inv_n = 1.0 / double(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const Eigen::Index j = detail.nn_ab[static_cast<size_t>(i)];
      const Eigen::RowVector3d diff = a.row(i) - b.row(j);
      const double dist = diff.norm();
      if (dist > 0.0) {
        const Eigen::RowVector3d u = (inv_n / dist) * diff;
        da.row(i) += u;
        db.row(j) -= u;
      }
    }
  }
  if (detail.ba_active) {
    const double inv_m = 1.0 / double(b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const Eigen::Index i = detail.nn_ba[static_cast<size_t>(j)];
      const Eigen::RowVector3d diff = b.row(j) - a.row(i);
      const double dist = diff.norm();
      if (dist > 0.0) {
        const Eigen::RowVector3d u = (inv_m / dist) * diff;
        db.row(j) += u;
        da.row(i) -= u;
      }
    }
  }
}

/// Backpropagation of per-point weight gradients through the network,
/// accumulated into `grad`.
void network_backward(const WeightNet& net, const ForwardTrace& trace,
                      const Eigen::VectorXd& dloss_dout, WeightNetGrad& grad) {
  const size_t depth = net.layers.size();
  std::vector<Eigen::MatrixXd> dact(depth);
  for (size_t i = 0; i < depth; ++i) {
    dact[i] = Eigen::MatrixXd::Zero(trace.activation[i].rows(), trace.activation[i].cols());
  }
  dact[depth - 1].col(0) = dloss_dout;

  for (size_t i = depth; i-- > 0;) {
    const DenseLayer& layer = net.layers[i];
    const Eigen::MatrixXd& z = trace.pre_activation[i];
    const Eigen::MatrixXd& a = trace.activation[i];
    Eigen::MatrixXd dz;
    if (layer.activation == Activation::kSigmoid) {
      dz = dact[i].cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
    } else {
      dz = dact[i].cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    }

    const Eigen::MatrixXd& direct = i == 0 ? trace.input : trace.activation[i - 1];
    const Eigen::Index direct_width = direct.cols();
    if (layer.skip_from < 0) {
      grad.weights[i] += dz.transpose() * direct;
    } else {
      const Eigen::MatrixXd& skip = trace.activation[static_cast<size_t>(layer.skip_from)];
      Eigen::MatrixXd joined(direct.rows(), direct_width + skip.cols());
      joined << direct, skip;
      grad.weights[i] += dz.transpose() * joined;
    }
    grad.bias[i] += dz.colwise().sum().transpose();

    const Eigen::MatrixXd din = dz * layer.weights;
    if (i > 0) {
      dact[i - 1] += din.leftCols(direct_width);
    }
    if (layer.skip_from >= 0) {
      dact[static_cast<size_t>(layer.skip_from)] += din.rightCols(din.cols() - direct_width);
    }
  }
}

/// Loss and parameter gradient for one pair; `grad` may be null for
/// loss-only evaluation.
double pair_loss_and_gradient(const WeightNet& net, const PatchPair& pair,
                              const TrainConfig& cfg, WeightNetGrad* grad) {
  const LocalPatchd model = prepared_patch(pair.model_patch, cfg);
  const LocalPatchd scene = prepared_patch(pair.scene_patch, cfg);
  const SideEval m = evaluate_side(net, model, cfg.variant, cfg.lrfnet);
  const SideEval s = evaluate_side(net, scene, cfg.variant, cfg.lrfnet);
  const ChamferDetail<double> detail =
      chamfer_detail<double>(m.frame_points, s.frame_points, cfg.chamfer);
  if (grad == nullptr) {
    return detail.value;
  }
  if (cfg.variant == LrfVariant::kMax) {
    // The winning-projection selection is piecewise constant in the
    // parameters; the subgradient vanishes almost everywhere.
    return detail.value;
  }

  Eigen::MatrixXd d_frame_m, d_frame_s;
  chamfer_backward(detail, m.frame_points, s.frame_points, d_frame_m, d_frame_s);

  const auto side_backward = [&](const SideEval& side, const Eigen::MatrixXd& d_frame) {
    // frame_points = centered * [x, z×x, z]; z is parameter-independent.
    const Mat3d d_axes = side.centered.transpose() * d_frame;
    const Vec3d g_x = d_axes.col(0);
    const Vec3d g_y = d_axes.col(1);
    const Vec3d d_x = g_x - side.z.cross(g_y);  // y = z×x pulled back onto x
    const Vec3d d_sum =
        (d_x - side.x * side.x.dot(d_x)) / side.sum_norm;  // through normalization
    const Eigen::VectorXd d_weights = side.projections * d_sum;
    network_backward(net, side.trace, d_weights, *grad);
  };
  side_backward(m, d_frame_m);
  side_backward(s, d_frame_s);
  return detail.value;
}

}  // namespace

std::vector<PatchPair> generate_pairs(const PointCloudd& model,
                                      const RigidTransformd& model_to_scene, int n_pairs,
                                      double r, const TrainConfig& cfg, double noise_sigma_mr,
                                      double keep_fraction) {
  cfg.validate();
  if (n_pairs < 1) {
    throw_error(ErrorCode::kInvalidInput, "generate_pairs: n_pairs must be >= 1");
  }
  if (!(r > 0.0)) {
    throw_error(ErrorCode::kInvalidInput, "generate_pairs: radius must be positive");
  }
  PointCloudd model_cached = model;
  cache_resolution(model_cached);
  const double mr = model_cached.resolution_mr;

  PointCloudd scene = apply_transform(model_cached, model_to_scene);
  if (noise_sigma_mr > 0.0) {
    scene = add_gaussian_noise(scene, noise_sigma_mr, derive_seed(cfg.seed, 0xA001));
  }
  if (keep_fraction < 1.0) {
    scene = decimate(scene, keep_fraction, derive_seed(cfg.seed, 0xA002));
  }

  const KdTree3d model_tree(model_cached.points);
  const KdTree3d scene_tree(scene.points);
  const RigidTransformd scene_to_model = model_to_scene.inverse();

  std::vector<PatchPair> pairs;
  pairs.reserve(static_cast<size_t>(n_pairs));
  Rng rng(derive_seed(cfg.seed, 0xA003));
  std::uniform_int_distribution<int> pick(0, static_cast<int>(model_cached.size()) - 1);
  const long max_attempts = 10L * n_pairs;
  long attempts = 0;
  uint64_t sub_stream = 0;
  while (static_cast<int>(pairs.size()) < n_pairs) {
    if (attempts++ >= max_attempts) {
      throw_error(ErrorCode::kInsufficientData,
                  "generate_pairs: could not find enough valid pairs");
    }
    const int model_index = pick(rng);
    const Vec3d model_keypoint = model_cached.points.row(model_index).transpose();

    double scene_sq = 0.0;
    const int scene_index = scene_tree.nearest(model_to_scene(model_keypoint), &scene_sq);
    const Vec3d scene_keypoint = scene.points.row(scene_index).transpose();
    if ((scene_to_model(scene_keypoint) - model_keypoint).norm() > mr) {
      continue;  // correspondence validity
    }

    PatchPair pair;
    pair.gt = scene_to_model;
    try {
      pair.model_patch = extract_patch(model_cached, model_tree, model_index, r);
      pair.scene_patch = extract_patch(scene, scene_tree, scene_index, r);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kEmptyPatch) continue;
      throw;
    }
    if (pair.model_patch.size() < 8 || pair.scene_patch.size() < 8) {
      continue;  // too sparse for a stable frame
    }
    // The same per-pair seed keeps the two subsamples index-aligned, so an
    // unperturbed pair stays an identical point set after subsampling.
    const uint64_t sub_seed = derive_seed(cfg.seed, 0xB000 + sub_stream);
    pair.model_patch = subsample_patch(pair.model_patch, cfg.n_points, sub_seed);
    pair.scene_patch = subsample_patch(pair.scene_patch, cfg.n_points, sub_seed);
    sub_stream += 1;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

double pair_loss(const WeightNet& net, const PatchPair& pair, const TrainConfig& cfg) {
  cfg.validate();
  return pair_loss_and_gradient(net, pair, cfg, nullptr);
}

WeightNetGrad loss_gradient(const WeightNet& net, const std::vector<PatchPair>& batch,
                            const TrainConfig& cfg, BatchStats* stats) {
  cfg.validate();
  if (batch.empty()) {
    throw_error(ErrorCode::kInvalidInput, "loss_gradient: empty batch");
  }
  WeightNetGrad accum = WeightNetGrad::zeros_like(net);
  double loss_sum = 0.0;
  int contributing = 0;
  int skipped = 0;
  for (const PatchPair& pair : batch) {
    WeightNetGrad pair_grad = WeightNetGrad::zeros_like(net);
    try {
      loss_sum += pair_loss_and_gradient(net, pair, cfg, &pair_grad);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kDegenerateGeometry || e.code() == ErrorCode::kEmptyPatch) {
        ++skipped;
        continue;
      }
      throw;
    }
    accum.add_scaled(pair_grad, 1.0);
    ++contributing;
  }
  if (contributing > 0) {
    accum.scale(1.0 / double(contributing));
  }
  if (stats != nullptr) {
    stats->mean_loss = contributing > 0 ? loss_sum / double(contributing)
                                        : std::numeric_limits<double>::quiet_NaN();
    stats->skipped = skipped;
    stats->contributing = contributing;
  }
  return accum;
}

void adam_step(WeightNet& net, AdamState& state, const WeightNetGrad& gradient, double lr) {
  if (net.layers.size() != gradient.weights.size() ||
      net.layers.size() != state.m_weights.size()) {
    throw_error(ErrorCode::kInvalidInput, "adam_step: shape mismatch");
  }
  if (!gradient.all_finite()) {
    throw_error(ErrorCode::kTrainingDiverged, "adam_step: non-finite gradient");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
  const auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.epsilon);
  };
  for (size_t i = 0; i < net.layers.size(); ++i) {
    update(net.layers[i].weights, state.m_weights[i], state.v_weights[i], gradient.weights[i]);
    update(net.layers[i].bias, state.m_bias[i], state.v_bias[i], gradient.bias[i]);
  }
}

TrainResult train(const std::vector<PatchPair>& pairs, const TrainConfig& cfg,
                  const WeightNet* initial_net) {
  cfg.validate();
  if (pairs.empty()) {
    throw_error(ErrorCode::kInvalidInput, "train: need at least one pair");
  }
  if (cfg.variant == LrfVariant::kMax) {
    throw_error(ErrorCode::kConfig,
                "train: the max variant has no usable gradient; train sum1 and evaluate max "
                "with its weights");
  }
  TrainConfig run_cfg = cfg;
  run_cfg.lrfnet.n_points = cfg.n_points;

  TrainResult result;
  const int input_width = run_cfg.lrfnet.network_input_width(run_cfg.variant);
  if (initial_net != nullptr) {
    if (initial_net->input_width != input_width) {
      throw_error(ErrorCode::kConfig, "train: initial network input width does not match variant");
    }
    result.net = *initial_net;
  } else {
    result.net = WeightNet::create(input_width, run_cfg.lrfnet.hidden_widths,
                                   derive_seed(run_cfg.seed, 11));
  }
  AdamState state = AdamState::zeros_like(result.net);

  std::vector<size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 0; epoch < run_cfg.epochs; ++epoch) {
    const double lr =
        run_cfg.learning_rate * std::pow(1.0 - run_cfg.decay_per_epoch, double(epoch));
    Rng shuffle_rng(derive_seed(run_cfg.seed, 0x9000u + static_cast<uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    int contributing = 0;
    int skipped = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(run_cfg.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(run_cfg.batch_size));
      std::vector<PatchPair> batch;
      batch.reserve(end - start);
      for (size_t k = start; k < end; ++k) {
        batch.push_back(pairs[order[k]]);
      }
      BatchStats stats;
      const WeightNetGrad grad = loss_gradient(result.net, batch, run_cfg, &stats);
      if (stats.contributing > 0) {
        loss_sum += stats.mean_loss * stats.contributing;
        contributing += stats.contributing;
      }
      skipped += stats.skipped;
      adam_step(result.net, state, grad, lr);
    }

    EpochStats es;
    es.epoch = epoch;
    es.mean_loss = contributing > 0 ? loss_sum / double(contributing)
                                    : std::numeric_limits<double>::quiet_NaN();
    es.skipped_pairs = skipped;
    es.lr = lr;
    result.epochs.push_back(es);
  }
  return result;
}

}  // namespace lrfkit
