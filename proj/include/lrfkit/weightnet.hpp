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

#ifndef LRFKIT_WEIGHTNET_HPP_
#define LRFKIT_WEIGHTNET_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace lrfkit {

enum class Activation { kRelu, kSigmoid };

/// One fully connected layer. `weights` has one row per output unit and one
/// column per input unit, the inputs being the previous layer's output
/// followed by the skip source's output when `skip_from` >= 0.
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  Activation activation = Activation::kRelu;
  int skip_from = -1;  // layer index whose output is concatenated, or -1

  Eigen::Index out_width() const { return weights.rows(); }
  Eigen::Index in_width() const { return weights.cols(); }
};

/// Per-point activations recorded during a forward pass, for backpropagation.
struct ForwardTrace {
  Eigen::MatrixXd input;                        // N x input_width
  std::vector<Eigen::MatrixXd> pre_activation;  // per layer, N x out
  std::vector<Eigen::MatrixXd> activation;      // per layer, N x out
};

/// Per-point MLP applied independently to every row of the input: an
/// encoder-decoder stack whose decoder layers concatenate the mirrored
/// encoder outputs onto their inputs. Hidden layers are rectified; the output
/// layer is a scalar logistic unit, so per-point weights lie in (0,1).
struct WeightNet {
  int input_width = 2;
  std::vector<DenseLayer> layers;

  /// Builds the stack for the given hidden widths with symmetric-uniform
  /// parameter initialization (bound sqrt(6/(fan_in+fan_out))), zero biases.
  /// Mirror skip connections are added when the hidden stack has odd depth
  /// >= 3; shallower or even stacks are plain MLPs.
  static WeightNet create(int input_width, const std::vector<int>& hidden_widths, uint64_t seed);

  /// Per-row forward pass; returns one weight in (0,1) per input row.
  Eigen::VectorXd forward(const Eigen::MatrixXd& inputs) const;

  /// Forward pass that also records activations for backpropagation.
  Eigen::VectorXd forward_traced(const Eigen::MatrixXd& inputs, ForwardTrace* trace) const;

  size_t parameter_count() const;

  /// FNV-1a 64-bit digest over the little-endian IEEE-754 bytes of all
  /// parameters (per layer: weights row-major, then bias).
  uint64_t checksum() const;
};

/// Writes the network as a versioned JSON document with a content checksum.
void save_weightnet(const WeightNet& net, const std::string& path);

/// Reads a network written by save_weightnet; verifies structure and
/// checksum (mismatch raises a data error).
WeightNet load_weightnet(const std::string& path);

}  // namespace lrfkit

#endif  // LRFKIT_WEIGHTNET_HPP_
