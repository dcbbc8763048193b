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

#include "lrfkit/weightnet.hpp"

#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lrfkit/error.hpp"
#include "lrfkit/random.hpp"

namespace lrfkit {
namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "lrfnet-weights";
constexpr int kFormatVersion = 1;

const char* activation_name(Activation a) {
  return a == Activation::kRelu ? "relu" : "sigmoid";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  throw_error(ErrorCode::kData, "unknown activation: " + name);
}

void fnv1a_accumulate(uint64_t& hash, const double* data, size_t count) {
  for (size_t i = 0; i < count; ++i) {
    uint64_t bits;
    static_assert(sizeof(bits) == sizeof(double));
    std::memcpy(&bits, &data[i], sizeof(bits));
    for (int byte = 0; byte < 8; ++byte) {  // little-endian byte order
      hash ^= (bits >> (8 * byte)) & 0xffu;
      hash *= 0x100000001b3ull;
    }
  }
}

std::string hex64(uint64_t value) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << value;
  return out.str();
}

}  // namespace

WeightNet WeightNet::create(int input_width, const std::vector<int>& hidden_widths,
                            uint64_t seed) {
  if (input_width < 1) {
    throw_error(ErrorCode::kInvalidInput, "WeightNet: input width must be >= 1");
  }
  for (int w : hidden_widths) {
    if (w < 1) {
      throw_error(ErrorCode::kInvalidInput, "WeightNet: hidden widths must be >= 1");
    }
  }
  WeightNet net;
  net.input_width = input_width;
  const int depth = static_cast<int>(hidden_widths.size());
  const bool with_skips = depth >= 3 && depth % 2 == 1;
  const int mid = (depth - 1) / 2;

  Rng rng(seed);
  const auto push_layer = [&](int direct_in, int out, Activation act, int skip_from,
                              int skip_width) {
    DenseLayer layer;
    layer.activation = act;
    layer.skip_from = skip_from;
    const int in_total = direct_in + skip_width;
    layer.weights.resize(out, in_total);
    layer.bias = Eigen::VectorXd::Zero(out);
    const double bound = std::sqrt(6.0 / double(in_total + out));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = uniform(rng);
      }
    }
    net.layers.push_back(std::move(layer));
  };

  int prev = input_width;
  for (int i = 0; i < depth; ++i) {
    int skip_from = -1;
    int skip_width = 0;
    if (with_skips && i > mid) {
      skip_from = depth - 1 - i;
      skip_width = hidden_widths[static_cast<size_t>(skip_from)];
    }
    push_layer(prev, hidden_widths[static_cast<size_t>(i)], Activation::kRelu, skip_from,
               skip_width);
    prev = hidden_widths[static_cast<size_t>(i)];
  }
  push_layer(prev, 1, Activation::kSigmoid, -1, 0);
  return net;
}

namespace {

Eigen::MatrixXd layer_input(const Eigen::MatrixXd& direct,
                            const std::vector<Eigen::MatrixXd>& outputs, const DenseLayer& layer) {
  if (layer.skip_from < 0) {
    return direct;
  }
  const Eigen::MatrixXd& skip = outputs[static_cast<size_t>(layer.skip_from)];
  Eigen::MatrixXd joined(direct.rows(), direct.cols() + skip.cols());
  joined << direct, skip;
  return joined;
}

Eigen::MatrixXd apply_activation(const Eigen::MatrixXd& z, Activation act) {
  if (act == Activation::kRelu) {
    return z.cwiseMax(0.0);
  }
  return ((-z.array()).exp() + 1.0).inverse().matrix();
}

}  // namespace

Eigen::VectorXd WeightNet::forward(const Eigen::MatrixXd& inputs) const {
  return forward_traced(inputs, nullptr);
}

Eigen::VectorXd WeightNet::forward_traced(const Eigen::MatrixXd& inputs,
                                          ForwardTrace* trace) const {
  if (inputs.cols() != input_width) {
    throw_error(ErrorCode::kInvalidInput, "WeightNet::forward: input width mismatch");
  }
  if (layers.empty()) {
    throw_error(ErrorCode::kInvalidInput, "WeightNet::forward: empty network");
  }
  std::vector<Eigen::MatrixXd> outputs;
  outputs.reserve(layers.size());
  if (trace != nullptr) {
    trace->input = inputs;
    trace->pre_activation.clear();
    trace->activation.clear();
  }
  Eigen::MatrixXd current = inputs;
  for (size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& layer = layers[i];
    const Eigen::MatrixXd in = layer_input(current, outputs, layer);
    if (in.cols() != layer.in_width()) {
      throw_error(ErrorCode::kInvalidInput, "WeightNet::forward: layer width mismatch");
    }
    Eigen::MatrixXd z = in * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    Eigen::MatrixXd a = apply_activation(z, layer.activation);
    if (trace != nullptr) {
      trace->pre_activation.push_back(z);
      trace->activation.push_back(a);
    }
    outputs.push_back(a);
    current = std::move(a);
  }
  return current.col(0);
}

size_t WeightNet::parameter_count() const {
  size_t count = 0;
  for (const DenseLayer& layer : layers) {
    count += static_cast<size_t>(layer.weights.size()) + static_cast<size_t>(layer.bias.size());
  }
  return count;
}

uint64_t WeightNet::checksum() const {
  uint64_t hash = 0xcbf29ce484222325ull;
  for (const DenseLayer& layer : layers) {
    // Row-major order, matching the serialized layout.
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        const double v = layer.weights(r, c);
        fnv1a_accumulate(hash, &v, 1);
      }
    }
    fnv1a_accumulate(hash, layer.bias.data(), static_cast<size_t>(layer.bias.size()));
  }
  return hash;
}

void save_weightnet(const WeightNet& net, const std::string& path) {
  json doc;
  doc["format"] = kFormatTag;
  doc["version"] = kFormatVersion;
  doc["input_width"] = net.input_width;
  json layers = json::array();
  for (const DenseLayer& layer : net.layers) {
    json jl;
    jl["in"] = layer.in_width();
    jl["out"] = layer.out_width();
    jl["activation"] = activation_name(layer.activation);
    jl["skip_from"] = layer.skip_from;
    std::vector<double> w;
    w.reserve(static_cast<size_t>(layer.weights.size()));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        w.push_back(layer.weights(r, c));
      }
    }
    jl["weights"] = w;
    jl["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    layers.push_back(std::move(jl));
  }
  doc["layers"] = std::move(layers);
  doc["checksum"] = hex64(net.checksum());

  std::ofstream out(path);
  if (!out) {
    throw_error(ErrorCode::kData, "cannot write " + path);
  }
  out << doc.dump(2) << '\n';
  if (!out) {
    throw_error(ErrorCode::kData, "write failed for " + path);
  }
}

WeightNet load_weightnet(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw_error(ErrorCode::kData, "cannot open " + path);
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw_error(ErrorCode::kData, path + ": invalid JSON (" + e.what() + ")");
  }
  try {
    if (doc.at("format").get<std::string>() != kFormatTag) {
      throw_error(ErrorCode::kData, path + ": not a weight file");
    }
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw_error(ErrorCode::kData, path + ": unsupported version");
    }
    WeightNet net;
    net.input_width = doc.at("input_width").get<int>();
    for (const json& jl : doc.at("layers")) {
      DenseLayer layer;
      const Eigen::Index in_w = jl.at("in").get<Eigen::Index>();
      const Eigen::Index out_w = jl.at("out").get<Eigen::Index>();
      layer.activation = activation_from_name(jl.at("activation").get<std::string>());
      layer.skip_from = jl.at("skip_from").get<int>();
      const auto w = jl.at("weights").get<std::vector<double>>();
      const auto b = jl.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != in_w * out_w ||
          static_cast<Eigen::Index>(b.size()) != out_w) {
        throw_error(ErrorCode::kData, path + ": layer size mismatch");
      }
      layer.weights.resize(out_w, in_w);
      for (Eigen::Index r = 0; r < out_w; ++r) {
        for (Eigen::Index c = 0; c < in_w; ++c) {
          layer.weights(r, c) = w[static_cast<size_t>(r * in_w + c)];
        }
      }
      layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), out_w);
      net.layers.push_back(std::move(layer));
    }
    const std::string stored = doc.at("checksum").get<std::string>();
    if (stored != hex64(net.checksum())) {
      throw_error(ErrorCode::kData, path + ": checksum mismatch (corrupt weight file)");
    }
    return net;
  } catch (const json::exception& e) {
    throw_error(ErrorCode::kData, path + ": malformed weight file (" + std::string(e.what()) + ")");
  }
}

}  // namespace lrfkit
