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

// lrftool: synthesize benchmark data, train the weight network, run the
// evaluation harnesses, and inspect weight files. One binary, four
// subcommands (synth, train, eval, info), JSON configs with per-flag
// overrides, CSV/JSON outputs. Deterministic per config and seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lrfkit/baselines.hpp"
#include "lrfkit/error.hpp"
#include "lrfkit/eval.hpp"
#include "lrfkit/geometry.hpp"
#include "lrfkit/io.hpp"
#include "lrfkit/kdtree.hpp"
#include "lrfkit/lrfnet.hpp"
#include "lrfkit/random.hpp"
#include "lrfkit/training.hpp"

namespace {

using nlohmann::ordered_json;
using namespace lrfkit;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidInput:
      return kExitConfig;
    case ErrorCode::kData:
    case ErrorCode::kInsufficientData:
    case ErrorCode::kEmptyPatch:
      return kExitData;
    case ErrorCode::kDegenerateGeometry:
    case ErrorCode::kTrainingDiverged:
    case ErrorCode::kPoseFailure:
      return kExitNumerical;
  }
  return kExitNumerical;
}

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string default_out_dir() {
  const char* env = std::getenv("LRFKIT_OUT_DIR");
  return (env != nullptr && env[0] != '\0') ? env : ".";
}

// ---------------------------------------------------------------------------
// JSON config plumbing
// ---------------------------------------------------------------------------

ordered_json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw_error(ErrorCode::kConfig, "config file not readable: " + path);
  }
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::kConfig, "config file " + path + ": " + e.what());
  }
}

void check_keys(const ordered_json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw_error(ErrorCode::kConfig, where + ": expected a JSON object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      std::string keys;
      for (const char* key : allowed) {
        if (!keys.empty()) keys += ", ";
        keys += key;
      }
      throw_error(ErrorCode::kConfig,
                  where + ": unknown key \"" + item.key() + "\" (known keys: " + keys + ")");
    }
  }
}

template <typename T>
void assign(const ordered_json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    obj.at(key).get_to(out);
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::kConfig, where + ": bad value for \"" + std::string(key) +
                                        "\": " + e.what());
  }
}

SurfaceKind parse_kind(const std::string& name) {
  for (SurfaceKind kind : {SurfaceKind::kPlaneWithBumps, SurfaceKind::kRidge,
                           SurfaceKind::kHemisphere, SurfaceKind::kRandomSmooth}) {
    if (name == surface_kind_name(kind)) return kind;
  }
  throw_error(ErrorCode::kConfig,
              "unknown surface kind \"" + name +
                  "\" (valid: plane-with-bumps, ridge, hemisphere, random-smooth)");
}

ChamferMode parse_chamfer(const std::string& name) {
  if (name == "min") return ChamferMode::kMin;
  if (name == "sum") return ChamferMode::kSum;
  throw_error(ErrorCode::kConfig, "unknown chamfer mode \"" + name + "\" (valid: min, sum)");
}

LrfVariant parse_variant(const std::string& name) {
  if (name == "sum1") return LrfVariant::kSum1;
  if (name == "sum2") return LrfVariant::kSum2;
  if (name == "max") return LrfVariant::kMax;
  throw_error(ErrorCode::kConfig, "unknown variant \"" + name + "\" (valid: sum1, sum2, max)");
}

const std::vector<std::string> kMethodNames = {"mian",   "shot",        "rops",       "toldi",
                                               "lrfnet", "lrfnet-sum2", "lrfnet-max", "uniform"};

bool method_needs_weights(const std::string& method) {
  return method == "lrfnet" || method == "lrfnet-sum2" || method == "lrfnet-max";
}

void validate_method(const std::string& method) {
  for (const std::string& name : kMethodNames) {
    if (method == name) return;
  }
  std::string names;
  for (const std::string& name : kMethodNames) {
    if (!names.empty()) names += ", ";
    names += name;
  }
  throw_error(ErrorCode::kConfig, "unknown method \"" + method + "\" (valid: " + names + ")");
}

// ---------------------------------------------------------------------------
// Ground-truth files
// ---------------------------------------------------------------------------

struct SceneSpec {
  std::string file;          // path, resolved against the ground-truth file's directory
  std::string perturbation;  // "none" | "noise" | "decimation"
  double level = 0.0;
};

struct GroundTruthFile {
  RigidTransformd model_to_scene;
  std::string model_file;
  std::string mesh_file;  // empty when the run wrote no mesh
  std::vector<SceneSpec> scenes;
};

ordered_json transform_to_json(const RigidTransformd& t) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < 3; ++i) {
    rows.push_back({t.rotation(i, 0), t.rotation(i, 1), t.rotation(i, 2)});
  }
  ordered_json out;
  out["rotation"] = rows;
  out["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
  return out;
}

RigidTransformd transform_from_json(const nlohmann::json& obj, const std::string& where) {
  RigidTransformd t;
  try {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        t.rotation(i, j) = obj.at("rotation").at(size_t(i)).at(size_t(j)).get<double>();
      }
      t.translation(i) = obj.at("translation").at(size_t(i)).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::kData, where + ": bad transform: " + e.what());
  }
  if (!is_rotation_matrix(t.rotation)) {
    throw_error(ErrorCode::kData, where + ": rotation is not a rotation matrix");
  }
  return t;
}

GroundTruthFile read_gt(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw_error(ErrorCode::kData, "ground-truth file not readable: " + path);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::kData, "ground-truth file " + path + ": " + e.what());
  }
  GroundTruthFile gt;
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  try {
    gt.model_to_scene = transform_from_json(doc.at("model_to_scene"), path);
    gt.model_file = (base / doc.at("model_file").get<std::string>()).string();
    if (doc.contains("mesh_file")) {
      gt.mesh_file = (base / doc.at("mesh_file").get<std::string>()).string();
    }
    for (const auto& entry : doc.at("scenes")) {
      SceneSpec spec;
      spec.file = (base / entry.at("file").get<std::string>()).string();
      spec.perturbation = entry.at("perturbation").get<std::string>();
      spec.level = entry.at("level").get<double>();
      gt.scenes.push_back(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::kData, "ground-truth file " + path + ": " + e.what());
  }
  if (gt.scenes.empty()) {
    throw_error(ErrorCode::kData, "ground-truth file " + path + ": no scenes listed");
  }
  return gt;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string out_dir = default_out_dir();
  std::string kind = "random-smooth";
  int n_points = 1000;
  int bumps = 6;
  int mesh_grid = 40;
  uint64_t seed = 0;
  double translation_scale = 1.0;
  std::vector<double> noise_levels_mr = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> decimation_fractions = {};
};

void synth_options_from_json(const ordered_json& doc, SynthOptions& opt) {
  check_keys(doc, "synth config",
             {"out_dir", "kind", "n_points", "bumps", "mesh_grid", "seed", "translation_scale",
              "noise_levels_mr", "decimation_fractions"});
  assign(doc, "out_dir", opt.out_dir, "synth config");
  assign(doc, "kind", opt.kind, "synth config");
  assign(doc, "n_points", opt.n_points, "synth config");
  assign(doc, "bumps", opt.bumps, "synth config");
  assign(doc, "mesh_grid", opt.mesh_grid, "synth config");
  assign(doc, "seed", opt.seed, "synth config");
  assign(doc, "translation_scale", opt.translation_scale, "synth config");
  assign(doc, "noise_levels_mr", opt.noise_levels_mr, "synth config");
  assign(doc, "decimation_fractions", opt.decimation_fractions, "synth config");
}

int run_synth(const SynthOptions& opt) {
  const SurfaceKind kind = parse_kind(opt.kind);
  if (opt.n_points < 2) {
    throw_error(ErrorCode::kConfig, "synth: n_points must be >= 2");
  }
  PointCloudd model = synth_surface(kind, opt.n_points, opt.seed, opt.bumps);
  cache_resolution(model);
  Rng transform_rng(derive_seed(opt.seed, 0xC001));
  const RigidTransformd model_to_scene =
      random_rigid_transform<double>(transform_rng, opt.translation_scale);
  const PointCloudd scene_exact = apply_transform(model, model_to_scene);

  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path dir(opt.out_dir);
  const std::string model_file = opt.kind + "-model.ply";
  write_ply((dir / model_file).string(), model);

  std::vector<SceneSpec> scenes;
  {
    SceneSpec spec{opt.kind + "-scene-exact.ply", "none", 0.0};
    write_ply((dir / spec.file).string(), scene_exact);
    scenes.push_back(spec);
  }
  for (size_t i = 0; i < opt.noise_levels_mr.size(); ++i) {
    const double level = opt.noise_levels_mr[i];
    const PointCloudd noisy = add_gaussian_noise(scene_exact, level * model.resolution_mr,
                                                 derive_seed(opt.seed, 0xC100 + i));
    SceneSpec spec{opt.kind + "-scene-noise-" + fmt_g(level) + ".ply", "noise", level};
    write_ply((dir / spec.file).string(), noisy);
    scenes.push_back(spec);
  }
  for (size_t i = 0; i < opt.decimation_fractions.size(); ++i) {
    const double fraction = opt.decimation_fractions[i];
    const PointCloudd sparse = decimate(scene_exact, fraction, derive_seed(opt.seed, 0xC200 + i));
    SceneSpec spec{opt.kind + "-scene-decim-" + fmt_g(fraction) + ".ply", "decimation", fraction};
    write_ply((dir / spec.file).string(), sparse);
    scenes.push_back(spec);
  }

  std::string mesh_file;
  if (opt.mesh_grid > 0) {
    const TriangleMeshd mesh = synth_surface_mesh(kind, opt.mesh_grid, opt.seed, opt.bumps);
    mesh_file = opt.kind + "-model.obj";
    write_obj((dir / mesh_file).string(), mesh);
  }

  ordered_json gt;
  gt["kind"] = opt.kind;
  gt["seed"] = opt.seed;
  gt["n_points"] = opt.n_points;
  gt["model_resolution_mr"] = model.resolution_mr;
  gt["model_file"] = model_file;
  if (!mesh_file.empty()) gt["mesh_file"] = mesh_file;
  gt["model_to_scene"] = transform_to_json(model_to_scene);
  gt["scenes"] = ordered_json::array();
  for (const SceneSpec& spec : scenes) {
    ordered_json entry;
    entry["file"] = spec.file;
    entry["perturbation"] = spec.perturbation;
    entry["level"] = spec.level;
    gt["scenes"].push_back(entry);
  }
  std::ofstream gt_out((dir / (opt.kind + "-gt.json")).string(), std::ios::binary);
  gt_out << gt.dump(2) << "\n";
  if (!gt_out) {
    throw_error(ErrorCode::kData, "synth: cannot write ground-truth file");
  }

  std::fprintf(stderr, "synth: wrote %zu scenes + model%s to %s\n", scenes.size(),
               mesh_file.empty() ? "" : " + mesh", opt.out_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
  std::string out_dir = default_out_dir();
  std::string weights_out = "weightnet.json";
  std::string loss_csv = "train-loss.csv";
  std::string resume_from;
  std::string kind = "random-smooth";
  int cloud_points = 3000;
  int bumps = 6;
  bool surface_seed_set = false;
  uint64_t surface_seed = 0;
  int n_pairs = 2000;
  double support_radius_mr = 8.0;
  double noise_sigma_mr = 0.1;
  double keep_fraction = 1.0;
  double translation_scale = 1.0;
  std::string chamfer = "min";
  std::string variant = "sum1";
  TrainConfig cfg;
};

void train_options_from_json(const ordered_json& doc, TrainOptions& opt) {
  check_keys(doc, "train config",
             {"out_dir",        "weights_out",      "loss_csv",          "resume_from",
              "kind",           "cloud_points",     "bumps",             "surface_seed",
              "n_pairs",        "support_radius_mr", "noise_sigma_mr",   "keep_fraction",
              "translation_scale", "batch_size",    "learning_rate",     "decay_per_epoch",
              "epochs",         "patch_points",     "chamfer",           "variant",
              "hidden_widths",  "z_subset_fraction", "seed"});
  assign(doc, "out_dir", opt.out_dir, "train config");
  assign(doc, "weights_out", opt.weights_out, "train config");
  assign(doc, "loss_csv", opt.loss_csv, "train config");
  assign(doc, "resume_from", opt.resume_from, "train config");
  assign(doc, "kind", opt.kind, "train config");
  assign(doc, "cloud_points", opt.cloud_points, "train config");
  assign(doc, "bumps", opt.bumps, "train config");
  if (doc.contains("surface_seed")) {
    opt.surface_seed_set = true;
    assign(doc, "surface_seed", opt.surface_seed, "train config");
  }
  assign(doc, "n_pairs", opt.n_pairs, "train config");
  assign(doc, "support_radius_mr", opt.support_radius_mr, "train config");
  assign(doc, "noise_sigma_mr", opt.noise_sigma_mr, "train config");
  assign(doc, "keep_fraction", opt.keep_fraction, "train config");
  assign(doc, "translation_scale", opt.translation_scale, "train config");
  assign(doc, "batch_size", opt.cfg.batch_size, "train config");
  assign(doc, "learning_rate", opt.cfg.learning_rate, "train config");
  assign(doc, "decay_per_epoch", opt.cfg.decay_per_epoch, "train config");
  assign(doc, "epochs", opt.cfg.epochs, "train config");
  assign(doc, "patch_points", opt.cfg.n_points, "train config");
  assign(doc, "chamfer", opt.chamfer, "train config");
  assign(doc, "variant", opt.variant, "train config");
  assign(doc, "hidden_widths", opt.cfg.lrfnet.hidden_widths, "train config");
  assign(doc, "z_subset_fraction", opt.cfg.lrfnet.z_subset_fraction, "train config");
  assign(doc, "seed", opt.cfg.seed, "train config");
}

int run_train(const TrainOptions& opt_in) {
  TrainOptions opt = opt_in;
  opt.cfg.chamfer = parse_chamfer(opt.chamfer);
  opt.cfg.variant = parse_variant(opt.variant);
  opt.cfg.validate();
  const SurfaceKind kind = parse_kind(opt.kind);
  const uint64_t surface_seed = opt.surface_seed_set ? opt.surface_seed : opt.cfg.seed;

  PointCloudd model = synth_surface(kind, opt.cloud_points, surface_seed, opt.bumps);
  cache_resolution(model);
  Rng transform_rng(derive_seed(opt.cfg.seed, 0xD001));
  const RigidTransformd model_to_scene =
      random_rigid_transform<double>(transform_rng, opt.translation_scale);
  const double r = opt.support_radius_mr * model.resolution_mr;

  std::fprintf(stderr, "train: generating %d pairs (r = %.4g, noise %.3g mr)\n", opt.n_pairs, r,
               opt.noise_sigma_mr);
  const std::vector<PatchPair> pairs = generate_pairs(model, model_to_scene, opt.n_pairs, r,
                                                      opt.cfg, opt.noise_sigma_mr,
                                                      opt.keep_fraction);

  TrainResult result;
  if (!opt.resume_from.empty()) {
    const WeightNet initial = load_weightnet(opt.resume_from);
    std::fprintf(stderr, "train: resuming from %s\n", opt.resume_from.c_str());
    result = train(pairs, opt.cfg, &initial);
  } else {
    result = train(pairs, opt.cfg);
  }
  for (const EpochStats& es : result.epochs) {
    std::fprintf(stderr, "train: epoch %2d  mean_loss %.6g  skipped %d  lr %.6g\n", es.epoch,
                 es.mean_loss, es.skipped_pairs, es.lr);
  }

  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path dir(opt.out_dir);
  save_weightnet(result.net, (dir / opt.weights_out).string());

  std::ofstream csv((dir / opt.loss_csv).string(), std::ios::binary);
  csv << "epoch,mean_loss,skipped_pairs,lr\n";
  for (const EpochStats& es : result.epochs) {
    csv << es.epoch << "," << fmt_g17(es.mean_loss) << "," << es.skipped_pairs << ","
        << fmt_g17(es.lr) << "\n";
  }
  if (!csv) {
    throw_error(ErrorCode::kData, "train: cannot write loss CSV");
  }
  std::fprintf(stderr, "train: wrote %s and %s in %s\n", opt.weights_out.c_str(),
               opt.loss_csv.c_str(), opt.out_dir.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string out_dir = default_out_dir();
  std::string gt_json;
  std::string weights;
  std::string scene;  // match/pose: scene file name from the ground-truth list; empty = first
  std::vector<std::string> methods = {"shot", "toldi"};
  double support_radius_mr = 8.0;
  int n_keypoints = 1000;
  int bins = 4;
  std::vector<double> thresholds;
  int iterations = 100;
  int iterations3 = 1000;
  double inlier_radius_mr = 2.0;
  int patch_points = 256;
  double z_subset_fraction = 1.0 / 3.0;
  uint64_t seed = 0;
};

void eval_options_from_json(const ordered_json& doc, EvalOptions& opt) {
  check_keys(doc, "eval config",
             {"out_dir", "gt_json", "weights", "scene", "methods", "support_radius_mr",
              "n_keypoints", "bins", "thresholds", "iterations", "iterations3",
              "inlier_radius_mr", "patch_points", "z_subset_fraction", "seed"});
  assign(doc, "out_dir", opt.out_dir, "eval config");
  assign(doc, "gt_json", opt.gt_json, "eval config");
  assign(doc, "weights", opt.weights, "eval config");
  assign(doc, "scene", opt.scene, "eval config");
  assign(doc, "methods", opt.methods, "eval config");
  assign(doc, "support_radius_mr", opt.support_radius_mr, "eval config");
  assign(doc, "n_keypoints", opt.n_keypoints, "eval config");
  assign(doc, "bins", opt.bins, "eval config");
  assign(doc, "thresholds", opt.thresholds, "eval config");
  assign(doc, "iterations", opt.iterations, "eval config");
  assign(doc, "iterations3", opt.iterations3, "eval config");
  assign(doc, "inlier_radius_mr", opt.inlier_radius_mr, "eval config");
  assign(doc, "patch_points", opt.patch_points, "eval config");
  assign(doc, "z_subset_fraction", opt.z_subset_fraction, "eval config");
  assign(doc, "seed", opt.seed, "eval config");
}

/// Per-scene inputs shared by every method when building frame estimators.
struct EvalContext {
  const WeightNet* net = nullptr;
  LrfNetConfig net_cfg;
  const TriangleMeshd* model_mesh = nullptr;
  const TriangleMeshd* scene_mesh = nullptr;
  double r = 0.0;
};

LrfFn make_lrf_fn(const std::string& method, bool scene_side, const EvalContext& ctx) {
  if (method == "mian") {
    return [](const LocalPatchd& patch, const Vec3d& keypoint) {
      return lrf_mian(patch, keypoint, estimate_normal(patch, keypoint));
    };
  }
  if (method == "shot") {
    return [](const LocalPatchd& patch, const Vec3d& keypoint) {
      return lrf_shot(patch, keypoint);
    };
  }
  if (method == "toldi") {
    return [](const LocalPatchd& patch, const Vec3d& keypoint) {
      return lrf_toldi(patch, keypoint, estimate_normal(patch, keypoint));
    };
  }
  if (method == "rops") {
    const TriangleMeshd* mesh = scene_side ? ctx.scene_mesh : ctx.model_mesh;
    const double r = ctx.r;
    return [mesh, r](const LocalPatchd&, const Vec3d& keypoint) {
      return lrf_rops(*mesh, keypoint, r);
    };
  }
  if (method == "uniform") {
    const LrfNetConfig cfg = ctx.net_cfg;
    return [cfg](const LocalPatchd& patch, const Vec3d& keypoint) {
      return estimate_lrf_uniform(patch, keypoint, cfg);
    };
  }
  const WeightNet* net = ctx.net;
  const LrfNetConfig cfg = ctx.net_cfg;
  LrfVariant variant = LrfVariant::kSum1;
  if (method == "lrfnet-sum2") variant = LrfVariant::kSum2;
  if (method == "lrfnet-max") variant = LrfVariant::kMax;
  return [net, cfg, variant](const LocalPatchd& patch, const Vec3d& keypoint) {
    return estimate_lrf(*net, patch, keypoint, cfg, variant);
  };
}

/// Scene mesh for the triangle-based method: the model mesh carried through
/// the ground-truth transform, with per-vertex noise matching a noisy scene's
/// level so the mesh sees the same perturbation class as the point cloud.
TriangleMeshd make_scene_mesh(const TriangleMeshd& model_mesh, const RigidTransformd& gt,
                              const SceneSpec& spec, double mr, uint64_t seed) {
  TriangleMeshd scene_mesh;
  scene_mesh.triangles = model_mesh.triangles;
  scene_mesh.vertices =
      (model_mesh.vertices * gt.rotation.transpose()).rowwise() + gt.translation.transpose();
  if (spec.perturbation == "noise" && spec.level > 0.0) {
    Rng rng(derive_seed(seed, 0xC300));
    std::normal_distribution<double> gauss(0.0, spec.level * mr);
    for (Eigen::Index i = 0; i < scene_mesh.vertices.rows(); ++i) {
      for (int j = 0; j < 3; ++j) {
        scene_mesh.vertices(i, j) += gauss(rng);
      }
    }
  }
  return scene_mesh;
}

/// Corresponding keypoint pairs: uniformly sampled model indices whose
/// ground-truth-mapped position has a scene point within one resolution unit.
struct KeypointPairs {
  std::vector<int> model_indices;
  std::vector<int> scene_indices;
};

KeypointPairs sample_keypoint_pairs(const PointCloudd& model, const KdTree3d& scene_tree,
                                    const RigidTransformd& model_to_scene, int n_keypoints,
                                    double mr, uint64_t seed) {
  const int n = static_cast<int>(model.size());
  const int wanted = std::min(n_keypoints, n);
  std::vector<int> indices(static_cast<size_t>(n));
  std::iota(indices.begin(), indices.end(), 0);
  Rng rng(derive_seed(seed, 0xE777));
  KeypointPairs pairs;
  for (int i = 0; i < wanted; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(indices[static_cast<size_t>(i)], indices[static_cast<size_t>(pick(rng))]);
    const int model_index = indices[static_cast<size_t>(i)];
    const Vec3d mapped = model_to_scene(Vec3d(model.points.row(model_index).transpose()));
    double sq = 0.0;
    const int scene_index = scene_tree.nearest(mapped, &sq);
    if (std::sqrt(sq) > mr) continue;
    pairs.model_indices.push_back(model_index);
    pairs.scene_indices.push_back(scene_index);
  }
  return pairs;
}

/// Frames on both sides of each sampled pair; pairs where either side is
/// degenerate are dropped from all outputs in lockstep.
struct FrameSet {
  PointMatrixd model_keypoints;
  PointMatrixd scene_keypoints;
  std::vector<Lrfd> model_frames;
  std::vector<Lrfd> scene_frames;
  std::vector<LocalPatchd> model_patches;
  std::vector<LocalPatchd> scene_patches;
};

FrameSet build_frames(const PointCloudd& model, const KdTree3d& model_tree,
                      const PointCloudd& scene, const KdTree3d& scene_tree,
                      const KeypointPairs& pairs, const LrfFn& model_fn, const LrfFn& scene_fn,
                      double r) {
  FrameSet set;
  std::vector<Vec3d> mkp, skp;
  for (size_t k = 0; k < pairs.model_indices.size(); ++k) {
    try {
      const int mi = pairs.model_indices[k];
      const int si = pairs.scene_indices[k];
      const Vec3d pm = model.points.row(mi).transpose();
      const Vec3d ps = scene.points.row(si).transpose();
      LocalPatchd model_patch = extract_patch(model, model_tree, mi, r);
      LocalPatchd scene_patch = extract_patch(scene, scene_tree, si, r);
      const Lrfd lm = model_fn(model_patch, pm);
      const Lrfd ls = scene_fn(scene_patch, ps);
      mkp.push_back(pm);
      skp.push_back(ps);
      set.model_frames.push_back(lm);
      set.scene_frames.push_back(ls);
      set.model_patches.push_back(std::move(model_patch));
      set.scene_patches.push_back(std::move(scene_patch));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kDegenerateGeometry || e.code() == ErrorCode::kEmptyPatch) {
        continue;
      }
      throw;
    }
  }
  set.model_keypoints.resize(static_cast<Eigen::Index>(mkp.size()), 3);
  set.scene_keypoints.resize(static_cast<Eigen::Index>(skp.size()), 3);
  for (size_t k = 0; k < mkp.size(); ++k) {
    set.model_keypoints.row(static_cast<Eigen::Index>(k)) = mkp[k].transpose();
    set.scene_keypoints.row(static_cast<Eigen::Index>(k)) = skp[k].transpose();
  }
  return set;
}

const SceneSpec& select_scene(const GroundTruthFile& gt, const std::string& wanted) {
  if (wanted.empty()) return gt.scenes.front();
  for (const SceneSpec& spec : gt.scenes) {
    if (std::filesystem::path(spec.file).filename() == wanted) return spec;
  }
  throw_error(ErrorCode::kConfig, "eval: scene \"" + wanted + "\" is not in the ground-truth list");
}

int run_eval(const EvalOptions& opt, const std::string& mode) {
  if (opt.gt_json.empty()) {
    throw_error(ErrorCode::kConfig, "eval: gt_json is required");
  }
  if (opt.methods.empty()) {
    throw_error(ErrorCode::kConfig, "eval: need at least one method");
  }
  for (const std::string& method : opt.methods) {
    validate_method(method);
  }
  const GroundTruthFile gt = read_gt(opt.gt_json);

  bool wants_weights = false;
  bool wants_mesh = false;
  for (const std::string& method : opt.methods) {
    wants_weights = wants_weights || method_needs_weights(method);
    wants_mesh = wants_mesh || method == "rops";
  }
  if (wants_weights && opt.weights.empty()) {
    throw_error(ErrorCode::kConfig, "eval: a weights file is required for the lrfnet methods");
  }
  if (wants_mesh && gt.mesh_file.empty()) {
    throw_error(ErrorCode::kConfig,
                "eval: method rops needs a mesh; synthesize with mesh_grid > 0");
  }

  PointCloudd model = read_ply(gt.model_file);
  cache_resolution(model);
  const double mr = model.resolution_mr;
  const double r = opt.support_radius_mr * mr;
  const KdTree3d model_tree(model.points);

  WeightNet net;
  EvalContext ctx;
  ctx.r = r;
  ctx.net_cfg.n_points = opt.patch_points;
  ctx.net_cfg.z_subset_fraction = opt.z_subset_fraction;
  ctx.net_cfg.seed = opt.seed;
  if (wants_weights) {
    net = load_weightnet(opt.weights);
    ctx.net = &net;
  }
  TriangleMeshd model_mesh;
  if (wants_mesh) {
    model_mesh = read_obj(gt.mesh_file);
    ctx.model_mesh = &model_mesh;
  }

  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path dir(opt.out_dir);

  if (mode == "repeat") {
    std::ofstream csv((dir / "repeat.csv").string(), std::ios::binary);
    csv << "method,perturbation,level,mean_meancos,n_valid\n";
    for (const SceneSpec& spec : gt.scenes) {
      PointCloudd scene = read_ply(spec.file);
      TriangleMeshd scene_mesh;
      if (wants_mesh) {
        scene_mesh = make_scene_mesh(model_mesh, gt.model_to_scene, spec, mr, opt.seed);
        ctx.scene_mesh = &scene_mesh;
      }
      for (const std::string& method : opt.methods) {
        const LrfFn model_fn = make_lrf_fn(method, false, ctx);
        const LrfFn scene_fn = make_lrf_fn(method, true, ctx);
        const RepeatabilityResult result = repeatability_experiment(
            model, scene, gt.model_to_scene, model_fn, scene_fn, opt.n_keypoints, r, opt.seed);
        csv << method << "," << spec.perturbation << "," << fmt_g17(spec.level) << ","
            << fmt_g17(result.mean_meancos) << "," << result.n_valid << "\n";
        std::fprintf(stderr, "eval repeat: %s %s %s -> %.6f over %d keypoints\n", method.c_str(),
                     spec.perturbation.c_str(), fmt_g(spec.level).c_str(), result.mean_meancos,
                     result.n_valid);
      }
    }
    if (!csv) {
      throw_error(ErrorCode::kData, "eval: cannot write repeat.csv");
    }
    return kExitOk;
  }

  // match and pose run against one scene.
  const SceneSpec& spec = select_scene(gt, opt.scene);
  PointCloudd scene = read_ply(spec.file);
  const KdTree3d scene_tree(scene.points);
  TriangleMeshd scene_mesh;
  if (wants_mesh) {
    scene_mesh = make_scene_mesh(model_mesh, gt.model_to_scene, spec, mr, opt.seed);
    ctx.scene_mesh = &scene_mesh;
  }
  const KeypointPairs pairs = sample_keypoint_pairs(model, scene_tree, gt.model_to_scene,
                                                    opt.n_keypoints, mr, opt.seed);
  if (pairs.model_indices.empty()) {
    throw_error(ErrorCode::kInsufficientData, "eval: no corresponding keypoints in the overlap");
  }

  if (mode == "match") {
    std::vector<double> thresholds = opt.thresholds;
    if (thresholds.empty()) {
      for (int k = 1; k <= 20; ++k) thresholds.push_back(0.05 * double(k));
    }
    std::ofstream csv((dir / "rpc.csv").string(), std::ios::binary);
    csv << "method,threshold,recall,one_minus_precision\n";
    for (const std::string& method : opt.methods) {
      const FrameSet frames =
          build_frames(model, model_tree, scene, scene_tree, pairs,
                       make_lrf_fn(method, false, ctx), make_lrf_fn(method, true, ctx), r);
      std::vector<Eigen::VectorXd> model_desc, scene_desc;
      std::vector<std::pair<int, int>> gt_matches;
      for (size_t k = 0; k < frames.model_frames.size(); ++k) {
        model_desc.push_back(simple_descriptor(frames.model_patches[k],
                                               Vec3d(frames.model_keypoints.row(k).transpose()),
                                               frames.model_frames[k], opt.bins));
        scene_desc.push_back(simple_descriptor(frames.scene_patches[k],
                                               Vec3d(frames.scene_keypoints.row(k).transpose()),
                                               frames.scene_frames[k], opt.bins));
        gt_matches.emplace_back(static_cast<int>(k), static_cast<int>(k));
      }
      const std::vector<RpcPoint> curve = rpc_curve(model_desc, scene_desc, gt_matches,
                                                    thresholds);
      for (const RpcPoint& point : curve) {
        csv << method << "," << fmt_g17(point.threshold) << "," << fmt_g17(point.recall) << ","
            << fmt_g17(point.one_minus_precision) << "\n";
      }
      std::fprintf(stderr, "eval match: %s over %zu pairs\n", method.c_str(), model_desc.size());
    }
    if (!csv) {
      throw_error(ErrorCode::kData, "eval: cannot write rpc.csv");
    }
    return kExitOk;
  }

  if (mode == "pose") {
    const RigidTransformd gt_pose = gt.model_to_scene.inverse();
    std::ofstream csv((dir / "pose.csv").string(), std::ios::binary);
    csv << "method,err_r_deg,err_t_mr,iters\n";
    PointMatrixd first_model_keypoints, first_scene_keypoints;
    for (const std::string& method : opt.methods) {
      const FrameSet frames =
          build_frames(model, model_tree, scene, scene_tree, pairs,
                       make_lrf_fn(method, false, ctx), make_lrf_fn(method, true, ctx), r);
      std::vector<Correspondence> correspondences;
      for (size_t k = 0; k < frames.model_frames.size(); ++k) {
        Correspondence c;
        c.model_index = static_cast<int>(k);
        c.scene_index = static_cast<int>(k);
        correspondences.push_back(c);
      }
      if (correspondences.empty()) {
        throw_error(ErrorCode::kInsufficientData,
                    "eval pose: no usable correspondences for method " + method);
      }
      if (first_model_keypoints.rows() == 0) {
        first_model_keypoints = frames.model_keypoints;
        first_scene_keypoints = frames.scene_keypoints;
      }
      const PoseEstimate estimate = one_point_ransac(
          correspondences, frames.model_keypoints, frames.scene_keypoints, frames.model_frames,
          frames.scene_frames, opt.iterations, opt.inlier_radius_mr, mr, gt_pose, opt.seed);
      csv << method << "," << fmt_g17(estimate.err_r_deg) << "," << fmt_g17(estimate.err_t_mr)
          << "," << estimate.iterations_used << "\n";
      std::fprintf(stderr, "eval pose: %s err_r %.4g deg err_t %.4g mr (%d inliers)\n",
                   method.c_str(), estimate.err_r_deg, estimate.err_t_mr, estimate.inliers);
    }
    // Classical three-point baseline on the first method's keypoint pairs
    // (frames are not used, only the correspondence geometry).
    {
      std::vector<Correspondence> correspondences;
      for (Eigen::Index k = 0; k < first_model_keypoints.rows(); ++k) {
        Correspondence c;
        c.model_index = static_cast<int>(k);
        c.scene_index = static_cast<int>(k);
        correspondences.push_back(c);
      }
      const PoseEstimate estimate =
          ransac3_baseline(correspondences, first_model_keypoints, first_scene_keypoints,
                           opt.iterations3, opt.inlier_radius_mr, mr, gt_pose, opt.seed);
      csv << "ransac3," << fmt_g17(estimate.err_r_deg) << "," << fmt_g17(estimate.err_t_mr) << ","
          << estimate.iterations_used << "\n";
      std::fprintf(stderr, "eval pose: ransac3 err_r %.4g deg err_t %.4g mr (%d inliers)\n",
                   estimate.err_r_deg, estimate.err_t_mr, estimate.inliers);
    }
    if (!csv) {
      throw_error(ErrorCode::kData, "eval: cannot write pose.csv");
    }
    return kExitOk;
  }

  throw_error(ErrorCode::kConfig, "eval: unknown mode \"" + mode +
                                      "\" (valid: repeat, match, pose)");
}

// ---------------------------------------------------------------------------
// info
// ---------------------------------------------------------------------------

int run_info(const std::string& path) {
  const WeightNet net = load_weightnet(path);
  std::printf("input_width: %d\n", net.input_width);
  std::printf("layers:\n");
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const DenseLayer& layer = net.layers[i];
    std::printf("  [%zu] in=%d out=%d activation=%s", i, static_cast<int>(layer.in_width()),
                static_cast<int>(layer.out_width()),
                layer.activation == Activation::kRelu ? "relu" : "sigmoid");
    if (layer.skip_from >= 0) {
      std::printf(" skip_from=%d", layer.skip_from);
    }
    std::printf("\n");
  }
  std::printf("parameters: %lld\n", static_cast<long long>(net.parameter_count()));
  std::printf("checksum: %016llx\n", static_cast<unsigned long long>(net.checksum()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local reference frames for point-cloud patches: data synthesis, training, "
               "evaluation, and weight-file inspection"};
  app.require_subcommand(1);

  // synth
  SynthOptions synth_opt;
  std::string synth_config;
  CLI::App* synth = app.add_subcommand("synth", "Write synthetic model/scene PLY pairs + GT JSON");
  auto* synth_config_flag = synth->add_option("--config", synth_config, "JSON config file");
  auto* synth_out = synth->add_option("--out-dir", synth_opt.out_dir, "Output directory");
  auto* synth_kind = synth->add_option("--kind", synth_opt.kind, "Surface kind");
  auto* synth_n = synth->add_option("--n-points", synth_opt.n_points, "Points in the model cloud");
  auto* synth_seed = synth->add_option("--seed", synth_opt.seed, "Seed (overrides config)");
  auto* synth_noise = synth->add_option("--noise-levels-mr", synth_opt.noise_levels_mr,
                                        "Noise sigmas in mr units");
  auto* synth_decim = synth->add_option("--decimation-fractions", synth_opt.decimation_fractions,
                                        "Decimation keep fractions");
  auto* synth_mesh = synth->add_option("--mesh-grid", synth_opt.mesh_grid,
                                       "Mesh grid resolution (0 = no OBJ)");

  // train
  TrainOptions train_opt;
  std::string train_config;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the weight network, write JSON + CSV");
  auto* train_config_flag = train_cmd->add_option("--config", train_config, "JSON config file");
  auto* train_out = train_cmd->add_option("--out-dir", train_opt.out_dir, "Output directory");
  auto* train_seed = train_cmd->add_option("--seed", train_opt.cfg.seed,
                                           "Seed (overrides config)");
  auto* train_epochs = train_cmd->add_option("--epochs", train_opt.cfg.epochs, "Epoch count");
  auto* train_pairs_n = train_cmd->add_option("--n-pairs", train_opt.n_pairs, "Training pairs");
  auto* train_resume = train_cmd->add_option("--resume-from", train_opt.resume_from,
                                             "Weight file to resume from");

  // eval
  EvalOptions eval_opt;
  std::string eval_mode;
  std::string eval_config;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Run an evaluation harness, write CSV");
  eval_cmd->add_option("mode", eval_mode, "repeat | match | pose")->required();
  auto* eval_config_flag = eval_cmd->add_option("--config", eval_config, "JSON config file");
  auto* eval_out = eval_cmd->add_option("--out-dir", eval_opt.out_dir, "Output directory");
  auto* eval_gt = eval_cmd->add_option("--gt-json", eval_opt.gt_json, "Ground-truth JSON file");
  auto* eval_weights = eval_cmd->add_option("--weights", eval_opt.weights, "Weight network file");
  auto* eval_methods = eval_cmd->add_option("--methods", eval_opt.methods, "LRF methods");
  auto* eval_scene = eval_cmd->add_option("--scene", eval_opt.scene,
                                          "Scene file name (match/pose; default: first listed)");
  auto* eval_keypoints = eval_cmd->add_option("--n-keypoints", eval_opt.n_keypoints,
                                              "Keypoints to sample");
  auto* eval_seed = eval_cmd->add_option("--seed", eval_opt.seed, "Seed (overrides config)");

  // info
  std::string info_path;
  CLI::App* info_cmd = app.add_subcommand("info", "Describe a weight network file");
  info_cmd->add_option("file", info_path, "Weight network JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth->parsed()) {
      if (synth_config_flag->count() > 0) {
        SynthOptions from_file;
        synth_options_from_json(load_config_file(synth_config), from_file);
        // Flags override the config file.
        if (synth_out->count() > 0) from_file.out_dir = synth_opt.out_dir;
        if (synth_kind->count() > 0) from_file.kind = synth_opt.kind;
        if (synth_n->count() > 0) from_file.n_points = synth_opt.n_points;
        if (synth_seed->count() > 0) from_file.seed = synth_opt.seed;
        if (synth_noise->count() > 0) from_file.noise_levels_mr = synth_opt.noise_levels_mr;
        if (synth_decim->count() > 0) from_file.decimation_fractions = synth_opt.decimation_fractions;
        if (synth_mesh->count() > 0) from_file.mesh_grid = synth_opt.mesh_grid;
        return run_synth(from_file);
      }
      return run_synth(synth_opt);
    }
    if (train_cmd->parsed()) {
      if (train_config_flag->count() > 0) {
        TrainOptions from_file;
        train_options_from_json(load_config_file(train_config), from_file);
        if (train_out->count() > 0) from_file.out_dir = train_opt.out_dir;
        if (train_seed->count() > 0) from_file.cfg.seed = train_opt.cfg.seed;
        if (train_epochs->count() > 0) from_file.cfg.epochs = train_opt.cfg.epochs;
        if (train_pairs_n->count() > 0) from_file.n_pairs = train_opt.n_pairs;
        if (train_resume->count() > 0) from_file.resume_from = train_opt.resume_from;
        return run_train(from_file);
      }
      return run_train(train_opt);
    }
    if (eval_cmd->parsed()) {
      if (eval_config_flag->count() > 0) {
        EvalOptions from_file;
        eval_options_from_json(load_config_file(eval_config), from_file);
        if (eval_out->count() > 0) from_file.out_dir = eval_opt.out_dir;
        if (eval_gt->count() > 0) from_file.gt_json = eval_opt.gt_json;
        if (eval_weights->count() > 0) from_file.weights = eval_opt.weights;
        if (eval_methods->count() > 0) from_file.methods = eval_opt.methods;
        if (eval_scene->count() > 0) from_file.scene = eval_opt.scene;
        if (eval_keypoints->count() > 0) from_file.n_keypoints = eval_opt.n_keypoints;
        if (eval_seed->count() > 0) from_file.seed = eval_opt.seed;
        return run_eval(from_file, eval_mode);
      }
      return run_eval(eval_opt, eval_mode);
    }
    if (info_cmd->parsed()) {
      return run_info(info_path);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "lrftool: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lrftool: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitConfig;
}
