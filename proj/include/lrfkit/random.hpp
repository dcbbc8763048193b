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

#ifndef LRFKIT_RANDOM_HPP_
#define LRFKIT_RANDOM_HPP_

#include <cstdint>
#include <random>

#include "lrfkit/types.hpp"

namespace lrfkit {

using Rng = std::mt19937_64;

/// Derives an independent stream from a base seed. Streams are decorrelated by
/// a splitmix-style mix so consumers can hand out seeds per purpose.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  uint64_t x = base + 0x9e3779b97f4a7c15ull * (stream + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

template <typename Scalar = double>
Vec3<Scalar> random_unit_vector(Rng& rng) {
  std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
  Vec3<Scalar> v;
  do {
    v << gauss(rng), gauss(rng), gauss(rng);
  } while (v.norm() < Scalar(1e-8));
  return v.normalized();
}

/// Uniform random rotation via a normalized Gaussian quaternion.
template <typename Scalar = double>
Mat3<Scalar> random_rotation(Rng& rng) {
  std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
  Eigen::Quaternion<Scalar> q;
  do {
    q = Eigen::Quaternion<Scalar>(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  } while (q.norm() < Scalar(1e-8));
  q.normalize();
  return q.toRotationMatrix();
}

template <typename Scalar = double>
RigidTransform<Scalar> random_rigid_transform(Rng& rng, Scalar translation_scale = Scalar(1)) {
  RigidTransform<Scalar> t;
  t.rotation = random_rotation<Scalar>(rng);
  std::uniform_real_distribution<Scalar> uni(Scalar(-1), Scalar(1));
  t.translation << uni(rng) * translation_scale, uni(rng) * translation_scale,
      uni(rng) * translation_scale;
  return t;
}

}  // namespace lrfkit

#endif  // LRFKIT_RANDOM_HPP_
