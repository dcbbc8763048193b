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

#ifndef LRFKIT_IO_HPP_
#define LRFKIT_IO_HPP_

#include <string>

#include "lrfkit/types.hpp"

namespace lrfkit {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

/// Reads a PLY vertex element with x/y/z (and optionally nx/ny/nz)
/// properties, ASCII or binary_little_endian, float or double precision.
/// Non-vertex elements are skipped.
PointCloudd read_ply(const std::string& path);

/// Writes the cloud's points (and normals, when present) as double-precision
/// PLY.
void write_ply(const std::string& path, const PointCloudd& cloud,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);

/// Reads vertices and faces from a Wavefront OBJ file. Faces with more than
/// three vertices are fan-triangulated; degenerate (repeated-index) triangles
/// are dropped.
TriangleMeshd read_obj(const std::string& path);

/// Writes a Wavefront OBJ file (vertices and triangular faces).
void write_obj(const std::string& path, const TriangleMeshd& mesh);

}  // namespace lrfkit

#endif  // LRFKIT_IO_HPP_
