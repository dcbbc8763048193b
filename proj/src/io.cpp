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

#include "lrfkit/io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "lrfkit/error.hpp"

namespace lrfkit {
namespace {

struct PlyProperty {
  std::string name;
  std::string type;  // "float32", "float64", ... normalized
  bool list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  long count = 0;
  std::vector<PlyProperty> properties;
};

std::string normalize_type(const std::string& t) {
  if (t == "float" || t == "float32") return "float32";
  if (t == "double" || t == "float64") return "float64";
  if (t == "char" || t == "int8") return "int8";
  if (t == "uchar" || t == "uint8") return "uint8";
  if (t == "short" || t == "int16") return "int16";
  if (t == "ushort" || t == "uint16") return "uint16";
  if (t == "int" || t == "int32") return "int32";
  if (t == "uint" || t == "uint32") return "uint32";
  throw_error(ErrorCode::kData, "unsupported property type: " + t);
}

size_t type_size(const std::string& t) {
  if (t == "int8" || t == "uint8") return 1;
  if (t == "int16" || t == "uint16") return 2;
  if (t == "int32" || t == "uint32" || t == "float32") return 4;
  return 8;  // float64
}

double read_binary_scalar(std::istream& in, const std::string& type) {
  std::array<char, 8> buf{};
  const size_t n = type_size(type);
  in.read(buf.data(), static_cast<std::streamsize>(n));
  if (!in) {
    throw_error(ErrorCode::kData, "truncated binary data");
  }
  if (type == "float32") {
    float v;
    std::memcpy(&v, buf.data(), 4);
    return double(v);
  }
  if (type == "float64") {
    double v;
    std::memcpy(&v, buf.data(), 8);
    return v;
  }
  if (type == "int8") return double(int8_t(buf[0]));
  if (type == "uint8") return double(uint8_t(buf[0]));
  int64_t iv = 0;
  uint64_t uv = 0;
  if (type == "int16") {
    int16_t v;
    std::memcpy(&v, buf.data(), 2);
    iv = v;
  } else if (type == "uint16") {
    uint16_t v;
    std::memcpy(&v, buf.data(), 2);
    uv = v;
    return double(uv);
  } else if (type == "int32") {
    int32_t v;
    std::memcpy(&v, buf.data(), 4);
    iv = v;
  } else {  // uint32
    uint32_t v;
    std::memcpy(&v, buf.data(), 4);
    uv = v;
    return double(uv);
  }
  return double(iv);
}

}  // namespace

PointCloudd read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw_error(ErrorCode::kData, "cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw_error(ErrorCode::kData, path + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") {
    throw_error(ErrorCode::kData, path + ": missing ply magic");
  }

  PlyFormat format = PlyFormat::kAscii;
  bool have_format = false;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) {
      continue;
    }
    if (keyword == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii") {
        format = PlyFormat::kAscii;
      } else if (fmt == "binary_little_endian") {
        format = PlyFormat::kBinaryLittleEndian;
      } else {
        throw_error(ErrorCode::kData, path + ": unsupported format " + fmt);
      }
      have_format = true;
    } else if (keyword == "element") {
      PlyElement el;
      ls >> el.name >> el.count;
      elements.push_back(el);
    } else if (keyword == "property") {
      if (elements.empty()) {
        throw_error(ErrorCode::kData, path + ": property before element");
      }
      PlyProperty prop;
      std::string t;
      ls >> t;
      if (t == "list") {
        prop.list = true;
        std::string count_t, value_t;
        ls >> count_t >> value_t >> prop.name;
        prop.count_type = normalize_type(count_t);
        prop.type = normalize_type(value_t);
      } else {
        prop.type = normalize_type(t);
        ls >> prop.name;
      }
      elements.back().properties.push_back(prop);
    } else if (keyword == "end_header") {
      break;
    } else {
      throw_error(ErrorCode::kData, path + ": unknown header keyword " + keyword);
    }
  }
  if (!have_format) {
    throw_error(ErrorCode::kData, path + ": header has no format line");
  }

  PointCloudd cloud;
  for (const PlyElement& el : elements) {
    const bool is_vertex = (el.name == "vertex");
    int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
    for (size_t i = 0; i < el.properties.size(); ++i) {
      const std::string& n = el.properties[i].name;
      if (n == "x") ix = int(i);
      if (n == "y") iy = int(i);
      if (n == "z") iz = int(i);
      if (n == "nx") inx = int(i);
      if (n == "ny") iny = int(i);
      if (n == "nz") inz = int(i);
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) {
      throw_error(ErrorCode::kData, path + ": vertex element lacks x/y/z");
    }
    const bool has_normals = is_vertex && inx >= 0 && iny >= 0 && inz >= 0;
    if (is_vertex) {
      cloud.points.resize(el.count, 3);
      if (has_normals) cloud.normals.resize(el.count, 3);
    }

    std::vector<double> values(el.properties.size());
    for (long row = 0; row < el.count; ++row) {
      if (format == PlyFormat::kAscii) {
        std::string data_line;
        do {
          if (!std::getline(in, data_line)) {
            throw_error(ErrorCode::kData, path + ": truncated ascii data");
          }
        } while (data_line.find_first_not_of(" \t\r\n") == std::string::npos);
        std::istringstream ds(data_line);
        for (size_t i = 0; i < el.properties.size(); ++i) {
          if (el.properties[i].list) {
            long count;
            if (!(ds >> count)) throw_error(ErrorCode::kData, path + ": bad list count");
            double ignored;
            for (long k = 0; k < count; ++k) ds >> ignored;
            values[i] = 0;
          } else if (!(ds >> values[i])) {
            throw_error(ErrorCode::kData, path + ": bad ascii value");
          }
        }
      } else {
        for (size_t i = 0; i < el.properties.size(); ++i) {
          if (el.properties[i].list) {
            const long count =
                static_cast<long>(read_binary_scalar(in, el.properties[i].count_type));
            for (long k = 0; k < count; ++k) {
              read_binary_scalar(in, el.properties[i].type);
            }
            values[i] = 0;
          } else {
            values[i] = read_binary_scalar(in, el.properties[i].type);
          }
        }
      }
      if (is_vertex) {
        cloud.points(row, 0) = values[size_t(ix)];
        cloud.points(row, 1) = values[size_t(iy)];
        cloud.points(row, 2) = values[size_t(iz)];
        if (has_normals) {
          cloud.normals(row, 0) = values[size_t(inx)];
          cloud.normals(row, 1) = values[size_t(iny)];
          cloud.normals(row, 2) = values[size_t(inz)];
        }
      }
    }
  }
  if (cloud.points.rows() == 0) {
    throw_error(ErrorCode::kData, path + ": no vertex element");
  }
  return cloud;
}

void write_ply(const std::string& path, const PointCloudd& cloud, PlyFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw_error(ErrorCode::kData, "cannot write " + path);
  }
  const bool normals = cloud.has_normals();
  out << "ply\n"
      << "format "
      << (format == PlyFormat::kAscii ? "ascii" : "binary_little_endian") << " 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (normals) {
    out << "property double nx\nproperty double ny\nproperty double nz\n";
  }
  out << "end_header\n";

  if (format == PlyFormat::kAscii) {
    std::ostringstream body;
    body.precision(17);
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      body << cloud.points(i, 0) << ' ' << cloud.points(i, 1) << ' ' << cloud.points(i, 2);
      if (normals) {
        body << ' ' << cloud.normals(i, 0) << ' ' << cloud.normals(i, 1) << ' '
             << cloud.normals(i, 2);
      }
      body << '\n';
    }
    out << body.str();
  } else {
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      std::array<double, 6> row = {cloud.points(i, 0), cloud.points(i, 1), cloud.points(i, 2),
                                   0.0, 0.0, 0.0};
      size_t count = 3;
      if (normals) {
        row[3] = cloud.normals(i, 0);
        row[4] = cloud.normals(i, 1);
        row[5] = cloud.normals(i, 2);
        count = 6;
      }
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
    }
  }
  if (!out) {
    throw_error(ErrorCode::kData, "write failed for " + path);
  }
}

TriangleMeshd read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw_error(ErrorCode::kData, "cannot open " + path);
  }
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword) || keyword[0] == '#') continue;
    if (keyword == "v") {
      std::array<double, 3> v{};
      if (!(ls >> v[0] >> v[1] >> v[2])) {
        throw_error(ErrorCode::kData,
                    path + ":" + std::to_string(line_no) + ": malformed vertex");
      }
      vertices.push_back(v);
    } else if (keyword == "f") {
      std::vector<int> face;
      std::string token;
      while (ls >> token) {
        // Face tokens may carry texture/normal refs: v, v/vt, v//vn, v/vt/vn.
        const size_t slash = token.find('/');
        const std::string index_str = slash == std::string::npos ? token : token.substr(0, slash);
        long idx;
        try {
          idx = std::stol(index_str);
        } catch (const std::exception&) {
          throw_error(ErrorCode::kData,
                      path + ":" + std::to_string(line_no) + ": malformed face index");
        }
        if (idx < 0) {
          idx = static_cast<long>(vertices.size()) + idx;  // relative indexing
        } else {
          idx -= 1;  // OBJ is 1-based
        }
        if (idx < 0 || idx >= static_cast<long>(vertices.size())) {
          throw_error(ErrorCode::kData,
                      path + ":" + std::to_string(line_no) + ": face index out of range");
        }
        face.push_back(static_cast<int>(idx));
      }
      if (face.size() < 3) {
        throw_error(ErrorCode::kData,
                    path + ":" + std::to_string(line_no) + ": face with fewer than 3 vertices");
      }
      for (size_t k = 2; k < face.size(); ++k) {
        const std::array<int, 3> tri = {face[0], face[k - 1], face[k]};
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
          continue;  // degenerate
        }
        triangles.push_back(tri);
      }
    }
    // Other keywords (vn, vt, usemtl, o, g, s, mtllib, ...) are ignored.
  }
  if (vertices.empty()) {
    throw_error(ErrorCode::kData, path + ": no vertices");
  }
  TriangleMeshd mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(vertices.size()), 3);
  for (size_t i = 0; i < vertices.size(); ++i) {
    mesh.vertices.row(static_cast<Eigen::Index>(i)) << vertices[i][0], vertices[i][1],
        vertices[i][2];
  }
  mesh.triangles.resize(static_cast<Eigen::Index>(triangles.size()), 3);
  for (size_t i = 0; i < triangles.size(); ++i) {
    mesh.triangles.row(static_cast<Eigen::Index>(i)) << triangles[i][0], triangles[i][1],
        triangles[i][2];
  }
  return mesh;
}

void write_obj(const std::string& path, const TriangleMeshd& mesh) {
  std::ofstream out(path);
  if (!out) {
    throw_error(ErrorCode::kData, "cannot write " + path);
  }
  out.precision(17);
  for (Eigen::Index i = 0; i < mesh.vertex_count(); ++i) {
    out << "v " << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2)
        << '\n';
  }
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    out << "f " << mesh.triangles(t, 0) + 1 << ' ' << mesh.triangles(t, 1) + 1 << ' '
        << mesh.triangles(t, 2) + 1 << '\n';
  }
  if (!out) {
    throw_error(ErrorCode::kData, "write failed for " + path);
  }
}

}  // namespace lrfkit
