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

#ifndef LRFKIT_KDTREE_HPP_
#define LRFKIT_KDTREE_HPP_

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "lrfkit/types.hpp"

namespace lrfkit {

/// Static 3D k-d tree over a point matrix. Radius queries return indices in
/// ascending order with the boundary included (d <= r); nearest queries break
/// exact distance ties toward the smaller index.
template <typename Scalar = double>
class KdTree3 {
 public:
  explicit KdTree3(PointMatrix<Scalar> points) : points_(std::move(points)) {
    const int n = static_cast<int>(points_.rows());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    if (n > 0) {
      nodes_.reserve(2 * n / kLeafSize + 2);
      root_ = build(0, n);
    }
  }

  const PointMatrix<Scalar>& points() const { return points_; }

  std::vector<int> radius_search(const Vec3<Scalar>& center, Scalar radius) const {
    std::vector<int> found;
    if (root_ >= 0) {
      search_radius(root_, center, radius * radius, found);
    }
    std::sort(found.begin(), found.end());
    return found;
  }

  /// Index of the closest point, or -1 for an empty tree. `sq_dist_out`
  /// receives the squared distance when non-null.
  int nearest(const Vec3<Scalar>& query, Scalar* sq_dist_out = nullptr) const {
    int best = -1;
    Scalar best_sq = std::numeric_limits<Scalar>::infinity();
    if (root_ >= 0) {
      search_nearest(root_, query, best, best_sq);
    }
    if (sq_dist_out != nullptr) {
      *sq_dist_out = best_sq;
    }
    return best;
  }

 private:
  static constexpr int kLeafSize = 16;

  struct Node {
    int axis = -1;  // -1 marks a leaf
    Scalar split = Scalar(0);
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;
  };

  int build(int begin, int end) {
    Node node;
    node.begin = begin;
    node.end = end;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) {
      return id;
    }

    Vec3<Scalar> lo = Vec3<Scalar>::Constant(std::numeric_limits<Scalar>::infinity());
    Vec3<Scalar> hi = -lo;
    for (int i = begin; i < end; ++i) {
      const Vec3<Scalar> p = points_.row(order_[i]).transpose();
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] <= lo[axis]) {
      return id;  // all points coincide; keep as a leaf
    }

    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return points_(a, axis) < points_(b, axis); });

    nodes_[id].axis = axis;
    nodes_[id].split = points_(order_[mid], axis);
    nodes_[id].left = build(begin, mid);
    nodes_[id].right = build(mid, end);
    return id;
  }

  void search_radius(int id, const Vec3<Scalar>& center, Scalar sq_radius,
                     std::vector<int>& found) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        const Scalar sq = (points_.row(idx).transpose() - center).squaredNorm();
        if (sq <= sq_radius) {
          found.push_back(idx);
        }
      }
      return;
    }
    const Scalar delta = center[node.axis] - node.split;
    if (delta * delta <= sq_radius) {
      search_radius(node.left, center, sq_radius, found);
      search_radius(node.right, center, sq_radius, found);
    } else if (delta < Scalar(0)) {
      search_radius(node.left, center, sq_radius, found);
    } else {
      search_radius(node.right, center, sq_radius, found);
    }
  }

  void search_nearest(int id, const Vec3<Scalar>& query, int& best, Scalar& best_sq) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        const Scalar sq = (points_.row(idx).transpose() - query).squaredNorm();
        if (sq < best_sq || (sq == best_sq && idx < best)) {
          best = idx;
          best_sq = sq;
        }
      }
      return;
    }
    const Scalar delta = query[node.axis] - node.split;
    const int near_child = delta < Scalar(0) ? node.left : node.right;
    const int far_child = delta < Scalar(0) ? node.right : node.left;
    search_nearest(near_child, query, best, best_sq);
    if (delta * delta <= best_sq) {
      search_nearest(far_child, query, best, best_sq);
    }
  }

  PointMatrix<Scalar> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

using KdTree3d = KdTree3<double>;

}  // namespace lrfkit

#endif  // LRFKIT_KDTREE_HPP_
