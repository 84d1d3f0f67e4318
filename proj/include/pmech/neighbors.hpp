#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <vector>

#include "pmech/common.hpp"

namespace pmech {

/// Median-split k-d tree over body centers of mass. Immutable after build;
/// concurrent queries are safe. Rebuilt every step from a position snapshot.
template <int D>
class SpatialIndex {
 public:
  SpatialIndex() = default;

  explicit SpatialIndex(const std::vector<Vec<D>>& points, std::vector<int> ids = {})
      : points_(points), ids_(std::move(ids)) {
    const int n = static_cast<int>(points_.size());
    if (ids_.empty()) {
      ids_.resize(n);
      for (int i = 0; i < n; ++i) ids_[i] = i;
    }
    order_.resize(n);
    for (int i = 0; i < n; ++i) order_[i] = i;
    nodes_.reserve(n);
    root_ = build(0, n);
  }

  int size() const { return static_cast<int>(points_.size()); }

  /// Ids with ||x - center|| < h (strict), excluding excludeId; sorted by id.
  std::vector<int> radiusQuery(const Vec<D>& center, double h, int excludeId = -1) const {
    std::vector<int> out;
    if (root_ >= 0 && h > 0.0) radiusRecurse(root_, center, h * h, excludeId, out);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// The k nearest ids to center (excluding excludeId); ties broken by lower id.
  std::vector<int> knnQuery(const Vec<D>& center, int k, int excludeId = -1) const {
    std::priority_queue<std::pair<double, int>> heap;  // max-heap on (dist2, id)
    if (root_ >= 0 && k > 0) knnRecurse(root_, center, k, excludeId, heap);
    std::vector<int> out(heap.size());
    for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
      out[i] = heap.top().second;
      heap.pop();
    }
    return out;
  }

  // nodes touched by the last query on this thread; sanity metric only
  mutable std::int64_t visitedNodes = 0;

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(int lo, int hi) {
    if (lo >= hi) return -1;
    // split along the widest axis of this subset
    Vec<D> mn = points_[order_[lo]], mx = points_[order_[lo]];
    for (int i = lo + 1; i < hi; ++i) {
      mn = mn.cwiseMin(points_[order_[i]]);
      mx = mx.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    for (int d = 1; d < D; ++d)
      if (mx[d] - mn[d] > mx[axis] - mn[axis]) axis = d;

    const int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) {
                       if (points_[a][axis] != points_[b][axis])
                         return points_[a][axis] < points_[b][axis];
                       return ids_[a] < ids_[b];
                     });
    Node node;
    node.point = order_[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    nodes_[self].left = build(lo, mid);
    nodes_[self].right = build(mid + 1, hi);
    return self;
  }

  void radiusRecurse(int ni, const Vec<D>& center, double h2, int excludeId,
                     std::vector<int>& out) const {
    const Node& node = nodes_[ni];
    ++visitedNodes;
    const Vec<D>& p = points_[node.point];
    const double d2 = (p - center).squaredNorm();
    if (d2 < h2 && ids_[node.point] != excludeId) out.push_back(ids_[node.point]);
    const double delta = center[node.axis] - p[node.axis];
    const int near = delta <= 0.0 ? node.left : node.right;
    const int far = delta <= 0.0 ? node.right : node.left;
    if (near >= 0) radiusRecurse(near, center, h2, excludeId, out);
    if (far >= 0 && delta * delta < h2) radiusRecurse(far, center, h2, excludeId, out);
  }

  void knnRecurse(int ni, const Vec<D>& center, int k, int excludeId,
                  std::priority_queue<std::pair<double, int>>& heap) const {
    const Node& node = nodes_[ni];
    ++visitedNodes;
    const Vec<D>& p = points_[node.point];
    if (ids_[node.point] != excludeId) {
      const double d2 = (p - center).squaredNorm();
      // tie-break: lower id wins, so a candidate replaces the heap top if it
      // is strictly closer, or equally close with a lower id
      if (static_cast<int>(heap.size()) < k) {
        heap.emplace(d2, ids_[node.point]);
      } else if (d2 < heap.top().first ||
                 (d2 == heap.top().first && ids_[node.point] < heap.top().second)) {
        heap.pop();
        heap.emplace(d2, ids_[node.point]);
      }
    }
    const double delta = center[node.axis] - p[node.axis];
    const int near = delta <= 0.0 ? node.left : node.right;
    const int far = delta <= 0.0 ? node.right : node.left;
    if (near >= 0) knnRecurse(near, center, k, excludeId, heap);
    if (far >= 0 &&
        (static_cast<int>(heap.size()) < k || delta * delta <= heap.top().first))
      knnRecurse(far, center, k, excludeId, heap);
  }

  std::vector<Vec<D>> points_;
  std::vector<int> ids_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace pmech
