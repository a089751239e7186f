#include "marsupial/localization/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace marsupial::localization {

KdTree::KdTree(std::vector<Vec3> points, int leaf_size)
    : points_(std::move(points)), leaf_size_(std::max(1, leaf_size)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / static_cast<std::size_t>(leaf_size_) + 1);
    build(0, static_cast<int>(points_.size()), 0);
  }
}

int KdTree::build(int begin, int end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, -1, 0.0});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int id, const Vec3& q, Neighbor& best) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index)) {
        best.squared_distance = d2;
        best.index = idx;
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, q, best);
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

Neighbor KdTree::nearest(const Vec3& q, double max_distance) const {
  Neighbor best{-1, max_distance * max_distance};
  if (!nodes_.empty()) search(0, q, best);
  if (best.index < 0) best.squared_distance = 0.0;
  return best;
}

}  // namespace marsupial::localization
