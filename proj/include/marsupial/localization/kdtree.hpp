#pragma once

#include <cstdint>
#include <vector>

#include "marsupial/common/types.hpp"

namespace marsupial::localization {

struct Neighbor {
  int index = -1;           ///< into the indexed point array, -1 when none
  double squared_distance = 0.0;
};

/// Static 3D kd-tree for nearest-neighbor queries. Owns a copy of the points.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points, int leaf_size = 8);

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// Nearest point to `q` within `max_distance` (index -1 when none).
  /// Ties resolve to the lowest point index.
  Neighbor nearest(const Vec3& q, double max_distance) const;

 private:
  struct Node {
    int begin = 0, end = 0;   // range in order_ for leaves
    int left = -1, right = -1;
    int axis = -1;            // -1 marks a leaf
    double split = 0.0;
  };

  int build(int begin, int end, int depth);
  void search(int node, const Vec3& q, Neighbor& best) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int leaf_size_ = 8;
};

}  // namespace marsupial::localization
