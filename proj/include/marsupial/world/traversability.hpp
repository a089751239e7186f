#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "marsupial/common/types.hpp"
#include "marsupial/world/point_cloud.hpp"

namespace marsupial::world {

struct TraversabilityParams {
  double cell_size = 0.2;        ///< m, side of the 2D ground cells
  double max_slope = 0.35;       ///< rad
  double max_step = 0.15;        ///< m, height change allowed between neighbor cells
  double clearance = 1.0;        ///< m of free space required above the ground
  double anchor_height = 0.6;    ///< m, tether anchor above the ground (UGV reference point)
  double ground_percentile = 0.1;

  void validate() const;
};

struct TraversableCell {
  int ix = 0;
  int iy = 0;
  double ground_z = 0.0;  ///< representative ground height (m)
  double slope = 0.0;     ///< rad, from a plane fit over the cell's ground points
};

/// Ground cells the UGV may occupy. Cells are indexed in (iy, ix) raster order.
class TraversableSet {
 public:
  TraversableSet() = default;
  TraversableSet(TraversabilityParams params, Vec2 origin, int nx, int ny,
                 std::vector<TraversableCell> cells);

  const TraversabilityParams& params() const { return params_; }
  const std::vector<TraversableCell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  const Vec2& origin() const { return origin_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  /// Cell member index for a 2D cell coordinate, or -1.
  int member_at(int ix, int iy) const;
  /// Member index of the cell containing the xy of `p`, or -1.
  int member_containing(const Vec3& p) const;

  /// UGV reference position of a cell: (center x, center y, ground_z + anchor_height).
  Vec3 center(std::size_t member) const;

  /// Mutual neighbors: 8-adjacent members whose ground heights differ by <= max_step.
  bool are_neighbors(std::size_t a, std::size_t b) const;

  /// Member whose center is closest (3D) to `p`; ties go to the lowest index.
  /// Returns -1 for an empty set.
  int nearest_member(const Vec3& p) const;

  /// Projects a UGV position onto the ground manifold: keeps x/y when they fall
  /// in a member cell and sets z to that cell's reference height, otherwise
  /// moves to the nearest member center.
  Vec3 project(const Vec3& p) const;

 private:
  TraversabilityParams params_;
  Vec2 origin_ = Vec2::Zero();
  int nx_ = 0;
  int ny_ = 0;
  std::vector<TraversableCell> cells_;
  std::vector<int> lookup_;  // nx*ny -> member or -1
};

/// Projects the cloud onto 2D cells. A cell is kept when it has ground points,
/// its plane-fit slope is <= max_slope and no point lies between
/// ground + max_step and ground + clearance. Ground height is the configured
/// low percentile of the cell's z values.
TraversableSet traversability(const PointCloud& cloud, const TraversabilityParams& params);

}  // namespace marsupial::world
