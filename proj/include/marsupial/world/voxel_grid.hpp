#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "marsupial/common/types.hpp"
#include "marsupial/world/point_cloud.hpp"

namespace marsupial::world {

struct GridIndex {
  int x = 0;
  int y = 0;
  int z = 0;

  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Regular 3D lattice. Node (i, j, k) sits at origin + (i, j, k) * resolution
/// and is the center of the voxel of side `resolution` around it. Linear
/// indices are x-fastest.
class GridGeometry {
 public:
  GridGeometry() = default;
  GridGeometry(const Vec3& origin, double resolution, const std::array<int, 3>& dims);

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }

  std::size_t linear_index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * k);
  }
  std::size_t linear_index(const GridIndex& g) const { return linear_index(g.x, g.y, g.z); }
  GridIndex grid_index(std::size_t linear) const;

  Vec3 node_position(int i, int j, int k) const;
  Vec3 node_position(const GridIndex& g) const { return node_position(g.x, g.y, g.z); }

  /// Last node position (the far corner of the interpolation domain).
  Vec3 max_node() const;

  /// Voxel whose cell contains `p`, or nullopt when `p` is outside every voxel.
  std::optional<GridIndex> voxel_of(const Vec3& p) const;

  /// True when `p` lies inside the node lattice's bounding box, where
  /// interpolated queries are defined.
  bool contains(const Vec3& p) const;

  bool valid(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_[0] && j < dims_[1] && k < dims_[2];
  }

 private:
  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 1.0;
  std::array<int, 3> dims_{0, 0, 0};
};

/// Boolean occupancy over a GridGeometry.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(GridGeometry geometry, std::vector<std::uint8_t> occupancy);

  const GridGeometry& geometry() const { return geometry_; }
  bool occupied(std::size_t linear) const { return occupancy_[linear] != 0; }
  bool occupied(const GridIndex& g) const { return occupied(geometry_.linear_index(g)); }
  /// Occupancy of the voxel containing `p`; points outside the grid count as free.
  bool occupied_at(const Vec3& p) const;
  std::size_t occupied_count() const { return occupied_count_; }
  const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

 private:
  GridGeometry geometry_;
  std::vector<std::uint8_t> occupancy_;
  std::size_t occupied_count_ = 0;
};

/// Voxelizes a cloud. The node lattice spans the cloud AABB grown by
/// `padding` on each side; a voxel is occupied iff at least one point falls in it.
VoxelGrid build_occupancy(const PointCloud& cloud, double resolution, double padding);

}  // namespace marsupial::world
