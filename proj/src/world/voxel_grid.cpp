#include "marsupial/world/voxel_grid.hpp"

#include <cmath>

#include <fmt/format.h>

#include "marsupial/common/error.hpp"

namespace marsupial::world {

GridGeometry::GridGeometry(const Vec3& origin, double resolution, const std::array<int, 3>& dims)
    : origin_(origin), resolution_(resolution), dims_(dims) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw InvalidArgumentError(fmt::format("grid resolution must be > 0 (got {})", resolution));
  }
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    throw InvalidArgumentError("grid dims must be positive");
  }
}

GridIndex GridGeometry::grid_index(std::size_t linear) const {
  const auto nx = static_cast<std::size_t>(dims_[0]);
  const auto ny = static_cast<std::size_t>(dims_[1]);
  return {static_cast<int>(linear % nx), static_cast<int>((linear / nx) % ny),
          static_cast<int>(linear / (nx * ny))};
}

Vec3 GridGeometry::node_position(int i, int j, int k) const {
  return origin_ + resolution_ * Vec3(i, j, k);
}

Vec3 GridGeometry::max_node() const {
  return node_position(dims_[0] - 1, dims_[1] - 1, dims_[2] - 1);
}

std::optional<GridIndex> GridGeometry::voxel_of(const Vec3& p) const {
  const Vec3 f = (p - origin_) / resolution_;
  const double fx = std::floor(f.x() + 0.5);
  const double fy = std::floor(f.y() + 0.5);
  const double fz = std::floor(f.z() + 0.5);
  if (!(fx >= 0.0 && fy >= 0.0 && fz >= 0.0 && fx < dims_[0] && fy < dims_[1] && fz < dims_[2])) {
    return std::nullopt;
  }
  return GridIndex{static_cast<int>(fx), static_cast<int>(fy), static_cast<int>(fz)};
}

bool GridGeometry::contains(const Vec3& p) const {
  constexpr double kSlack = 1e-9;
  const Vec3 f = (p - origin_) / resolution_;
  for (int a = 0; a < 3; ++a) {
    if (!(f[a] >= -kSlack && f[a] <= dims_[a] - 1 + kSlack)) return false;
  }
  return true;
}

VoxelGrid::VoxelGrid(GridGeometry geometry, std::vector<std::uint8_t> occupancy)
    : geometry_(std::move(geometry)), occupancy_(std::move(occupancy)) {
  if (occupancy_.size() != geometry_.node_count()) {
    throw InvalidArgumentError("occupancy size does not match grid dims");
  }
  for (const auto o : occupancy_) occupied_count_ += (o != 0);
}

bool VoxelGrid::occupied_at(const Vec3& p) const {
  const auto v = geometry_.voxel_of(p);
  return v && occupied(*v);
}

VoxelGrid build_occupancy(const PointCloud& cloud, double resolution, double padding) {
  if (!(resolution > 0.0)) {
    throw InvalidArgumentError(fmt::format("resolution must be > 0 (got {})", resolution));
  }
  if (cloud.empty()) throw EmptyInputError("empty cloud");
  if (!(padding >= 0.0)) throw InvalidArgumentError("padding must be >= 0");

  const Aabb box = bounds(cloud);
  const Vec3 origin = box.min - Vec3::Constant(padding);
  const Vec3 extent = (box.max - box.min + Vec3::Constant(2.0 * padding)) / resolution;
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) dims[a] = static_cast<int>(std::ceil(extent[a] - 1e-9)) + 1;

  GridGeometry geometry(origin, resolution, dims);
  std::vector<std::uint8_t> occ(geometry.node_count(), 0);
  for (const auto& p : cloud.points) {
    const auto v = geometry.voxel_of(p);
    if (!v) throw InvalidArgumentError("point outside computed bounds");  // unreachable
    occ[geometry.linear_index(*v)] = 1;
  }
  return VoxelGrid(std::move(geometry), std::move(occ));
}

}  // namespace marsupial::world
