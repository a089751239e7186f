#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "marsupial/common/types.hpp"
#include "marsupial/world/voxel_grid.hpp"

namespace marsupial::world {

/// Trilinear EDF sample: interpolated distance (m) and its analytic gradient.
struct EdfSample {
  double distance = 0.0;
  Vec3 gradient = Vec3::Zero();
};

enum class EdfMethod {
  automatic,           ///< brute force for small grids, distance transform otherwise
  brute_force,         ///< O(nodes * obstacles) exhaustive minimum
  distance_transform,  ///< separable lower-envelope transform, linear in node count
};

/// Euclidean distance field sampled at grid nodes: per node, the distance to
/// the nearest occupied voxel center, truncated at max_dist. Immutable.
class VoxelEDF {
 public:
  VoxelEDF() = default;
  VoxelEDF(GridGeometry geometry, std::vector<double> distance, double max_dist);

  const GridGeometry& geometry() const { return geometry_; }
  double max_dist() const { return max_dist_; }
  double resolution() const { return geometry_.resolution(); }
  const std::vector<double>& values() const { return distance_; }
  double node_value(std::size_t linear) const { return distance_[linear]; }
  double node_value(int i, int j, int k) const {
    return distance_[geometry_.linear_index(i, j, k)];
  }

  bool contains(const Vec3& p) const { return geometry_.contains(p); }

  /// Trilinear interpolation of the 8 surrounding nodes with its analytic
  /// gradient. Throws OutOfBoundsError outside the node lattice.
  EdfSample query(const Vec3& p) const;
  /// Same as query() but returns nullopt instead of throwing.
  std::optional<EdfSample> try_query(const Vec3& p) const;
  /// Interpolated distance only (no gradient); nullopt outside the lattice.
  std::optional<double> try_distance(const Vec3& p) const;

 private:
  GridGeometry geometry_;
  std::vector<double> distance_;
  double max_dist_ = 0.0;
};

/// Builds the EDF of an occupancy grid. Throws EmptyInputError when no voxel
/// is occupied and InvalidArgumentError for max_dist <= 0.
VoxelEDF build_edf(const VoxelGrid& grid, double max_dist, EdfMethod method = EdfMethod::automatic);

/// Flat little-endian export: "MEDF", version u32, origin 3xf64, resolution
/// f64, dims 3xu32, max_dist f64, then f32 distances x-fastest.
void save_edf(const VoxelEDF& edf, const std::filesystem::path& path);
VoxelEDF load_edf(const std::filesystem::path& path);

/// Grid nodes whose EDF value exceeds `safety`, in linear (x-fastest) order.
std::vector<Vec3> sample_safe_air(const VoxelEDF& edf, double safety);

}  // namespace marsupial::world
