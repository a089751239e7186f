#pragma once

#include <cstdint>
#include <vector>

#include "marsupial/common/pose.hpp"
#include "marsupial/world/point_cloud.hpp"
#include "marsupial/world/edf.hpp"

namespace marsupial::world {

/// Ray set of a range sensor, expressed in the sensor frame.
struct SensorModel {
  std::vector<Vec3> directions;  ///< unit vectors
  double max_range = 30.0;       ///< m
  double noise_stddev = 0.0;     ///< range noise, m

  /// Spinning multi-ring LiDAR: `rings` elevation angles evenly spread over
  /// [min_elevation, max_elevation] and `azimuth_steps` rays per ring.
  static SensorModel spinning(int rings, double min_elevation, double max_elevation,
                              int azimuth_steps, double max_range, double noise_stddev);

  void validate() const;
};

/// Ray-marches every sensor ray through the occupancy encoded in the EDF
/// (voxels whose node value is 0), with step resolution/4. The range of the
/// first occupied voxel hit is refined to the minimum of the interpolated
/// distance field along the ray within one voxel of the hit, so noiseless
/// returns lie on the field's zero set. Gaussian range noise is then added
/// from a generator seeded with `seed`. Rays that leave the grid or exceed
/// max_range produce no point, and so do rays that merely clip a voxel corner
/// without approaching the surface within 0.3 resolution (mixed pixels). Points are returned in the sensor frame.
///
/// Throws InvalidArgumentError when the sensor origin lies in an occupied voxel.
PointCloud simulate_lidar(const VoxelEDF& edf, const Pose& pose, const SensorModel& model,
                          std::uint64_t seed);

}  // namespace marsupial::world
