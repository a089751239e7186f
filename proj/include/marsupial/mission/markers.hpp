#pragma once

#include <random>
#include <vector>

#include "marsupial/common/pose.hpp"
#include "marsupial/world/edf.hpp"

namespace marsupial::mission {

struct Marker {
  int id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();  ///< unit, pointing out of the surface
};

struct CameraModel {
  double fov = 1.0;           ///< rad, full cone angle about the boresight
  double max_range = 5.0;     ///< m
  double noise_sigma = 0.05;  ///< m, per-axis estimate noise

  void validate() const;
};

struct Detection {
  double t = 0.0;
  int marker_id = 0;
  Vec3 estimate = Vec3::Zero();
  double error_m = 0.0;  ///< |estimate - truth|
};

/// Geometric visibility from a camera whose boresight is the pose's x axis:
/// within range, inside the FOV cone, seen from the front (normal . view < 0)
/// and, when `edf` is given, with line of sight to a point 1.5 voxels in front
/// of the marker (the marker itself sits in an occupied voxel).
bool marker_visible(const Pose& camera, const Marker& marker, const CameraModel& model,
                    const world::VoxelEDF* edf);

/// Detections for every visible marker, in input order; each estimate is the
/// truth plus per-axis Gaussian noise drawn from `rng`. Throws
/// InvalidArgumentError for an invalid camera model.
std::vector<Detection> detect_markers(const Pose& pose, const std::vector<Marker>& markers,
                                      const CameraModel& model, std::mt19937_64& rng,
                                      const world::VoxelEDF* edf = nullptr);

}  // namespace marsupial::mission
