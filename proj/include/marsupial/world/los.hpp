#pragma once

#include <vector>

#include "marsupial/common/types.hpp"
#include "marsupial/world/edf.hpp"
#include "marsupial/world/voxel_grid.hpp"

namespace marsupial::world {

/// Sample positions used by the line-of-sight checks: both endpoints plus
/// interior points at spacing <= step. The set is the same (bitwise) for
/// (a, b) and (b, a); samples near each end are computed from that end.
std::vector<Vec3> segment_samples(const Vec3& a, const Vec3& b, double step);

/// True iff every voxel crossed by a->b is free. The traversal is exact, so it
/// covers every sample at any step (in particular resolution/2).
/// Throws OutOfBoundsError when an endpoint is outside the grid.
bool check_los(const VoxelGrid& grid, const Vec3& a, const Vec3& b);

/// True iff a->b crosses no obstacle voxel (node value 0) and every sample
/// (step resolution/2) has interpolated EDF >= clearance.
/// Throws OutOfBoundsError when an endpoint is outside the lattice.
bool check_los(const VoxelEDF& edf, const Vec3& a, const Vec3& b, double clearance);

/// Minimum interpolated EDF over the same samples (max_dist when none lower).
double min_clearance_along(const VoxelEDF& edf, const Vec3& a, const Vec3& b);

}  // namespace marsupial::world
