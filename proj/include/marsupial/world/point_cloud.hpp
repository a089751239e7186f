#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "marsupial/common/types.hpp"

namespace marsupial::world {

/// Ordered set of 3D points (meters, world or sensor frame depending on context).
struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Axis-aligned bounds of a non-empty cloud.
struct Aabb {
  Vec3 min;
  Vec3 max;
};

Aabb bounds(const PointCloud& cloud);

/// Loads ASCII XYZ ("x y z" per line, '#' comments allowed) or ASCII PLY
/// (detected by the "ply" magic line). Non-finite points are dropped; the
/// order of the remaining points is preserved.
///
/// Throws IoError for unreadable files, ParseError for malformed content and
/// EmptyInputError("empty cloud") when no point survives.
PointCloud load_point_cloud(const std::filesystem::path& path);

/// Writes an ASCII XYZ file with round-trip precision.
void save_xyz(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace marsupial::world
