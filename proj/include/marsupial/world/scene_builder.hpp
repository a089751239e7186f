#pragma once

#include "marsupial/common/types.hpp"
#include "marsupial/world/point_cloud.hpp"

namespace marsupial::world {

/// Samples analytic surfaces into a point cloud on a regular lattice of the
/// given spacing. Edges are included, so adjacent faces share boundary points.
class SceneBuilder {
 public:
  explicit SceneBuilder(double spacing);

  /// Horizontal rectangle at height z.
  SceneBuilder& rect_xy(double x0, double x1, double y0, double y1, double z);
  /// Vertical rectangle in the plane y = const.
  SceneBuilder& rect_xz(double x0, double x1, double z0, double z1, double y);
  /// Vertical rectangle in the plane x = const.
  SceneBuilder& rect_yz(double y0, double y1, double z0, double z1, double x);
  /// Closed box surface; the bottom face is omitted unless requested.
  SceneBuilder& box(const Vec3& lo, const Vec3& hi, bool bottom = false);
  /// Vertical cylinder side surface plus its top cap.
  SceneBuilder& cylinder(const Vec2& center, double radius, double z0, double z1);
  SceneBuilder& point(const Vec3& p);

  double spacing() const { return spacing_; }
  const PointCloud& cloud() const { return cloud_; }
  PointCloud build() const { return cloud_; }

 private:
  double spacing_;
  PointCloud cloud_;
};

}  // namespace marsupial::world
