#pragma once

#include "marsupial/common/types.hpp"

namespace marsupial {

/// Rigid 6-DOF pose: position plus ZYX Euler angles (R = Rz(yaw) Ry(pitch) Rx(roll)).
/// Angles are kept in (-pi, pi].
struct Pose {
  Vec3 position = Vec3::Zero();
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  Pose() = default;
  Pose(const Vec3& p, double roll_, double pitch_, double yaw_);

  static Pose from_position_yaw(const Vec3& p, double yaw);
  static Pose from_rotation(const Vec3& p, const Mat3& rotation);

  Mat3 rotation() const;
  /// Maps a point from this frame into the parent frame.
  Vec3 transform(const Vec3& local) const;
  /// Maps a parent-frame point into this frame.
  Vec3 inverse_transform(const Vec3& world) const;

  /// this * other
  Pose compose(const Pose& other) const;
  Pose inverse() const;
};

/// Rotation about +z.
Mat3 yaw_rotation(double yaw);

/// Smallest absolute difference between two angles.
double angle_distance(double a, double b);

}  // namespace marsupial
