#pragma once

#include <Eigen/Core>

namespace marsupial {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

}  // namespace marsupial
