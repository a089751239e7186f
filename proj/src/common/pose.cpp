#include "marsupial/common/pose.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

namespace marsupial {

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

double angle_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

Mat3 yaw_rotation(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

Pose::Pose(const Vec3& p, double roll_, double pitch_, double yaw_)
    : position(p), roll(wrap_angle(roll_)), pitch(wrap_angle(pitch_)), yaw(wrap_angle(yaw_)) {}

Pose Pose::from_position_yaw(const Vec3& p, double yaw) { return Pose(p, 0.0, 0.0, yaw); }

Pose Pose::from_rotation(const Vec3& p, const Mat3& r) {
  // ZYX extraction; pitch clamped at the gimbal singularity.
  const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
  const double pitch = std::asin(sp);
  double roll = 0.0;
  double yaw = 0.0;
  if (std::abs(sp) < 1.0 - 1e-12) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    yaw = std::atan2(-r(0, 1), r(1, 1));
  }
  return Pose(p, roll, pitch, yaw);
}

Mat3 Pose::rotation() const {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

Vec3 Pose::transform(const Vec3& local) const { return rotation() * local + position; }

Vec3 Pose::inverse_transform(const Vec3& world) const {
  return rotation().transpose() * (world - position);
}

Pose Pose::compose(const Pose& other) const {
  const Mat3 r = rotation();
  return from_rotation(r * other.position + position, r * other.rotation());
}

Pose Pose::inverse() const {
  const Mat3 rt = rotation().transpose();
  return from_rotation(-(rt * position), rt);
}

}  // namespace marsupial
