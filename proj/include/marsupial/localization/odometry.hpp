#pragma once

#include "marsupial/common/pose.hpp"

namespace marsupial::localization {

/// Body-frame motion increment reported by short-term odometry.
struct OdometryDelta {
  Vec3 translation = Vec3::Zero();  ///< m, expressed in the body frame at the start of the span
  double yaw = 0.0;                 ///< rad
  double span = 1.0;                ///< s

  void validate() const;
  OdometryDelta inverse() const;
};

/// Applies `delta` in the body frame of `pose`. The translation is rotated by
/// the pose yaw only (the platform is assumed level for dead reckoning);
/// roll and pitch pass through unchanged.
Pose integrate_odometry(const Pose& pose, const OdometryDelta& delta);

}  // namespace marsupial::localization
