#include "marsupial/localization/odometry.hpp"

#include <cmath>

#include "marsupial/common/error.hpp"

namespace marsupial::localization {

void OdometryDelta::validate() const {
  if (!translation.allFinite() || !std::isfinite(yaw)) {
    throw InvalidArgumentError("odometry delta must be finite");
  }
  if (!(span > 0.0)) throw InvalidArgumentError("odometry span must be > 0");
}

OdometryDelta OdometryDelta::inverse() const {
  OdometryDelta inv;
  inv.translation = -(yaw_rotation(-yaw) * translation);
  inv.yaw = -yaw;
  inv.span = span;
  return inv;
}

Pose integrate_odometry(const Pose& pose, const OdometryDelta& delta) {
  delta.validate();
  Pose out = pose;
  out.position = pose.position + yaw_rotation(pose.yaw) * delta.translation;
  out.yaw = wrap_angle(pose.yaw + delta.yaw);
  return out;
}

}  // namespace marsupial::localization
