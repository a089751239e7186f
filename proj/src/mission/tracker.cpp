#include "marsupial/mission/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "marsupial/common/error.hpp"

namespace marsupial::mission {

TrapezoidProfile trapezoid_profile(double dist, double v_max, double accel) {
  if (!(dist >= 0.0) || !std::isfinite(dist)) throw InvalidArgumentError("distance must be >= 0");
  if (!(v_max > 0.0) || !(accel > 0.0)) {
    throw InvalidArgumentError("speed and acceleration must be > 0");
  }
  TrapezoidProfile p;
  p.distance = dist;
  p.accel = accel;
  if (dist == 0.0) return p;
  if (dist >= v_max * v_max / accel) {
    p.v_peak = v_max;
    p.t_ramp = v_max / accel;
    p.t_cruise = (dist - v_max * v_max / accel) / v_max;
  } else {
    p.v_peak = std::sqrt(accel * dist);
    p.t_ramp = p.v_peak / accel;
  }
  return p;
}

double TrapezoidProfile::speed_at_time(double t) const {
  if (t <= 0.0 || t >= duration()) return 0.0;
  if (t < t_ramp) return accel * t;
  if (t <= t_ramp + t_cruise) return v_peak;
  return accel * (duration() - t);
}

double TrapezoidProfile::distance_at_time(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= duration()) return distance;
  const double ramp = 0.5 * accel * t_ramp * t_ramp;
  if (t < t_ramp) return 0.5 * accel * t * t;
  if (t <= t_ramp + t_cruise) return ramp + v_peak * (t - t_ramp);
  const double left = duration() - t;
  return distance - 0.5 * accel * left * left;
}

double TrapezoidProfile::speed_at_position(double s) const {
  if (distance <= 0.0) return 0.0;
  s = std::clamp(s, 0.0, distance);
  return std::min({v_peak, std::sqrt(2.0 * accel * s), std::sqrt(2.0 * accel * (distance - s))});
}

void TrackerConfig::validate() const {
  for (double v : {gain_xy, gain_z, v_g, v_a, v_max_vertical, accel, yaw_gain, max_yaw_rate}) {
    if (!(v > 0.0)) throw InvalidArgumentError("tracker gains and limits must be > 0");
  }
  if (!(min_speed >= 0.0)) throw InvalidArgumentError("tracker min speed must be >= 0");
  if (!(reached_tolerance > 0.0) || !(yaw_tolerance > 0.0)) {
    throw InvalidArgumentError("tracker tolerances must be > 0");
  }
}

VelocityCommand tracker_step(Platform platform, const Pose& current, const TrackTarget& target,
                             const TrackerConfig& cfg, const TrapezoidProfile& profile, double s) {
  VelocityCommand cmd;
  const Vec3 e = target.position - current.position;
  const Vec2 lateral = cfg.gain_xy * Vec2(e.x(), e.y());
  const double vertical = platform == Platform::uav ? cfg.gain_z * e.z() : 0.0;

  const double limit = std::min(cfg.lateral_cap(), std::max(cfg.min_speed, profile.speed_at_position(s)));
  double scale = 1.0;
  if (lateral.norm() > limit) scale = limit / lateral.norm();
  if (std::abs(vertical) > cfg.v_max_vertical) {
    scale = std::min(scale, cfg.v_max_vertical / std::abs(vertical));
  }
  cmd.linear = Vec3(lateral.x() * scale, lateral.y() * scale, vertical * scale);

  if (platform == Platform::uav && target.yaw) {
    const double rate = cfg.yaw_gain * wrap_angle(*target.yaw - current.yaw);
    cmd.yaw_rate = std::clamp(rate, -cfg.max_yaw_rate, cfg.max_yaw_rate);
  }
  return cmd;
}

}  // namespace marsupial::mission
