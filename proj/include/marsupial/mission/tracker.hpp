#pragma once

#include <optional>

#include "marsupial/common/pose.hpp"
#include "marsupial/common/types.hpp"

namespace marsupial::mission {

/// Symmetric accelerate / cruise / decelerate speed schedule over a distance.
/// When the distance is too short to reach v_peak the cruise phase vanishes
/// and the peak drops to sqrt(accel * distance).
struct TrapezoidProfile {
  double distance = 0.0;  ///< m
  double v_peak = 0.0;    ///< m/s, speed actually reached
  double accel = 0.0;     ///< m/s^2
  double t_ramp = 0.0;    ///< s, each of the accel and decel phases
  double t_cruise = 0.0;  ///< s

  double duration() const { return 2.0 * t_ramp + t_cruise; }
  bool triangular() const { return t_cruise == 0.0 && distance > 0.0; }
  double speed_at_time(double t) const;
  double distance_at_time(double t) const;
  /// min(v_peak, sqrt(2 a s), sqrt(2 a (d - s))) for s clamped to [0, d].
  double speed_at_position(double s) const;
};

/// Throws InvalidArgumentError unless dist >= 0, v_max > 0 and accel > 0.
TrapezoidProfile trapezoid_profile(double dist, double v_max, double accel);

struct TrackerConfig {
  double gain_xy = 1.0;           ///< 1/s
  double gain_z = 1.0;            ///< 1/s, UAV height controller
  double v_g = 0.25;              ///< m/s, UGV commanded max speed
  double v_a = 0.25;              ///< m/s, UAV commanded max speed
  double v_max_vertical = 0.25;   ///< m/s
  double accel = 0.25;            ///< m/s^2, trapezoid ramps
  double min_speed = 0.05;        ///< m/s, profile floor so a hop can start from rest
  double reached_tolerance = 0.10;  ///< m
  double yaw_gain = 1.0;          ///< 1/s
  double max_yaw_rate = 0.5;      ///< rad/s
  double yaw_tolerance = 0.05;    ///< rad

  void validate() const;
  /// Both platforms are limited to the slowest one.
  double lateral_cap() const { return v_g < v_a ? v_g : v_a; }
};

enum class Platform { ugv, uav };

struct VelocityCommand {
  Vec3 linear = Vec3::Zero();  ///< m/s
  double yaw_rate = 0.0;       ///< rad/s
};

struct TrackTarget {
  Vec3 position = Vec3::Zero();
  std::optional<double> yaw;  ///< set only while aligning at a PoI
};

/// Proportional per-axis command toward `target`. The horizontal component is
/// clipped to the profile speed at arc position `s` (floored at min_speed and
/// capped at lateral_cap()); the UAV vertical channel is clipped to
/// v_max_vertical. When either clip is active both channels are scaled by the
/// same factor so the UAV keeps heading straight at the target. The UGV
/// ignores the vertical and yaw channels.
VelocityCommand tracker_step(Platform platform, const Pose& current, const TrackTarget& target,
                             const TrackerConfig& cfg, const TrapezoidProfile& profile, double s);

}  // namespace marsupial::mission
