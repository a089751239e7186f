#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "marsupial/mission/battery.hpp"
#include "marsupial/mission/markers.hpp"
#include "marsupial/mission/tcm.hpp"
#include "marsupial/mission/tracker.hpp"
#include "marsupial/planner/tether.hpp"
#include "marsupial/trajopt/trajectory.hpp"

namespace marsupial::mission {

/// Point of interest: a UAV position with the yaw to hold while inspecting.
struct PoI {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;    ///< rad
  double dwell = 0.0;  ///< s spent inspecting once aligned
};

struct InspectionPlan {
  std::vector<PoI> pois;

  /// Throws InvalidArgumentError when empty or when a dwell is negative;
  /// yaws are wrapped in place by normalize().
  void validate() const;
  void normalize();
};

/// Waypoint index of each PoI: the first state (at or after the previous
/// PoI's state) whose UAV position is within `tolerance`, advanced while the
/// distance keeps decreasing. Throws InvalidArgumentError when a PoI is not
/// on the trajectory.
std::vector<std::size_t> assign_pois(const trajopt::MarsupialTrajectory& traj,
                                     const InspectionPlan& plan, double tolerance);

struct SimConfig {
  double dt = 0.02;              ///< s
  double command_noise = 0.0;    ///< m/s, per-axis sigma added to velocity commands
  double max_time = 7200.0;      ///< s, the run aborts beyond this
  double l_max = 70.0;           ///< m
  bool abort_on_tether_violation = true;
  double poi_tolerance = 0.5;    ///< m, see assign_pois
  double initial_yaw = 0.0;      ///< rad
  TrackerConfig tracker;
  PowerConfig power;
  CameraModel camera;
  std::vector<Marker> markers;

  void validate() const;
};

struct SimSample {
  double t = 0.0;
  Vec3 p_g = Vec3::Zero();
  Vec3 p_a = Vec3::Zero();
  double yaw = 0.0;
  Vec3 target_g = Vec3::Zero();
  Vec3 target_a = Vec3::Zero();
  Vec3 cmd_g = Vec3::Zero();
  Vec3 cmd_a = Vec3::Zero();
  double cmd_yaw_rate = 0.0;
  std::size_t wp_index = 0;
  TcmPhase phase = TcmPhase::running;
  bool ugv_reached = false;  ///< latched coordinator flags after this step
  bool uav_reached = false;
  double tether_len = 0.0;
  double tether_clear = 0.0;  ///< minimum EDF along the tether
  std::array<double, 2> soc_pack{1.0, 1.0};  ///< first two bank packs
  double soc_backup = 1.0;
};

struct SimEvent {
  double t = 0.0;
  std::string kind;  ///< tether_length | tether_los | depleted | timeout
  std::string detail;
};

struct SimLog {
  double dt = 0.0;
  std::vector<SimSample> samples;
  std::vector<Detection> detections;
  std::vector<SimEvent> events;
  std::vector<Marker> markers;  ///< the configured markers (truth for the metrics)
  double energy_wh = 0.0;
  TcmPhase final_phase = TcmPhase::running;
  std::string abort_reason;

  bool complete() const { return final_phase == TcmPhase::complete; }
};

/// Fixed-step closed-loop run: first-order holonomic platforms driven by
/// tracker_step under tcm_step over the trajectory states as waypoints. At a
/// PoI waypoint the UAV first aligns its yaw, then dwells while detecting
/// markers; both count toward its reached flag. The tether (length and LoS at
/// clearance 0) is checked every step and the power system is discharged.
/// Deterministic for a given seed. Throws InvalidArgumentError when the
/// trajectory fails the hard checks or the configuration is invalid.
SimLog simulate_mission(const planner::Environment& env, const trajopt::MarsupialTrajectory& traj,
                        const InspectionPlan& plan, const SimConfig& cfg, std::uint64_t seed);

}  // namespace marsupial::mission
