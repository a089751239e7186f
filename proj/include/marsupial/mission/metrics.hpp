#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "marsupial/mission/simulator.hpp"

namespace marsupial::mission {

struct MarkerStats {
  int id = 0;
  int observations = 0;
  double mean_error_m = 0.0;         ///< error of the averaged estimate
  double mean_single_error_m = 0.0;  ///< mean error of individual detections
};

struct MissionMetrics {
  double mean_cross_track_m = 0.0;
  double mean_height_error_m = 0.0;
  double max_cross_track_m = 0.0;
  std::size_t tracked_samples = 0;
  std::vector<MarkerStats> markers;  ///< one per configured marker, in id order
  std::size_t markers_detected = 0;
  double flight_time_s = 0.0;
  double energy_wh = 0.0;
  double min_tether_clearance_m = 0.0;
  double max_tether_length_m = 0.0;
  std::string phase;
  std::string abort_reason;
};

/// Tracking errors use the UAV's active segment (previous waypoint -> current
/// waypoint): cross-track is the horizontal and height error the vertical
/// offset from the closest point on that segment. Samples before the first
/// dispatch or after completion are skipped. Throws EmptyInputError for an
/// empty log.
MissionMetrics mission_metrics(const SimLog& log, const trajopt::MarsupialTrajectory& traj);

/// CSV `t,xg,yg,zg,xa,ya,za,yaw,cmd_vx,cmd_vy,cmd_vz,cmd_yaw_rate,wp_index,
/// tcm_phase,tether_len,tether_clear,soc_pack1,soc_pack2,soc_backup`
/// (UAV commands, SOC in percent).
void save_simlog_csv(const SimLog& log, const std::filesystem::path& path);
/// CSV `t,marker_id,est_x,est_y,est_z,err_m`.
void save_detections_csv(const SimLog& log, const std::filesystem::path& path);
std::string metrics_to_json(const MissionMetrics& m);
void save_metrics_json(const MissionMetrics& m, const std::filesystem::path& path);

}  // namespace marsupial::mission
