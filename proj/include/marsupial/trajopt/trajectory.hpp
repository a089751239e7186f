#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "marsupial/planner/tether.hpp"
#include "marsupial/world/edf.hpp"

namespace marsupial::trajopt {

using planner::JointState;

/// One timed waypoint pair. dt is the time to reach this state from the
/// previous one (0 for the first state).
struct TrajState {
  Vec3 p_g = Vec3::Zero();
  Vec3 p_a = Vec3::Zero();
  double dt = 0.0;

  JointState joint() const { return {p_g, p_a}; }
  bool operator==(const TrajState& o) const {
    return p_g == o.p_g && p_a == o.p_a && dt == o.dt;
  }
};

struct MarsupialTrajectory {
  std::vector<TrajState> states;

  std::size_t size() const { return states.size(); }
  /// Cumulative time of state i.
  double time_at(std::size_t i) const;
  double duration() const { return states.empty() ? 0.0 : time_at(states.size() - 1); }
  /// Throws InvalidArgumentError unless dt[0] == 0 and dt[i] > 0 for i >= 1.
  void validate() const;
};

/// m uniformly spaced points on the straight tether p_g -> p_a, endpoints included.
std::vector<Vec3> tether_samples(const Vec3& p_g, const Vec3& p_a, int m);

enum class Spacing {
  kPerPlatform,  ///< uniform arc length on each platform's polyline independently
  kShared,       ///< uniform in |dp_g| + |dp_a|; both platforms share the edge fraction
  kNone,         ///< path states kept as given
};

/// Re-spaces the path (state count preserved) and assigns
/// dt[i] = max(|dp_g| / v_g, |dp_a| / v_a) for the step into state i. Throws
/// InvalidArgumentError for fewer than 2 states, non-positive speeds, or a
/// path on which neither platform moves.
MarsupialTrajectory initialize_trajectory(const std::vector<JointState>& path, double v_g, double v_a,
                                          Spacing spacing = Spacing::kPerPlatform);

/// Metadata written next to the states in the JSON export.
struct TrajectoryMeta {
  double l_max = 0.0;
  std::vector<std::pair<std::string, double>> weights;
  std::uint64_t seed = 0;
};

/// JSON `{states:[{p_g, p_a, dt}], meta:{L_max, weights, seed}}`.
std::string trajectory_to_json(const MarsupialTrajectory& traj, const TrajectoryMeta& meta);
void save_trajectory_json(const MarsupialTrajectory& traj, const TrajectoryMeta& meta,
                          const std::filesystem::path& path);
/// Throws IoError, ParseError or EmptyInputError.
MarsupialTrajectory load_trajectory_json(const std::filesystem::path& path);

/// CSV `i,t,xg,yg,zg,xa,ya,za,dt,tether_len,min_tether_clearance`, the last
/// column being the minimum EDF along the tether segment.
void save_trajectory_csv(const MarsupialTrajectory& traj, const world::VoxelEDF& edf,
                         const std::filesystem::path& path);

}  // namespace marsupial::trajopt
