#pragma once

#include <array>
#include <string>
#include <vector>

#include "marsupial/planner/tether.hpp"
#include "marsupial/trajopt/residuals.hpp"

namespace marsupial::trajopt {

/// Post-hoc feasibility of every state: tether length <= l_max and tether
/// line of sight (no obstacle voxel crossed).
struct HardChecks {
  bool all_los = true;
  bool all_lengths_ok = true;
  std::vector<std::size_t> los_violations;
  std::vector<std::size_t> length_violations;

  bool passed() const { return all_los && all_lengths_ok; }
};

HardChecks hard_checks(const MarsupialTrajectory& traj, const world::VoxelEDF& edf, double l_max);

struct Initialization {
  MarsupialTrajectory trajectory;
  Spacing spacing = Spacing::kPerPlatform;
};

/// initialize_trajectory with per-platform spacing, unless that pairs UGV and
/// UAV positions which fail the hard checks. Then shared spacing is tried,
/// then the path states themselves (the planner validated those pairs).
Initialization initialize_checked(const std::vector<JointState>& path, double v_g, double v_a,
                                  const world::VoxelEDF& edf, double l_max);

/// Minimum EDF along a platform's polyline (segments sampled as in the LoS check).
double polyline_clearance(const std::vector<Vec3>& points, const world::VoxelEDF& edf);
std::vector<Vec3> ugv_points(const MarsupialTrajectory& traj);
std::vector<Vec3> uav_points(const MarsupialTrajectory& traj);

struct OptReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  /// Weighted cost per family, in ResidualWeights::named() order.
  std::vector<std::pair<std::string, double>> initial_breakdown, final_breakdown;
  std::vector<double> cost_history;  ///< after each accepted step, starting with the initial cost
  int iterations = 0;
  int accepted_steps = 0;
  bool converged = false;
  double initial_clearance_g = 0.0, initial_clearance_a = 0.0;
  double final_clearance_g = 0.0, final_clearance_a = 0.0;
  HardChecks checks;
};

/// Damped least squares over the interior states. A step is accepted only if
/// the total cost does not increase, no new hard-check violation appears and
/// neither platform's polyline clearance drops below its initial minimum.
/// After each step the UGV is projected onto the traversable ground. The first
/// and last positions are returned bitwise unchanged; the last dt is optimized
/// like every other step duration. Throws OutOfBoundsError if
/// the input leaves the EDF.
std::pair<MarsupialTrajectory, OptReport> optimize_trajectory(const MarsupialTrajectory& traj,
                                                              const planner::Environment& env,
                                                              const OptimizerConfig& cfg);

}  // namespace marsupial::trajopt
