#pragma once

#include <Eigen/Core>
#include <vector>

#include "marsupial/common/pose.hpp"
#include "marsupial/localization/kdtree.hpp"
#include "marsupial/world/edf.hpp"
#include "marsupial/world/point_cloud.hpp"

namespace marsupial::localization {

struct RegistrationReport {
  Pose pose;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  /// False when the final Gauss-Newton Hessian is too ill-conditioned to fix
  /// all optimized degrees of freedom (e.g. a single plane).
  bool observable = true;
  double wall_time_s = 0.0;
  /// Cost after each accepted step, starting with the initial cost.
  std::vector<double> cost_history;
  std::size_t points_used = 0;
};

struct DllOptions {
  int max_iterations = 50;
  double step_tolerance = 1e-4;    ///< m and rad
  std::size_t max_points = 4096;   ///< voxel decimation target, 0 disables decimation
  double initial_lambda = 1e-3;
  double max_condition = 1e8;

  void validate() const;
};

/// Keeps the first scan point in each cube of a grid, growing the cube size
/// until at most `max_points` remain. Order of survivors follows the input.
std::vector<Vec3> voxel_decimate(const std::vector<Vec3>& points, std::size_t max_points);

/// Robust registration cost over a 4-DOF state (x, y, z, yaw) with roll and
/// pitch held fixed:  sum_i rho(D(R(yaw) * R_rp * p_i + t)), where D is the
/// trilinear EDF and rho is the Tukey biweight with scale max_dist. Points
/// falling outside the grid contribute the saturated value rho(max_dist).
class DllObjective {
 public:
  using State = Eigen::Vector4d;

  DllObjective(const world::VoxelEDF& edf, std::vector<Vec3> points, double roll, double pitch);

  /// Cost; fills the gradient and the Gauss-Newton Hessian approximation when
  /// the pointers are non-null.
  double evaluate(const State& x, Eigen::Vector4d* gradient = nullptr,
                  Eigen::Matrix4d* hessian = nullptr) const;

  /// World-frame position of point i under state x.
  Vec3 transform(const State& x, std::size_t i) const;

  static State state_of(const Pose& pose);
  Pose pose_of(const State& x) const;

  const std::vector<Vec3>& leveled_points() const { return leveled_; }

 private:
  const world::VoxelEDF* edf_;
  std::vector<Vec3> leveled_;  // R_rp * p
  double roll_, pitch_;
  double tau_;
};

double tukey_rho(double r, double tau);
double tukey_weight(double r, double tau);

/// Direct map-based registration: damped Gauss-Newton over (x, y, z, yaw) on
/// the EDF, without correspondences. Throws EmptyInputError for an empty scan
/// and OutOfBoundsError when the initial position is outside the EDF.
RegistrationReport dll_register(const world::PointCloud& scan, const world::VoxelEDF& edf,
                                const Pose& init, const DllOptions& options = {});

struct IcpOptions {
  int max_iterations = 60;
  double step_tolerance = 1e-4;         ///< m and rad
  double max_correspondence = 1.0;      ///< m
  std::size_t max_points = 0;           ///< 0 uses the full scan
  /// Hold roll/pitch at the initial values (the DLL prior) and fit only
  /// x, y, z, yaw. Off by default: the classic baseline is 6 DOF.
  bool fix_roll_pitch = false;

  void validate() const;
};

/// Point-to-point ICP against a prebuilt map index. Correspondences
/// are nearest neighbors within max_correspondence; each iteration applies
/// the closed-form rigid fit (Umeyama in 6 DOF, planar Procrustes plus a
/// vertical offset in 4 DOF). Cost is the mean squared correspondence
/// distance with unmatched points counted at max_correspondence.
RegistrationReport icp_register(const world::PointCloud& scan, const KdTree& map,
                                const Pose& init, const IcpOptions& options = {});
/// Convenience overload that indexes `map` first (index build is timed too).
RegistrationReport icp_register(const world::PointCloud& scan, const world::PointCloud& map,
                                const Pose& init, const IcpOptions& options = {});

/// Mean EDF value of the scan points posed in the world; points outside the
/// grid count as max_dist. Throws EmptyInputError for an empty scan.
double scan_alignment_metric(const world::PointCloud& scan, const Pose& pose,
                             const world::VoxelEDF& edf);

}  // namespace marsupial::localization
