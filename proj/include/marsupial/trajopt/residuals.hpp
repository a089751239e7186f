#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "marsupial/trajopt/trajectory.hpp"
#include "marsupial/world/edf.hpp"

namespace marsupial::trajopt {

struct ResidualWeights {
  double tether_obstacle = 1.0;
  double tether_length = 10.0;
  double velocity = 5.0;
  double acceleration = 5.0;
  double clearance = 1.0;
  double equidistance = 0.5;
  double smoothness = 0.5;
  double time = 0.1;

  /// (family name, weight) in residual-vector order.
  std::vector<std::pair<std::string, double>> named() const;
};

struct OptimizerConfig {
  double l_max = 70.0;       ///< m
  double rho_ot = 0.5;       ///< m, tether safety distance
  double beta = 100.0;       ///< weight of samples closer than rho_ot
  int m = 10;                ///< tether samples
  double v_g = 0.25;         ///< m/s, nominal speeds used for initialization
  double v_a = 0.25;
  double v_max_g = 0.5;      ///< m/s
  double v_max_a = 0.5;
  double a_max_g = 0.5;      ///< m/s^2
  double a_max_a = 0.5;
  double safety_g = 0.4;     ///< m, platform safety distances of the clearance family
  double safety_a = 1.0;
  double epsilon = 1e-3;     ///< m, floor of every inverse distance
  ResidualWeights weights;
  int max_iterations = 100;
  double step_tolerance = 1e-5;
  double cost_tolerance = 1e-9;  ///< relative decrease that ends the run
  double initial_lambda = 1e-3;

  void validate() const;
};

/// exp(d_u - l_max) - 1 beyond the limit, 0 otherwise.
double tether_length_residual(double d_u, double l_max);

/// rho / max(d, epsilon) with rho = beta when d < safety, else 1. Shared by
/// the tether-obstacle and platform-clearance families.
double inverse_distance(double d, double safety, double beta, double epsilon);

/// Sum of inverse_distance(EDF(sample), rho_ot, beta, epsilon) over the
/// cfg.m tether samples. Throws OutOfBoundsError if a sample leaves the EDF.
double tether_obstacle_residual(const JointState& state, const world::VoxelEDF& edf,
                                const OptimizerConfig& cfg);

/// Hinge residuals; step i (1-based) goes from state i-1 to state i.
/// velocity[i-1] = max(0, |dp_i| / dt_i - v_max); acceleration[i-1] for
/// i = 1..n-2 is max(0, |v_{i+1} - v_i| / dt_{i+1} - a_max) with
/// v_i = dp_i / dt_i. Throws InvalidArgumentError for dt <= 0.
struct KinematicResiduals {
  std::vector<double> velocity_g, velocity_a;
  std::vector<double> acceleration_g, acceleration_a;
};
KinematicResiduals kinematic_residuals(const MarsupialTrajectory& traj, const OptimizerConfig& cfg);

/// equidistance: |dp_i| - mean gap (per step); clearance: inverse_distance of
/// each state's EDF with the platform safety distance; smoothness:
/// |p_{i-1} - 2 p_i + p_{i+1}| (interior states); time: dt_i (per step).
struct ShapeResiduals {
  std::vector<double> equidistance_g, equidistance_a;
  std::vector<double> clearance_g, clearance_a;
  std::vector<double> smoothness_g, smoothness_a;
  std::vector<double> time;
};
ShapeResiduals shape_residuals(const MarsupialTrajectory& traj, const world::VoxelEDF& edf,
                               const OptimizerConfig& cfg);

/// Weighted least-squares view of a trajectory. The free variables are, for
/// every interior state, the UGV x/y, the UAV x/y/z and u = log(dt), plus
/// log(dt) of the last state. Endpoint positions and the UGV height (set by
/// ground projection) are held.
/// The residual vector stacks the families of ResidualWeights::named(), each
/// row scaled by sqrt(weight); smoothness contributes the three components of
/// the second difference, so its squared sum matches the scalar form.
class TrajectoryProblem {
 public:
  static constexpr int kFamilies = 8;

  TrajectoryProblem(const world::VoxelEDF& edf, OptimizerConfig cfg, std::size_t states);

  Eigen::Index dimension() const { return dim_; }
  Eigen::Index residual_count() const { return rows_; }
  std::size_t states() const { return n_; }

  Eigen::VectorXd variables(const MarsupialTrajectory& traj) const;
  /// `ref` with its free variables replaced by x.
  MarsupialTrajectory apply(const MarsupialTrajectory& ref, const Eigen::VectorXd& x) const;

  struct Evaluation {
    Eigen::VectorXd r;
    Eigen::SparseMatrix<double> J;  ///< empty unless requested
  };
  /// nullopt when a platform or tether sample leaves the EDF.
  std::optional<Evaluation> evaluate(const MarsupialTrajectory& traj, bool jacobian) const;

  /// Weighted squared cost per family for a residual vector from evaluate().
  std::array<double, kFamilies> family_costs(const Eigen::VectorXd& r) const;
  /// First row of family f and its row count.
  std::pair<Eigen::Index, Eigen::Index> block(int f) const { return blocks_[static_cast<std::size_t>(f)]; }

 private:
  const world::VoxelEDF* edf_;
  OptimizerConfig cfg_;
  std::size_t n_;
  Eigen::Index dim_;
  Eigen::Index rows_;
  std::array<std::pair<Eigen::Index, Eigen::Index>, kFamilies> blocks_;
};

}  // namespace marsupial::trajopt
