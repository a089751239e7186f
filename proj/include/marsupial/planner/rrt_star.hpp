#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "marsupial/common/error.hpp"
#include "marsupial/planner/tether.hpp"

namespace marsupial::planner {

/// The query itself is unsolvable as posed (infeasible start, goal inside an
/// obstacle or below the air clearance). The message names the failed check.
class InfeasibleQueryError : public InvalidArgumentError {
 public:
  using InvalidArgumentError::InvalidArgumentError;
};

struct PlannerParams {
  double l_max = 70.0;              ///< m, maximum tether length
  double clearance_air = 0.5;       ///< m, UAV clearance from obstacles
  double clearance_tether = 0.2;    ///< m, tether clearance from obstacles
  double step_g = 1.0;              ///< m, UGV steering step
  double step_a = 1.0;              ///< m, UAV steering step
  double goal_tolerance = 0.3;      ///< m, UAV distance to the goal
  int max_iterations = 20000;
  double rewire_gamma = 6.0;        ///< shrinking-ball constant, r = gamma (log n / n)^(1/6)
  double w_g = 1.0;
  double w_a = 1.0;
  double p_goal = 0.05;             ///< goal-bias probability
  std::uint64_t seed = 1;
  /// Iteration counts at which the best cost found so far is recorded.
  std::vector<int> checkpoints = {1000, 5000, 20000};

  void validate() const;
  /// Interpolation spacing for edge checks: min(step_g, step_a) / 4.
  double edge_step() const;
};

/// Weighted 6-D distance used for nearest-neighbor and ball queries:
/// sqrt(w_g |dp_g|^2 + w_a |dp_a|^2).
double joint_distance(const JointState& a, const JointState& b, double w_g, double w_a);

/// Weighted path length of one edge: w_g |dp_g| + w_a |dp_a|.
double edge_cost(const JointState& a, const JointState& b, double w_g, double w_a);

struct JointPath {
  std::vector<JointState> states;
  std::vector<int> tree_nodes;  ///< tree index of each state; tree_nodes[i-1] is the parent of tree_nodes[i]
  double cost = 0.0;

  bool empty() const { return states.empty(); }
  std::size_t size() const { return states.size(); }
};

/// Sum of edge_cost over consecutive states, recomputed from scratch.
double path_cost(const std::vector<JointState>& states, double w_g, double w_a);

struct Checkpoint {
  int iteration = 0;
  std::optional<double> best_cost;  ///< empty while no goal node exists
};

struct PlanResult {
  bool found = false;
  JointPath path;
  int iterations = 0;
  std::size_t tree_size = 0;
  std::size_t rewires = 0;
  std::vector<Checkpoint> checkpoints;
  std::string message;  ///< reason when no path was found
};

/// Moves each platform from `from` toward `to` by at most its step, then snaps
/// the UGV to the nearest traversable cell center. Feasibility is not checked.
JointState steer(const JointState& from, const JointState& to, double step_g, double step_a,
                 const world::TraversableSet& ground);

/// UGV uniform over traversable cell centers, UAV uniform over safe-air nodes;
/// with probability p_goal the UAV component is `goal_uav` instead.
/// Throws EmptyInputError when either set is empty.
JointState sample_state(const Environment& env, const Vec3& goal_uav, double p_goal,
                        std::mt19937_64& rng);

/// True iff the straight joint edge a -> b is valid: the UAV segment keeps the
/// air clearance, the UGV segment stays on traversable cells that are pairwise
/// neighbors, and the tether is feasible at every interpolation step.
bool edge_feasible(const Environment& env, const JointState& a, const JointState& b,
                   const PlannerParams& params);

/// Joint RRT* from `start` until the UAV is within goal_tolerance of
/// `goal_uav`; the final UGV position is free. Runs all max_iterations and
/// returns the cheapest goal-reaching branch. Deterministic for a given seed.
/// Throws InfeasibleQueryError for an unusable start or goal; an exhausted
/// budget is reported as found = false.
PlanResult plan_rrt_star(const Environment& env, const JointState& start, const Vec3& goal_uav,
                         const PlannerParams& params);

}  // namespace marsupial::planner
