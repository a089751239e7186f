#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "marsupial/cli/config.hpp"
#include "marsupial/localization/benchmark.hpp"
#include "marsupial/localization/kdtree.hpp"
#include "marsupial/planner/rrt_star.hpp"
#include "marsupial/trajopt/optimizer.hpp"
#include "marsupial/world/point_cloud.hpp"

namespace marsupial::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,     ///< config, IO or input-format error; nothing is written
  kExitNoPath = 2,     ///< planner found no path or the query is infeasible
  kExitHardCheck = 3,  ///< trajectory fails the tether hard checks
  kExitAbort = 4,      ///< simulated mission aborted
};

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::filesystem::path input;  ///< optimize/simulate input; defaults under `out`
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

/// Map, distance field and ground model of a scenario. Not movable: the
/// planner environment points into it.
struct WorldModel {
  world::PointCloud cloud;
  std::vector<mission::Marker> generated_markers;
  world::VoxelEDF edf;
  world::TraversableSet ground;
  std::unique_ptr<planner::Environment> env;

  WorldModel() = default;
  WorldModel(const WorldModel&) = delete;
  WorldModel& operator=(const WorldModel&) = delete;
};

/// Loads or generates the cloud and builds the EDF; the ground model and the
/// planner environment only when `with_ground` is set.
std::unique_ptr<WorldModel> build_world(const ScenarioConfig& cfg, bool with_ground = true);

/// Configured markers, or the generator's when the config asks for them.
std::vector<mission::Marker> mission_markers(const ScenarioConfig& cfg, const WorldModel& world);

/// Start state with the UGV snapped to the centre of its ground cell.
/// Throws planner::InfeasibleQueryError when it is off the ground model.
planner::JointState snapped_start(const ScenarioConfig& cfg, const WorldModel& world);

struct LegResult {
  std::size_t poi = 0;
  planner::PlanResult result;
  bool goal_appended = false;  ///< exact PoI state added after the tolerance hit
};

struct MissionPlan {
  bool found = false;
  std::vector<planner::JointState> states;
  std::vector<LegResult> legs;
};

/// One RRT* query per PoI, chained from the start; leg i uses
/// stage_seed(seed, "plan", i). Stops at the first leg without a path.
/// When a leg ends within tolerance of its PoI, the exact PoI state is
/// appended if that hop keeps the air and tether clearances.
MissionPlan plan_mission(const ScenarioConfig& cfg, const WorldModel& world);

struct MissionOptimization {
  trajopt::MarsupialTrajectory trajectory;
  std::vector<trajopt::OptReport> legs;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  trajopt::HardChecks checks;  ///< of the stitched trajectory
};

/// Optimizes the trajectory leg by leg between PoI states, so those states
/// stay fixed, then stitches the legs and re-runs the hard checks.
MissionOptimization optimize_mission(const trajopt::MarsupialTrajectory& traj,
                                     const ScenarioConfig& cfg, const WorldModel& world);

/// Either a path (JSON array of joint states) or a trajectory (JSON object).
using MissionInput = std::variant<std::vector<planner::JointState>, trajopt::MarsupialTrajectory>;
MissionInput read_mission_input(const std::filesystem::path& path);

/// Trajectories pass through; paths are timed with the optimizer's nominal
/// speeds via trajopt::initialize_checked.
trajopt::MarsupialTrajectory to_trajectory(const MissionInput& input, const ScenarioConfig& cfg,
                                           const WorldModel& world);

/// Benchmark inputs derived from the localization section.
localization::BenchOptions bench_options(const ScenarioConfig& cfg);

int cmd_plan(const RunOptions& opts);
int cmd_optimize(const RunOptions& opts);
int cmd_simulate(const RunOptions& opts);
int cmd_localize_bench(const RunOptions& opts);
int cmd_endurance(const RunOptions& opts);

/// Dispatches by command name; maps every library error to an exit code and
/// prints a diagnostic on standard error.
int run_command(const std::string& command, const RunOptions& opts);

/// Tool version baked in at build time.
std::string tool_version();

}  // namespace marsupial::cli
