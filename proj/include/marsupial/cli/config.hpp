#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "marsupial/common/error.hpp"
#include "marsupial/common/pose.hpp"
#include "marsupial/mission/simulator.hpp"
#include "marsupial/planner/rrt_star.hpp"
#include "marsupial/trajopt/residuals.hpp"
#include "marsupial/world/traversability.hpp"

namespace marsupial::cli {

/// Schema violation in a scenario configuration (exit code 1).
class ConfigError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct EnvironmentSource {
  std::string generator;               ///< procedural scene name, or empty
  nlohmann::json params = nlohmann::json::object();
  std::filesystem::path point_cloud;   ///< XYZ/PLY file, or empty
};

struct GridConfig {
  double resolution_m = 0.2;
  double padding_m = 0.5;
  double edf_max_dist_m = 2.0;
};

struct LocalizationConfig {
  int trials = 20;
  double max_init_err_m = 0.5;
  double max_init_err_deg = 10.0;
  int rings = 16;
  double min_elevation_deg = -15.0;
  double max_elevation_deg = 15.0;
  int azimuth_steps = 256;
  double max_range_m = 30.0;
  double range_noise_m = 0.0;
  std::vector<Pose> scan_poses;
  int dll_max_iterations = 50;
  int icp_max_iterations = 60;
  double icp_max_correspondence_m = 1.0;
  bool run_icp = true;
};

/// Everything a command needs, in SI units. Keys in the JSON carry their unit
/// as a suffix (_m, _s, _rad, _deg, _w, _wh, _mps, ...); dimensionless values
/// have none. Unknown keys are rejected.
struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 1;
  EnvironmentSource environment;
  GridConfig grid;
  world::TraversabilityParams traversability;
  planner::PlannerParams planner;
  Vec3 start_ugv = Vec3::Zero();
  Vec3 start_uav = Vec3::Zero();
  mission::InspectionPlan plan;
  trajopt::OptimizerConfig optimizer;
  mission::SimConfig sim;
  bool markers_from_generator = false;
  std::string battery_preset;  ///< empty when draw_w is given directly
  int endurance_duration_min = 120;
  LocalizationConfig localization;
};

/// Applies `key.path=value` overrides; value is parsed as JSON and falls back
/// to a string. Numeric path segments index arrays. Throws ConfigError.
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& sets);

/// Throws ConfigError for schema violations. Relative point-cloud paths are
/// resolved against `base_dir`.
ScenarioConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

struct LoadedConfig {
  ScenarioConfig config;
  std::string sha256;  ///< of the config file bytes
};

/// Reads, overrides and parses a config file; `seed` replaces the file's seed.
/// Throws IoError or ConfigError.
LoadedConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& sets,
                         std::optional<std::uint64_t> seed);

}  // namespace marsupial::cli
