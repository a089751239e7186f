#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "marsupial/localization/registration.hpp"
#include "marsupial/world/lidar_sim.hpp"
#include "marsupial/world/voxel_grid.hpp"

namespace marsupial::localization {

/// Shared, immutable inputs of a localization benchmark.
struct BenchScene {
  std::string name;
  const world::VoxelEDF* edf = nullptr;    ///< raycast target, DLL map and alignment metric
  const KdTree* map_index = nullptr;       ///< ICP map
  std::vector<Pose> scan_poses;            ///< ground-truth sensor poses, cycled over trials
};

struct BenchOptions {
  int trials = 20;
  double max_init_err_m = 0.5;
  double max_init_err_deg = 10.0;
  world::SensorModel sensor;
  DllOptions dll;
  IcpOptions icp;
  bool run_dll = true;
  bool run_icp = true;
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::string method;
  std::string scenario;
  std::uint64_t seed = 0;  ///< per-trial seed (scan noise and perturbation)
  double init_err_m = 0.0;
  double init_err_deg = 0.0;
  double final_err_m = 0.0;
  double final_err_deg = 0.0;
  double metric_m = 0.0;
  double time_s = 0.0;
  int iters = 0;
};

struct BenchSummary {
  std::string method;
  int runs = 0;
  double mean_time_s = 0.0;
  double mean_metric_m = 0.0;
  double mean_final_err_m = 0.0;
  double mean_final_err_deg = 0.0;
};

/// Random initial-guess offset: uniform direction, magnitude uniform in
/// [0, max_m]; yaw offset uniform in [-max_deg, max_deg].
Pose perturb_pose(const Pose& truth, double max_m, double max_deg, std::uint64_t seed);

/// Runs DLL and/or ICP on the same synthetic scans and initial guesses.
/// Rows are ordered by trial, then method (dll before icp).
std::vector<BenchRow> run_localization_benchmark(const BenchScene& scene,
                                                 const BenchOptions& options);

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows);

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path);

}  // namespace marsupial::localization
