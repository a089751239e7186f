#include "marsupial/localization/benchmark.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include <fmt/format.h>

#include "marsupial/common/error.hpp"
#include "marsupial/common/seed.hpp"

namespace marsupial::localization {

Pose perturb_pose(const Pose& truth, double max_m, double max_deg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3 dir(n(rng), n(rng), n(rng));
  dir /= std::max(dir.norm(), 1e-12);
  const double mag = max_m * u(rng);
  const double dyaw = (2.0 * u(rng) - 1.0) * max_deg * kPi / 180.0;
  Pose out = truth;
  out.position += dir * mag;
  out.yaw = wrap_angle(truth.yaw + dyaw);
  return out;
}

namespace {

BenchRow make_row(const std::string& method, const BenchScene& scene, std::uint64_t seed,
                  const Pose& truth, const Pose& init, const RegistrationReport& rep,
                  const world::PointCloud& scan) {
  BenchRow row;
  row.method = method;
  row.scenario = scene.name;
  row.seed = seed;
  row.init_err_m = (init.position - truth.position).norm();
  row.init_err_deg = angle_distance(init.yaw, truth.yaw) * 180.0 / kPi;
  row.final_err_m = (rep.pose.position - truth.position).norm();
  row.final_err_deg = angle_distance(rep.pose.yaw, truth.yaw) * 180.0 / kPi;
  row.metric_m = scan_alignment_metric(scan, rep.pose, *scene.edf);
  row.time_s = rep.wall_time_s;
  row.iters = rep.iterations;
  return row;
}

}  // namespace

std::vector<BenchRow> run_localization_benchmark(const BenchScene& scene,
                                                 const BenchOptions& options) {
  if (!scene.edf || (options.run_icp && !scene.map_index)) {
    throw InvalidArgumentError("benchmark scene is missing its EDF or map index");
  }
  if (scene.scan_poses.empty()) throw EmptyInputError("benchmark has no scan poses");
  std::vector<BenchRow> rows;
  for (int t = 0; t < options.trials; ++t) {
    const auto trial_seed = stage_seed(options.seed, "localize-trial", static_cast<std::uint64_t>(t));
    const Pose& truth = scene.scan_poses[static_cast<std::size_t>(t) % scene.scan_poses.size()];
    const auto scan =
        world::simulate_lidar(*scene.edf, truth, options.sensor, stage_seed(trial_seed, "scan"));
    if (scan.empty()) throw EmptyInputError(fmt::format("trial {} produced an empty scan", t));
    const Pose init = perturb_pose(truth, options.max_init_err_m, options.max_init_err_deg,
                                   stage_seed(trial_seed, "perturb"));
    if (options.run_dll) {
      const auto rep = dll_register(scan, *scene.edf, init, options.dll);
      rows.push_back(make_row("dll", scene, trial_seed, truth, init, rep, scan));
    }
    if (options.run_icp) {
      const auto rep = icp_register(scan, *scene.map_index, init, options.icp);
      rows.push_back(make_row("icp", scene, trial_seed, truth, init, rep, scan));
    }
  }
  return rows;
}

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
  std::map<std::string, BenchSummary> acc;
  for (const auto& r : rows) {
    auto& s = acc[r.method];
    s.method = r.method;
    ++s.runs;
    s.mean_time_s += r.time_s;
    s.mean_metric_m += r.metric_m;
    s.mean_final_err_m += r.final_err_m;
    s.mean_final_err_deg += r.final_err_deg;
  }
  std::vector<BenchSummary> out;
  for (auto& [name, s] : acc) {
    const double n = static_cast<double>(s.runs);
    s.mean_time_s /= n;
    s.mean_metric_m /= n;
    s.mean_final_err_m /= n;
    s.mean_final_err_deg /= n;
    out.push_back(s);
  }
  return out;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError(fmt::format("cannot write {}", path.string()));
  f << "method,scenario,seed,init_err_m,init_err_deg,final_err_m,final_err_deg,metric_m,time_s,"
       "iters\n";
  for (const auto& r : rows) {
    f << fmt::format("{},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.6f},{}\n", r.method,
                     r.scenario, r.seed, r.init_err_m, r.init_err_deg, r.final_err_m,
                     r.final_err_deg, r.metric_m, r.time_s, r.iters);
  }
  if (!f) throw IoError(fmt::format("failed writing {}", path.string()));
}

}  // namespace marsupial::localization
