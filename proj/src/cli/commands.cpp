#include "marsupial/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "marsupial/cli/run_output.hpp"
#include "marsupial/cli/scenarios.hpp"
#include "marsupial/common/io.hpp"
#include "marsupial/common/seed.hpp"
#include "marsupial/mission/metrics.hpp"
#include "marsupial/planner/path_io.hpp"
#include "marsupial/world/edf.hpp"
#include "marsupial/world/voxel_grid.hpp"

#ifndef MARSUPIAL_VERSION
#define MARSUPIAL_VERSION "0.0.0"
#endif

namespace marsupial::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string tool_version() { return MARSUPIAL_VERSION; }

namespace {

constexpr double kDeg = kPi / 180.0;

void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_logger_st("marsupial-nav");
    logger->set_pattern("[%l] %v");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("MARSUPIAL_NAV_LOG")) {
      const std::string v = env;
      if (v == "error") level = spdlog::level::err;
      else if (v == "warn") level = spdlog::level::warn;
      else if (v == "info") level = spdlog::level::info;
      else if (v == "debug") level = spdlog::level::debug;
    }
    logger->set_level(level);
    spdlog::set_default_logger(logger);
  });
}

ordered_json run_info(const RunOptions& opts, const LoadedConfig& lc) {
  return {{"config", opts.config.string()},
          {"config_sha256", lc.sha256},
          {"overrides", opts.sets},
          {"seed", lc.config.seed}};
}

std::string index_list(const std::vector<std::size_t>& idx) {
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) out += (i ? "," : "") + std::to_string(idx[i]);
  return out;
}

// Diagnostic naming every violating state; empty when the checks pass.
std::string hard_check_message(const trajopt::HardChecks& c) {
  std::string msg;
  if (!c.length_violations.empty()) msg += fmt::format("tether length > L_max at states [{}]", index_list(c.length_violations));
  if (!c.los_violations.empty()) {
    if (!msg.empty()) msg += "; ";
    msg += fmt::format("tether line of sight blocked at states [{}]", index_list(c.los_violations));
  }
  return msg;
}

ordered_json checks_json(const trajopt::HardChecks& c) {
  return {{"passed", c.passed()},
          {"length_violations", c.length_violations},
          {"los_violations", c.los_violations}};
}

// UAV hop from the end of a leg onto the exact PoI, checked like a planner edge.
bool hop_ok(const planner::Environment& env, const planner::JointState& from, const Vec3& goal,
            const planner::PlannerParams& p) {
  const double len = (goal - from.p_a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / p.edge_step())));
  for (int k = 1; k <= n; ++k) {
    const Vec3 q = from.p_a + (goal - from.p_a) * (static_cast<double>(k) / n);
    if (!env.air_free(q)) return false;
    if (!planner::check_tether_feasibility({from.p_g, q}, env.edf(), p.l_max, p.clearance_tether).feasible) {
      return false;
    }
  }
  return true;
}

ordered_json plan_report(const MissionPlan& plan) {
  ordered_json legs = ordered_json::array();
  double cost = 0.0;
  for (const auto& leg : plan.legs) {
    ordered_json cps = ordered_json::array();
    for (const auto& cp : leg.result.checkpoints) {
      cps.push_back({{"iteration", cp.iteration},
                     {"best_cost", cp.best_cost ? ordered_json(*cp.best_cost) : ordered_json(nullptr)}});
    }
    if (leg.result.found) cost += leg.result.path.cost;
    legs.push_back({{"poi", leg.poi},
                    {"found", leg.result.found},
                    {"cost", leg.result.found ? ordered_json(leg.result.path.cost) : ordered_json(nullptr)},
                    {"states", leg.result.path.states.size()},
                    {"iterations", leg.result.iterations},
                    {"tree_size", leg.result.tree_size},
                    {"rewires", leg.result.rewires},
                    {"goal_appended", leg.goal_appended},
                    {"checkpoints", cps},
                    {"message", leg.result.message}});
  }
  return {{"found", plan.found}, {"states", plan.states.size()}, {"cost", cost}, {"legs", legs}};
}

ordered_json breakdown_json(const std::vector<std::pair<std::string, double>>& b) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, v] : b) j[name] = v;
  return j;
}

ordered_json opt_report(const MissionOptimization& m) {
  ordered_json legs = ordered_json::array();
  for (const auto& r : m.legs) {
    legs.push_back({{"initial_cost", r.initial_cost},
                    {"final_cost", r.final_cost},
                    {"iterations", r.iterations},
                    {"accepted_steps", r.accepted_steps},
                    {"converged", r.converged},
                    {"initial_breakdown", breakdown_json(r.initial_breakdown)},
                    {"final_breakdown", breakdown_json(r.final_breakdown)},
                    {"initial_clearance_g_m", r.initial_clearance_g},
                    {"initial_clearance_a_m", r.initial_clearance_a},
                    {"final_clearance_g_m", r.final_clearance_g},
                    {"final_clearance_a_m", r.final_clearance_a},
                    {"cost_history", r.cost_history}});
  }
  return {{"initial_cost", m.initial_cost},
          {"final_cost", m.final_cost},
          {"states", m.trajectory.size()},
          {"duration_s", m.trajectory.duration()},
          {"hard_checks", checks_json(m.checks)},
          {"legs", legs}};
}

trajopt::TrajectoryMeta trajectory_meta(const ScenarioConfig& cfg) {
  return {cfg.optimizer.l_max, cfg.optimizer.weights.named(), cfg.seed};
}

fs::path input_or(const RunOptions& opts, const char* fallback) {
  return opts.input.empty() ? opts.out / fallback : opts.input;
}

}  // namespace

std::unique_ptr<WorldModel> build_world(const ScenarioConfig& cfg, bool with_ground) {
  auto w = std::make_unique<WorldModel>();
  if (!cfg.environment.generator.empty()) {
    auto scene = generate_scene(cfg.environment.generator, cfg.environment.params);
    w->cloud = std::move(scene.cloud);
    w->generated_markers = std::move(scene.markers);
  } else {
    w->cloud = world::load_point_cloud(cfg.environment.point_cloud);
  }
  if (w->cloud.empty()) throw EmptyInputError("environment point cloud is empty");
  const auto grid = world::build_occupancy(w->cloud, cfg.grid.resolution_m, cfg.grid.padding_m);
  w->edf = world::build_edf(grid, cfg.grid.edf_max_dist_m);
  spdlog::info("EDF {}x{}x{} at {} m", grid.geometry().dims()[0], grid.geometry().dims()[1],
               grid.geometry().dims()[2], cfg.grid.resolution_m);
  if (with_ground) {
    w->ground = world::traversability(w->cloud, cfg.traversability);
    if (w->ground.empty()) throw ConfigError("environment has no traversable ground cells");
    w->env = std::make_unique<planner::Environment>(w->edf, w->ground, cfg.planner.clearance_air);
  }
  return w;
}

std::vector<mission::Marker> mission_markers(const ScenarioConfig& cfg, const WorldModel& world) {
  return cfg.markers_from_generator ? world.generated_markers : cfg.sim.markers;
}

planner::JointState snapped_start(const ScenarioConfig& cfg, const WorldModel& world) {
  const int m = world.ground.member_containing(cfg.start_ugv);
  if (m < 0) throw planner::InfeasibleQueryError("start UGV position is not on a traversable ground cell");
  return {world.ground.center(static_cast<std::size_t>(m)), cfg.start_uav};
}

MissionPlan plan_mission(const ScenarioConfig& cfg, const WorldModel& world) {
  if (cfg.plan.pois.empty()) throw ConfigError("'inspection_plan' is empty");
  MissionPlan out;
  planner::JointState cur = snapped_start(cfg, world);
  out.states.push_back(cur);
  for (std::size_t i = 0; i < cfg.plan.pois.size(); ++i) {
    const Vec3& goal = cfg.plan.pois[i].position;
    planner::PlannerParams params = cfg.planner;
    params.seed = stage_seed(cfg.seed, "plan", i);
    LegResult leg{i, {}, false};
    try {
      leg.result = plan_rrt_star(*world.env, cur, goal, params);
    } catch (const planner::InfeasibleQueryError& e) {
      throw planner::InfeasibleQueryError(fmt::format("PoI {}: {}", i, e.what()));
    }
    if (!leg.result.found) {
      out.legs.push_back(std::move(leg));
      return out;
    }
    const auto& states = leg.result.path.states;
    out.states.insert(out.states.end(), states.begin() + 1, states.end());
    if (out.states.back().p_a != goal && hop_ok(*world.env, out.states.back(), goal, params)) {
      out.states.push_back({out.states.back().p_g, goal});
      leg.goal_appended = true;
    }
    cur = out.states.back();
    spdlog::info("leg {}: {} states, cost {:.3f}, {} iterations", i, states.size(), leg.result.path.cost,
                 leg.result.iterations);
    out.legs.push_back(std::move(leg));
  }
  out.found = true;
  return out;
}

MissionOptimization optimize_mission(const trajopt::MarsupialTrajectory& traj, const ScenarioConfig& cfg,
                                     const WorldModel& world) {
  traj.validate();
  if (traj.size() < 2) throw InvalidArgumentError("trajectory needs at least 2 states");
  std::vector<std::size_t> cuts{0};
  if (!cfg.plan.pois.empty()) {
    for (auto k : mission::assign_pois(traj, cfg.plan, cfg.sim.poi_tolerance)) cuts.push_back(k);
  }
  cuts.push_back(traj.size() - 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  MissionOptimization out;
  out.trajectory.states.push_back(traj.states[0]);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    trajopt::MarsupialTrajectory leg;
    leg.states.assign(traj.states.begin() + static_cast<std::ptrdiff_t>(cuts[c]),
                      traj.states.begin() + static_cast<std::ptrdiff_t>(cuts[c + 1]) + 1);
    leg.states[0].dt = 0.0;
    auto [opt, report] = trajopt::optimize_trajectory(leg, *world.env, cfg.optimizer);
    out.trajectory.states.insert(out.trajectory.states.end(), opt.states.begin() + 1, opt.states.end());
    out.initial_cost += report.initial_cost;
    out.final_cost += report.final_cost;
    out.legs.push_back(std::move(report));
  }
  out.checks = trajopt::hard_checks(out.trajectory, world.edf, cfg.optimizer.l_max);
  return out;
}

MissionInput read_mission_input(const fs::path& path) {
  const auto doc = nlohmann::json::parse(read_text(path), nullptr, false);
  if (doc.is_array()) return planner::load_path_json(path);
  if (doc.is_object()) return trajopt::load_trajectory_json(path);
  throw ParseError(fmt::format("{}: expected a path array or a trajectory object", path.string()));
}

trajopt::MarsupialTrajectory to_trajectory(const MissionInput& input, const ScenarioConfig& cfg,
                                           const WorldModel& world) {
  if (const auto* traj = std::get_if<trajopt::MarsupialTrajectory>(&input)) return *traj;
  const auto init = trajopt::initialize_checked(std::get<std::vector<planner::JointState>>(input), cfg.optimizer.v_g,
                                                cfg.optimizer.v_a, world.edf, cfg.optimizer.l_max);
  if (init.spacing != trajopt::Spacing::kPerPlatform) {
    spdlog::info("per-platform respacing breaks tether line of sight; using {}",
                 init.spacing == trajopt::Spacing::kShared ? "shared spacing" : "the path states");
  }
  return init.trajectory;
}

localization::BenchOptions bench_options(const ScenarioConfig& cfg) {
  const auto& l = cfg.localization;
  localization::BenchOptions o;
  o.trials = l.trials;
  o.max_init_err_m = l.max_init_err_m;
  o.max_init_err_deg = l.max_init_err_deg;
  o.sensor = world::SensorModel::spinning(l.rings, l.min_elevation_deg * kDeg, l.max_elevation_deg * kDeg,
                                          l.azimuth_steps, l.max_range_m, l.range_noise_m);
  o.dll.max_iterations = l.dll_max_iterations;
  o.icp.max_iterations = l.icp_max_iterations;
  o.icp.max_correspondence = l.icp_max_correspondence_m;
  o.run_icp = l.run_icp;
  o.seed = stage_seed(cfg.seed, "localize");
  return o;
}

int cmd_plan(const RunOptions& opts) {
  const auto lc = load_config(opts.config, opts.sets, opts.seed);
  const auto& cfg = lc.config;
  RunOutput out(opts.out, "plan");
  const auto world = out.timed("world", [&] { return build_world(cfg); });
  MissionPlan plan;
  try {
    plan = out.timed("plan", [&] { return plan_mission(cfg, *world); });
  } catch (const planner::InfeasibleQueryError& e) {
    spdlog::error("infeasible query: {}", e.what());
    write_text(out.file("plan_report.json"),
               ordered_json({{"found", false}, {"infeasible_query", e.what()}}).dump(2) + "\n");
    out.commit(run_info(opts, lc), kExitNoPath);
    return kExitNoPath;
  }
  write_text(out.file("plan_report.json"), plan_report(plan).dump(2) + "\n");
  if (!plan.found) {
    spdlog::error("no path found to PoI {} within {} iterations", plan.legs.back().poi, cfg.planner.max_iterations);
    out.commit(run_info(opts, lc), kExitNoPath);
    return kExitNoPath;
  }
  planner::save_path_json(plan.states, out.file("path.json"));
  planner::save_path_csv(plan.states, out.file("path.csv"));
  out.commit(run_info(opts, lc), kExitOk);
  return kExitOk;
}

int cmd_optimize(const RunOptions& opts) {
  const auto lc = load_config(opts.config, opts.sets, opts.seed);
  const auto& cfg = lc.config;
  const auto input = read_mission_input(input_or(opts, "path.json"));
  RunOutput out(opts.out, "optimize");
  const auto world = out.timed("world", [&] { return build_world(cfg); });
  const auto result = out.timed("optimize", [&] { return optimize_mission(to_trajectory(input, cfg, *world), cfg, *world); });
  trajopt::save_trajectory_json(result.trajectory, trajectory_meta(cfg), out.file("trajectory.json"));
  trajopt::save_trajectory_csv(result.trajectory, world->edf, out.file("trajectory.csv"));
  write_text(out.file("opt_report.json"), opt_report(result).dump(2) + "\n");
  const int code = result.checks.passed() ? kExitOk : kExitHardCheck;
  if (code != kExitOk) spdlog::error("hard checks failed: {}", hard_check_message(result.checks));
  out.commit(run_info(opts, lc), code);
  return code;
}

int cmd_simulate(const RunOptions& opts) {
  const auto lc = load_config(opts.config, opts.sets, opts.seed);
  const auto& cfg = lc.config;
  const auto input = read_mission_input(input_or(opts, "trajectory.json"));
  RunOutput out(opts.out, "simulate");
  const auto world = out.timed("world", [&] { return build_world(cfg); });
  const auto traj = to_trajectory(input, cfg, *world);
  const auto checks = trajopt::hard_checks(traj, world->edf, cfg.sim.l_max);
  if (!checks.passed()) {
    spdlog::error("input trajectory fails the hard checks: {}", hard_check_message(checks));
    write_text(out.file("metrics.json"), ordered_json({{"hard_checks", checks_json(checks)}}).dump(2) + "\n");
    out.commit(run_info(opts, lc), kExitHardCheck);
    return kExitHardCheck;
  }
  mission::SimConfig sim = cfg.sim;
  sim.markers = mission_markers(cfg, *world);
  const auto log = out.timed("simulate", [&] { return mission::simulate_mission(*world->env, traj, cfg.plan, sim, cfg.seed); });
  const auto metrics = mission::mission_metrics(log, traj);
  mission::save_simlog_csv(log, out.file("simlog.csv"));
  mission::save_detections_csv(log, out.file("detections.csv"));
  mission::save_metrics_json(metrics, out.file("metrics.json"));
  std::string events = "t,kind,detail\n";
  for (const auto& e : log.events) events += fmt::format("{:.4f},{},\"{}\"\n", e.t, e.kind, e.detail);
  write_text(out.file("events.csv"), events);
  const int code = log.complete() ? kExitOk : kExitAbort;
  if (code != kExitOk) spdlog::error("mission aborted: {}", log.abort_reason);
  out.commit(run_info(opts, lc), code);
  return code;
}

int cmd_localize_bench(const RunOptions& opts) {
  const auto lc = load_config(opts.config, opts.sets, opts.seed);
  const auto& cfg = lc.config;
  if (cfg.localization.scan_poses.empty()) throw ConfigError("'localization.scan_poses' is empty");
  const auto options = bench_options(cfg);
  RunOutput out(opts.out, "localize-bench");
  const auto world = out.timed("world", [&] { return build_world(cfg, false); });
  const localization::KdTree index(world->cloud.points);
  for (const auto& p : cfg.localization.scan_poses) {
    const auto d = world->edf.try_distance(p.position);
    if (!d || *d <= 0.0) throw ConfigError(fmt::format("scan pose ({:.2f}, {:.2f}, {:.2f}) is not in free space",
                                                       p.position.x(), p.position.y(), p.position.z()));
  }
  const localization::BenchScene scene{cfg.name, &world->edf, &index, cfg.localization.scan_poses};
  const auto rows = out.timed("benchmark", [&] { return localization::run_localization_benchmark(scene, options); });
  localization::write_bench_csv(rows, out.file("bench.csv"));
  ordered_json methods = ordered_json::array();
  const auto summary = localization::summarize(rows);
  for (const auto& s : summary) {
    methods.push_back({{"method", s.method},
                       {"runs", s.runs},
                       {"mean_time_s", s.mean_time_s},
                       {"mean_metric_m", s.mean_metric_m},
                       {"mean_final_err_m", s.mean_final_err_m},
                       {"mean_final_err_deg", s.mean_final_err_deg}});
  }
  write_text(out.file("summary.json"),
             ordered_json({{"scenario", cfg.name}, {"trials", cfg.localization.trials}, {"methods", methods}}).dump(2) + "\n");
  out.commit(run_info(opts, lc), kExitOk);
  return kExitOk;
}

int cmd_endurance(const RunOptions& opts) {
  const auto lc = load_config(opts.config, opts.sets, opts.seed);
  const auto& cfg = lc.config;
  RunOutput out(opts.out, "endurance");
  const auto& power = cfg.sim.power;
  const auto trace = out.timed("endurance", [&] { return mission::endurance_trace(power, cfg.endurance_duration_min); });
  std::string csv = "minute";
  for (int p = 0; p < power.packs; ++p) csv += fmt::format(",soc_pack{}", p + 1);
  csv += ",soc_backup\n";
  for (const auto& row : trace.rows) {
    csv += std::to_string(row.minute);
    for (double s : row.pack_soc) csv += fmt::format(",{:.6f}", 100.0 * s);
    csv += fmt::format(",{:.6f}\n", 100.0 * row.backup_soc);
  }
  write_text(out.file("endurance.csv"), csv);
  const auto& last = trace.rows.back();
  ordered_json summary = {
      {"preset", cfg.battery_preset.empty() ? ordered_json(nullptr) : ordered_json(cfg.battery_preset)},
      {"draw_w", power.draw_w},
      {"bank_capacity_wh", power.bank_capacity_wh},
      {"packs", power.packs},
      {"backup_capacity_wh", power.backup_capacity_wh},
      {"backup_draw_w", power.backup_draw_w},
      {"backup_floor", power.backup_floor},
      {"duration_min", cfg.endurance_duration_min},
      {"depletion_min", trace.depletion_min ? ordered_json(*trace.depletion_min) : ordered_json(nullptr)},
      {"final_pack_soc_pct", 100.0 * last.pack_soc.front()},
      {"final_backup_soc_pct", 100.0 * last.backup_soc}};
  write_text(out.file("endurance.json"), summary.dump(2) + "\n");
  out.commit(run_info(opts, lc), kExitOk);
  return kExitOk;
}

int run_command(const std::string& command, const RunOptions& opts) {
  init_logging();
  try {
    if (command == "plan") return cmd_plan(opts);
    if (command == "optimize") return cmd_optimize(opts);
    if (command == "simulate") return cmd_simulate(opts);
    if (command == "localize-bench") return cmd_localize_bench(opts);
    if (command == "endurance") return cmd_endurance(opts);
    spdlog::error("unknown command '{}'", command);
  } catch (const planner::InfeasibleQueryError& e) {
    spdlog::error("infeasible query: {}", e.what());
    return kExitNoPath;
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
  } catch (const std::exception& e) {
    spdlog::error("unexpected failure: {}", e.what());
  }
  return kExitConfig;
}

}  // namespace marsupial::cli
