// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"
#include "marsupial/cli/commands.hpp"
#include "marsupial/common/io.hpp"
#include "marsupial/localization/benchmark.hpp"
#include "marsupial/mission/battery.hpp"
#include "marsupial/mission/metrics.hpp"
#include "marsupial/mission/simulator.hpp"
#include "marsupial/planner/rrt_star.hpp"
#include "marsupial/trajopt/optimizer.hpp"
#include "marsupial/trajopt/residuals.hpp"
#include "marsupial/world/edf.hpp"
#include "test_util.hpp"

using namespace marsupial;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScenarios = MARSUPIAL_SCENARIO_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

cli::ScenarioConfig scenario(const std::string& name, std::vector<std::string> sets = {}) {
  return cli::load_config(kScenarios / (name + ".json"), sets, std::nullopt).config;
}

// Worlds are shared between criteria; building them once keeps the suite fast.
const cli::WorldModel& world_of(const std::string& name) {
  static std::map<std::string, std::unique_ptr<cli::WorldModel>> cache;
  auto& slot = cache[name];
  if (!slot) slot = cli::build_world(scenario(name), name != "thermal_like");
  return *slot;
}

// ---------------------------------------------------------------------------
// 1. Tether residual closed forms.

Outcome tether_residuals() {
  using trajopt::tether_length_residual;
  const double tol = 1e-12;
  const double l_max = 70.0;
  std::vector<std::string> bad;
  if (std::abs(tether_length_residual(l_max, l_max)) > tol) bad.push_back("d = L_max");
  if (std::abs(tether_length_residual(l_max + 1.0, l_max) - (std::exp(1.0) - 1.0)) > tol) bad.push_back("d = L_max + 1");

  trajopt::OptimizerConfig cfg;
  cfg.rho_ot = 0.5;
  cfg.m = 6;
  const auto flat = testutil::column_field(std::vector<double>(6, 1.0));
  const double all_far = trajopt::tether_obstacle_residual({Vec3(0, 1, 1), Vec3(5, 1, 1)}, flat, cfg);
  if (std::abs(all_far - 6.0) > tol) bad.push_back(fmt::format("m samples at 1 m gave {}", all_far));

  cfg.beta = 10.0;
  cfg.m = 3;
  const auto near = testutil::column_field({0.25, 1.0, 1.0});
  const double mixed = trajopt::tether_obstacle_residual({Vec3(0, 1, 1), Vec3(2, 1, 1)}, near, cfg);
  if (std::abs(mixed - 42.0) > tol) bad.push_back(fmt::format("0.25/1/1 with beta 10 gave {}", mixed));

  if (!bad.empty()) return {false, "mismatch: " + fmt::format("{}", fmt::join(bad, "; "))};
  return {true, fmt::format("4 closed forms within {:g}", tol)};
}

// ---------------------------------------------------------------------------
// 2. EDF against the brute-force oracle.

Outcome edf_oracle() {
  std::size_t node_mismatch = 0, interp_mismatch = 0;
  double worst_grad = 0.0;
  int grad_points = 0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-4;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto grid = testutil::random_grid(16, 0.25, 0.02 + 0.01 * (seed % 5), 1000 + seed);
    const auto oracle = testutil::brute_force_edf(grid);
    const auto edf = world::build_edf(grid, 1e9);
    const auto& g = edf.geometry();
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      if (edf.node_value(i) != oracle[i]) ++node_mismatch;
      if (edf.query(g.node_position(g.grid_index(i))).distance != edf.node_value(i)) ++interp_mismatch;
    }
    // 50 interior points per grid, 1000 in total.
    for (int k = 0; k < 50;) {
      Vec3 p;
      for (int a = 0; a < 3; ++a) p[a] = g.origin()[a] + u(rng) * (g.dims()[a] - 1) * g.resolution();
      if (!testutil::away_from_faces(g, p, 2.0 * h / g.resolution())) continue;
      const Vec3 grad = edf.query(p).gradient;
      Vec3 fd;
      for (int a = 0; a < 3; ++a) {
        Vec3 dp = Vec3::Zero();
        dp[a] = h;
        fd[a] = (edf.query(p + dp).distance - edf.query(p - dp).distance) / (2.0 * h);
      }
      worst_grad = std::max(worst_grad, (grad - fd).norm() / std::max(grad.norm(), 1e-3));
      ++grad_points;
      ++k;
    }
  }
  const bool pass = node_mismatch == 0 && interp_mismatch == 0 && worst_grad <= 1e-5;
  return {pass, fmt::format("node mismatches {}, node-query mismatches {}, worst gradient rel err {:.2e} at {} points",
                            node_mismatch, interp_mismatch, worst_grad, grad_points)};
}

// ---------------------------------------------------------------------------
// 3./4. Localization.

std::vector<localization::BenchRow> bench(const std::vector<std::string>& sets) {
  const auto cfg = scenario("thermal_like", sets);
  const auto& w = world_of("thermal_like");
  static const localization::KdTree index(w.cloud.points);
  const localization::BenchScene scene{cfg.name, &w.edf, &index, cfg.localization.scan_poses};
  return localization::run_localization_benchmark(scene, cli::bench_options(cfg));
}

Outcome dll_recovery() {
  const std::vector<std::string> base = {"localization.trials=100", "localization.run_icp=false",
                                         "localization.max_init_err_m=0.5", "localization.max_init_err_deg=10"};
  auto with = [&](const std::string& noise) {
    auto s = base;
    s.push_back("localization.sensor.range_noise_m=" + noise);
    return s;
  };
  int ok_clean = 0, ok_noisy = 0, n_clean = 0, n_noisy = 0;
  double worst_clean = 0.0;
  for (const auto& r : bench(with("0"))) {
    ++n_clean;
    ok_clean += r.final_err_m <= 0.05 && r.final_err_deg <= 1.0;
    worst_clean = std::max(worst_clean, r.final_err_m);
  }
  for (const auto& r : bench(with("0.02"))) {
    ++n_noisy;
    ok_noisy += r.final_err_m <= 0.10;
  }
  const double rc = static_cast<double>(ok_clean) / n_clean, rn = static_cast<double>(ok_noisy) / n_noisy;
  return {n_clean == 100 && n_noisy == 100 && rc >= 0.95 && rn >= 0.95,
          fmt::format("noiseless {}/{} within 0.05 m/1 deg (worst {:.4f} m); 2 cm noise {}/{} within 0.10 m", ok_clean,
                      n_clean, worst_clean, ok_noisy, n_noisy)};
}

Outcome dll_vs_icp() {
  const auto rows = bench({"localization.trials=30", "localization.run_icp=true", "localization.sensor.range_noise_m=0.02"});
  const auto summary = localization::summarize(rows);
  const localization::BenchSummary *dll = nullptr, *icp = nullptr;
  for (const auto& s : summary) (s.method == "dll" ? dll : icp) = &s;
  if (!dll || !icp) return {false, "missing method rows"};
  const double time_ratio = icp->mean_time_s / dll->mean_time_s;
  const double metric_ratio = dll->mean_metric_m / icp->mean_metric_m;
  return {dll->mean_time_s <= icp->mean_time_s / 5.0 && std::abs(metric_ratio - 1.0) <= 0.20,
          fmt::format("time dll {:.4f} s vs icp {:.4f} s (icp/dll {:.1f}); metric dll {:.4f} m vs icp {:.4f} m "
                      "(ratio {:.3f})",
                      dll->mean_time_s, icp->mean_time_s, time_ratio, dll->mean_metric_m, icp->mean_metric_m,
                      metric_ratio)};
}

// ---------------------------------------------------------------------------
// 5./6. Planner and optimizer on the three planning scenes.

const std::vector<std::string> kPlanScenes = {"corridor", "pillared_hall", "wall_inspection"};

struct PlannerRun {
  std::string scene;
  std::uint64_t seed = 0;
  planner::PlanResult result;
};

const std::vector<PlannerRun>& planner_runs() {
  static const std::vector<PlannerRun> runs = [] {
    std::vector<PlannerRun> out;
    for (const auto& name : kPlanScenes) {
      const auto cfg = scenario(name);
      const auto& w = world_of(name);
      const auto start = cli::snapped_start(cfg, w);
      for (std::uint64_t s = 1; s <= 20; ++s) {
        auto params = cfg.planner;
        params.seed = s;
        params.checkpoints = {1000, 20000};
        params.max_iterations = 20000;
        out.push_back({name, s, planner::plan_rrt_star(*w.env, start, cfg.plan.pois.back().position, params)});
      }
    }
    return out;
  }();
  return runs;
}

Outcome planner_feasibility() {
  std::vector<std::string> parts;
  bool pass = true;
  for (const auto& name : kPlanScenes) {
    const auto cfg = scenario(name);
    const auto& w = world_of(name);
    const double res = w.edf.resolution();
    int found = 0, bad_states = 0, non_monotone = 0, with_early = 0;
    for (const auto& run : planner_runs()) {
      if (run.scene != name) continue;
      if (!run.result.found) continue;
      ++found;
      for (const auto& s : run.result.path.states) {
        // The planner samples the tether at res/2; the re-check uses res/20. The
        // slack bounds the trilinear dip between planner samples (sqrt(3) res / 4).
        const bool ok = s.tether_length() <= cfg.planner.l_max &&
                        testutil::dense_tether_ok(w.edf, s.p_g, s.p_a, cfg.planner.clearance_tether, res / 20.0,
                                                  0.45 * res);
        bad_states += !ok;
      }
      const auto& cps = run.result.checkpoints;
      const auto at = [&](int it) -> std::optional<double> {
        for (const auto& c : cps) {
          if (c.iteration == it) return c.best_cost;
        }
        return std::nullopt;
      };
      const auto early = at(1000), late = at(20000);
      if (early) ++with_early;
      if (!late || (early && *late > *early)) ++non_monotone;
    }
    pass = pass && found >= 19 && bad_states == 0 && non_monotone == 0;
    parts.push_back(fmt::format("{} {}/20 found, {} bad states, {} cost increases ({} had a path at 1k)", name, found,
                                bad_states, non_monotone, with_early));
  }
  return {pass, fmt::format("{}", fmt::join(parts, "; "))};
}

Outcome optimizer_contracts() {
  int runs = 0, cost_up = 0, clearance_down = 0, moved_ends = 0, failed_checks = 0;
  double worst_gain = 0.0;
  for (const auto& run : planner_runs()) {
    if (!run.result.found || run.result.path.states.size() < 2) continue;
    const auto cfg = scenario(run.scene);
    const auto& w = world_of(run.scene);
    const auto init = trajopt::initialize_checked(run.result.path.states, cfg.optimizer.v_g, cfg.optimizer.v_a, w.edf,
                                                  cfg.optimizer.l_max)
                          .trajectory;
    const auto [opt, rep] = trajopt::optimize_trajectory(init, *w.env, cfg.optimizer);
    ++runs;
    cost_up += rep.final_cost > rep.initial_cost;
    worst_gain = std::max(worst_gain, 1.0 - rep.final_cost / rep.initial_cost);
    const double g0 = trajopt::polyline_clearance(trajopt::ugv_points(init), w.edf);
    const double a0 = trajopt::polyline_clearance(trajopt::uav_points(init), w.edf);
    const double g1 = trajopt::polyline_clearance(trajopt::ugv_points(opt), w.edf);
    const double a1 = trajopt::polyline_clearance(trajopt::uav_points(opt), w.edf);
    clearance_down += g1 < g0 || a1 < a0;
    const auto &f0 = init.states.front(), &f1 = opt.states.front(), &l0 = init.states.back(), &l1 = opt.states.back();
    moved_ends += !(f0.p_g == f1.p_g && f0.p_a == f1.p_a && l0.p_g == l1.p_g && l0.p_a == l1.p_a);
    // Post-hoc checks: the library's and an independent dense one at clearance 0.
    const auto checks = trajopt::hard_checks(opt, w.edf, cfg.optimizer.l_max);
    bool ok = checks.passed();
    for (const auto& s : opt.states) {
      ok = ok && s.joint().tether_length() <= cfg.optimizer.l_max &&
           testutil::dense_tether_ok(w.edf, s.p_g, s.p_a, 0.0, w.edf.resolution() / 20.0, 0.45 * w.edf.resolution());
    }
    if (!ok) {
      std::fprintf(stderr, "%s seed %llu: los %zu length %zu\n", run.scene.c_str(), (unsigned long long)run.seed,
                   checks.los_violations.size(), checks.length_violations.size());
    }
    failed_checks += !ok;
  }

  // Jacobian against central differences at 50 random states of the corridor.
  const auto cfg = scenario("corridor");
  const auto& w = world_of("corridor");
  const int n = 8;
  const trajopt::TrajectoryProblem problem(w.edf, cfg.optimizer, n);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ux(-0.3, 0.3), uy(0.6, 3.4), uz(0.4, 3.0), udt(0.8, 4.0);
  int tested = 0, attempts = 0;
  double worst_jac = 0.0;
  while (tested < 50 && attempts < 5000) {
    ++attempts;
    trajopt::MarsupialTrajectory t;
    for (int i = 0; i < n; ++i) {
      const double x = 2.0 + i * 1.1 + ux(rng);
      t.states.push_back({Vec3(x, 0.5 + 0.3 * uy(rng), 0.63), Vec3(x + 0.2, uy(rng), uz(rng)), i == 0 ? 0.0 : udt(rng)});
    }
    if (testutil::near_kink(t, w.edf, cfg.optimizer)) continue;
    const auto err = testutil::jacobian_fd_error(problem, t, 1e-6);
    if (!err) continue;
    worst_jac = std::max(worst_jac, *err);
    ++tested;
  }

  const bool pass = runs > 0 && cost_up == 0 && clearance_down == 0 && moved_ends == 0 && failed_checks == 0 &&
                    tested == 50 && worst_jac <= 1e-4;
  return {pass, fmt::format("{} trajectories: {} cost increases (best reduction {:.1f}%), {} clearance drops, {} moved "
                            "endpoints, {} failed hard checks; Jacobian worst rel err {:.2e} over {} states",
                            runs, cost_up, 100.0 * worst_gain, clearance_down, moved_ends, failed_checks, worst_jac,
                            tested)};
}

// ---------------------------------------------------------------------------
// 7./8. Wall inspection mission.

struct MissionRun {
  std::uint64_t seed = 0;
  bool planned = false;
  bool feasible = false;
  mission::MissionMetrics metrics;
  double sigma = 0.0;
};

const std::vector<MissionRun>& mission_runs() {
  static const std::vector<MissionRun> runs = [] {
    std::vector<MissionRun> out;
    const auto& w = world_of("wall_inspection");
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto cfg = cli::load_config(kScenarios / "wall_inspection.json", {}, seed).config;
      cfg.sim.command_noise = 0.02;
      MissionRun run{seed, false, false, {}, cfg.sim.camera.noise_sigma};
      const auto plan = cli::plan_mission(cfg, w);
      run.planned = plan.found;
      if (plan.found) {
        const auto init = cli::to_trajectory(plan.states, cfg, w);
        const auto opt = cli::optimize_mission(init, cfg, w);
        run.feasible = opt.checks.passed();
        if (run.feasible) {
          auto sim = cfg.sim;
          sim.markers = cli::mission_markers(cfg, w);
          const auto log = mission::simulate_mission(*w.env, opt.trajectory, cfg.plan, sim, cfg.seed);
          run.metrics = mission::mission_metrics(log, opt.trajectory);
        }
      }
      out.push_back(run);
    }
    return out;
  }();
  return runs;
}

Outcome tracking_errors() {
  bool pass = true;
  std::vector<std::string> parts;
  for (const auto& r : mission_runs()) {
    const auto& m = r.metrics;
    const bool ok = r.feasible && m.phase == "complete" && m.mean_cross_track_m <= 0.10 && m.mean_height_error_m <= 0.10;
    pass = pass && ok;
    parts.push_back(r.feasible ? fmt::format("seed {} {}: cross-track {:.3f} m, height {:.3f} m", r.seed, m.phase,
                                             m.mean_cross_track_m, m.mean_height_error_m)
                               : fmt::format("seed {}: no feasible trajectory", r.seed));
  }
  return {pass, fmt::format("{}", fmt::join(parts, "; "))};
}

Outcome inspection_completeness() {
  bool pass = true;
  std::vector<std::string> parts;
  for (const auto& r : mission_runs()) {
    const auto& m = r.metrics;
    double worst = 0.0, mean_single = 0.0;
    for (const auto& s : m.markers) {
      worst = std::max(worst, s.mean_error_m);
      mean_single += s.mean_single_error_m;
    }
    if (!m.markers.empty()) mean_single /= static_cast<double>(m.markers.size());
    const bool ok = r.feasible && m.markers.size() == 12 && m.markers_detected == 12 && worst <= 2.0 * r.sigma;
    pass = pass && ok;
    parts.push_back(fmt::format("seed {}: {}/12 detected, worst averaged error {:.3f} m, mean single {:.3f} m",
                                r.seed, m.markers_detected, worst, mean_single));
  }
  return {pass, fmt::format("{} (limit 2 sigma = {:.3f} m)", fmt::join(parts, "; "), 2.0 * mission_runs()[0].sigma)};
}

// ---------------------------------------------------------------------------
// 9. Endurance.

Outcome endurance() {
  const auto fitted = scenario("endurance_fitted");
  const auto trace = mission::endurance_trace(fitted.sim.power, 60);
  const int minutes[] = {0, 15, 30, 45, 60};
  const double table[] = {100.0, 88.5, 76.5, 65.0, 53.0};
  bool pass = true;
  std::vector<std::string> got;
  for (int i = 0; i < 5; ++i) {
    const auto& row = trace.rows[static_cast<std::size_t>(minutes[i])];
    double avg = 0.0;
    for (double s : row.pack_soc) avg += 100.0 * s;
    avg /= static_cast<double>(row.pack_soc.size());
    pass = pass && row.minute == minutes[i] && std::abs(avg - table[i]) <= 3.0;
    got.push_back(fmt::format("{:.2f}", avg));
  }

  const auto rated = scenario("endurance_rated");
  const auto depletion = mission::endurance_trace(rated.sim.power, 120).depletion_min;
  pass = pass && depletion && std::abs(*depletion - 96.0) <= 1.0;

  bool held = true;
  bool reached = false;
  for (const auto& row : trace.rows) {
    const double b = 100.0 * row.backup_soc;
    if (reached) held = held && std::abs(b - 86.0) < 1e-9;
    reached = reached || std::abs(b - 86.0) < 1e-9;
  }
  const double final_backup = 100.0 * trace.rows.back().backup_soc;
  pass = pass && reached && held && std::abs(final_backup - 86.0) < 1e-9;
  return {pass, fmt::format("pack averages [{}] at 0/15/30/45/60 min; 1920 Wh at 1200 W depletes at {} min; backup "
                            "ends at {:.2f}% {}",
                            fmt::join(got, ", "), depletion ? fmt::format("{:.2f}", *depletion) : "never",
                            final_backup, held ? "and holds" : "but drifts")};
}

// ---------------------------------------------------------------------------
// 10. Determinism through the CLI.

// Data file contents with wall-clock fields removed.
std::string timing_free(const fs::path& file) {
  const std::string text = read_text(file);
  if (file.filename() == "bench.csv") {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
      std::vector<std::string> cols;
      std::stringstream ls(line);
      for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
      if (cols.size() > 8) cols.erase(cols.begin() + 8);  // time_s
      out += fmt::format("{}\n", fmt::join(cols, ","));
    }
    return out;
  }
  if (file.filename() == "summary.json") {
    auto j = json::parse(text);
    for (auto& m : j["methods"]) m.erase("mean_time_s");
    return j.dump();
  }
  return text;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt::format("marsupial_acceptance_{}", ::getpid());
  fs::remove_all(root);
  struct Stage {
    std::string command, config;
    std::vector<std::string> sets;
  };
  const std::vector<Stage> stages = {
      {"plan", "wall_inspection", {}},
      {"optimize", "wall_inspection", {}},
      {"simulate", "wall_inspection", {}},
      {"localize-bench", "thermal_like", {"localization.trials=6"}},
      {"endurance", "endurance_fitted", {}},
  };
  bool pass = true;
  std::vector<std::string> parts;
  for (const auto& stage : stages) {
    std::vector<std::string> files[2];
    for (int rep = 0; rep < 2; ++rep) {
      cli::RunOptions o;
      o.config = kScenarios / (stage.config + ".json");
      o.out = root / fmt::format("run{}", rep) / stage.config;
      o.sets = stage.sets;
      const int code = cli::run_command(stage.command, o);
      if (code != cli::kExitOk) {
        pass = false;
        parts.push_back(fmt::format("{} exited {}", stage.command, code));
        continue;
      }
      const auto manifest = json::parse(read_text(o.out / "manifest.json"));
      for (const auto& out : manifest["outputs"]) {
        files[rep].push_back(out["file"].get<std::string>());
      }
    }
    if (files[0].empty() || files[0] != files[1]) {
      pass = false;
      parts.push_back(fmt::format("{}: output inventories differ", stage.command));
      continue;
    }
    int differing = 0;
    for (const auto& f : files[0]) {
      differing += timing_free(root / "run0" / stage.config / f) != timing_free(root / "run1" / stage.config / f);
    }
    pass = pass && differing == 0;
    parts.push_back(fmt::format("{} {}/{} identical", stage.command, files[0].size() - differing, files[0].size()));
  }
  fs::remove_all(root);
  return {pass, fmt::format("{}", fmt::join(parts, "; "))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"tether residual closed forms", tether_residuals},
      {"EDF oracle equivalence", edf_oracle},
      {"DLL recovery", dll_recovery},
      {"DLL vs ICP orderings", dll_vs_icp},
      {"planner feasibility and convergence", planner_feasibility},
      {"optimizer contracts", optimizer_contracts},
      {"tracking errors", tracking_errors},
      {"inspection completeness", inspection_completeness},
      {"endurance reproduction", endurance},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    fmt::print("{} {:2d} {}: {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail, secs);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
