#include <cmath>
#include <random>
#include <set>

#include <Eigen/Geometry>

#include "doctest.h"
#include "marsupial/common/error.hpp"
#include "marsupial/common/io.hpp"
#include "marsupial/mission/battery.hpp"
#include "marsupial/mission/markers.hpp"
#include "marsupial/mission/metrics.hpp"
#include "marsupial/mission/simulator.hpp"
#include "marsupial/mission/tcm.hpp"
#include "marsupial/mission/tracker.hpp"
#include "marsupial/world/scene_builder.hpp"
#include "test_util.hpp"

using namespace marsupial;
using namespace marsupial::mission;
using namespace marsupial::world;
using trajopt::MarsupialTrajectory;
using namespace testutil;

namespace {

struct World {
  VoxelEDF edf;
  TraversableSet ground;
  planner::Environment env;

  World(const PointCloud& cloud, double res)
      : edf(build_edf(build_occupancy(cloud, res, 0.5), 2.0)),
        ground(traversability(cloud, TraversabilityParams{})),
        env(edf, ground, 0.5) {}
};

// Open floor with headroom up to 6 m.
const World& yard() {
  static const World w = [] {
    SceneBuilder b(0.05);
    b.rect_xy(0, 12, 0, 8, 0);
    b.point(Vec3(0, 0, 6));
    return World(b.build(), 0.1);
  }();
  return w;
}

// Floor plus an inspection wall in the plane x = 12, facing -x.
const World& wall_yard() {
  static const World w = [] {
    SceneBuilder b(0.05);
    b.rect_xy(0, 13, 0, 10, 0);
    b.rect_yz(0.5, 9.5, 0, 5, 12);
    b.point(Vec3(0, 0, 6));
    return World(b.build(), 0.1);
  }();
  return w;
}

// Both platforms move along x in lockstep, the UAV 2 m to the side.
MarsupialTrajectory parallel_run(const World& w, int n) {
  MarsupialTrajectory t;
  for (int i = 0; i < n; ++i) {
    const Vec3 g = w.ground.project(Vec3(2.0 + i, 3.0, 0.0));
    t.states.push_back({g, Vec3(2.0 + i, 5.0, 3.0), i == 0 ? 0.0 : 4.0});
  }
  return t;
}

// Static UGV, UAV through the vertices with <= 0.8 m steps.
MarsupialTrajectory uav_polyline(const Vec3& ugv, const std::vector<Vec3>& vertices) {
  MarsupialTrajectory t;
  t.states.push_back({ugv, vertices[0], 0.0});
  for (std::size_t v = 1; v < vertices.size(); ++v) {
    const Vec3 d = vertices[v] - vertices[v - 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil(d.norm() / 0.8)));
    for (int k = 1; k <= pieces; ++k) {
      t.states.push_back({ugv, vertices[v - 1] + d * (double(k) / pieces), d.norm() / pieces / 0.25});
    }
  }
  return t;
}

InspectionPlan single_poi(const Vec3& p) { return InspectionPlan{{PoI{p, 0.0, 0.0}}}; }

std::vector<Marker> wall_markers() {
  std::vector<Marker> out;
  int id = 411;
  for (double y : {2.5, 4.0, 5.5, 7.0}) {
    for (double z : {1.5, 2.5, 3.5}) out.push_back({id++, Vec3(12.0, y, z), Vec3(-1, 0, 0)});
  }
  return out;
}

std::vector<PoI> wall_pois() {
  return {{Vec3(10, 2.5, 2.0), 0.0, 1.0},
          {Vec3(10, 4.0, 3.0), 0.0, 1.0},
          {Vec3(10, 5.5, 2.0), 0.0, 1.0},
          {Vec3(10, 7.0, 3.0), 0.0, 1.0}};
}

// Independent visibility oracle: cone, range and facing only (the wall scene
// has nothing between the PoIs and the markers).
bool oracle_sees(const Vec3& cam, double yaw, const Marker& m, const CameraModel& c) {
  const Vec3 v = m.position - cam;
  const Vec3 axis(std::cos(yaw), std::sin(yaw), 0.0);
  const double angle = std::acos(std::clamp(axis.dot(v) / v.norm(), -1.0, 1.0));
  return v.norm() <= c.max_range && angle <= c.fov / 2 && m.normal.dot(v) < 0;
}

double simpson(const TrapezoidProfile& p, double t0, double t1) {
  const double h = t1 - t0;
  return h / 6.0 * (p.speed_at_time(t0) + 4.0 * p.speed_at_time(0.5 * (t0 + t1)) + p.speed_at_time(t1));
}

}  // namespace

TEST_CASE("trapezoid profile examples") {
  const auto zero = trapezoid_profile(0.0, 0.25, 0.25);
  CHECK(zero.duration() == 0.0);
  CHECK(zero.distance_at_time(1.0) == 0.0);

  const auto cruise = trapezoid_profile(10.0, 0.25, 0.25);
  CHECK(cruise.v_peak == 0.25);
  CHECK(std::abs(cruise.t_ramp - 1.0) < 1e-12);
  CHECK(std::abs(cruise.t_cruise - 39.0) < 1e-12);
  CHECK(cruise.speed_at_time(0.5) == doctest::Approx(0.125));
  CHECK(cruise.speed_at_time(20.0) == 0.25);
  CHECK(cruise.speed_at_position(5.0) == 0.25);
  CHECK(std::abs(cruise.distance_at_time(1.0) - 0.125) < 1e-12);

  const double short_dist = 0.25 * 0.25 / (2 * 0.25) * 1.5;
  const auto tri = trapezoid_profile(short_dist, 0.25, 0.25);
  CHECK(tri.triangular());
  CHECK(std::abs(tri.v_peak - std::sqrt(0.25 * short_dist)) < 1e-15);
  CHECK(tri.v_peak < 0.25);

  CHECK_THROWS_AS(trapezoid_profile(-1.0, 0.25, 0.25), InvalidArgumentError);
  CHECK_THROWS_AS(trapezoid_profile(1.0, 0.0, 0.25), InvalidArgumentError);
  CHECK_THROWS_AS(trapezoid_profile(1.0, 0.25, 0.0), InvalidArgumentError);
}

TEST_CASE("trapezoid integrated distance equals the request") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 30.0), v(0.05, 2.0), a(0.05, 2.0);
  for (int i = 0; i < 500; ++i) {
    const auto p = trapezoid_profile(d(rng), v(rng), a(rng));
    // Speed is piecewise linear in time, so Simpson per phase is exact.
    const double t1 = p.t_ramp, t2 = p.t_ramp + p.t_cruise, t3 = p.duration();
    const double integral = simpson(p, 0, t1) + simpson(p, t1, t2) + simpson(p, t2, t3);
    CHECK(rel_err(integral, p.distance, 1e-12) < 1e-9);
    CHECK(rel_err(p.distance_at_time(t3), p.distance, 1e-12) < 1e-12);
    CHECK(p.v_peak <= v.max() + 1e-15);
  }
}

TEST_CASE("tracker step examples") {
  TrackerConfig cfg;
  const auto profile = trapezoid_profile(10.0, 0.25, 0.25);
  const Pose here = Pose::from_position_yaw(Vec3(1, 2, 3), 0.3);

  const auto still = tracker_step(Platform::uav, here, {here.position, std::nullopt}, cfg, profile, 5.0);
  CHECK(still.linear == Vec3::Zero());
  CHECK(still.yaw_rate == 0.0);

  const Pose origin = Pose::from_position_yaw(Vec3::Zero(), 0.0);
  const auto clip = tracker_step(Platform::uav, origin, {Vec3(1, 0, 0), std::nullopt}, cfg, profile, 5.0);
  CHECK(std::abs(clip.linear.x() - 0.25) < 1e-15);
  CHECK(clip.linear.y() == 0.0);
  CHECK(clip.linear.z() == 0.0);

  const auto left = tracker_step(Platform::uav, origin, {Vec3::Zero(), 0.5}, cfg, profile, 5.0);
  const auto right = tracker_step(Platform::uav, origin, {Vec3::Zero(), -0.5}, cfg, profile, 5.0);
  CHECK(left.yaw_rate > 0.0);
  CHECK(right.yaw_rate < 0.0);

  const auto ugv = tracker_step(Platform::ugv, origin, {Vec3(0.1, 0.1, 5.0), 1.0}, cfg, profile, 5.0);
  CHECK(ugv.linear.z() == 0.0);
  CHECK(ugv.yaw_rate == 0.0);
}

TEST_CASE("tracker commands respect the slowest platform and keep their heading") {
  TrackerConfig cfg;
  cfg.v_g = 0.25;
  cfg.v_a = 0.4;
  cfg.gain_xy = 2.0;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5.0, 5.0), s(0.0, 10.0);
  const auto profile = trapezoid_profile(10.0, 1.0, 0.25);
  for (int i = 0; i < 2000; ++i) {
    const Pose cur = Pose::from_position_yaw(Vec3(u(rng), u(rng), u(rng)), u(rng));
    const Vec3 goal(u(rng), u(rng), u(rng));
    for (auto platform : {Platform::ugv, Platform::uav}) {
      const auto c = tracker_step(platform, cur, {goal, u(rng)}, cfg, profile, s(rng));
      CHECK(std::hypot(c.linear.x(), c.linear.y()) <= 0.25 + 1e-12);
      CHECK(std::abs(c.linear.z()) <= cfg.v_max_vertical + 1e-12);
      CHECK(std::abs(c.yaw_rate) <= cfg.max_yaw_rate);
      Vec3 e = goal - cur.position;
      if (platform == Platform::ugv) e.z() = 0.0;
      // Same direction as the (gain-weighted) error.
      const Vec3 w(cfg.gain_xy * e.x(), cfg.gain_xy * e.y(), cfg.gain_z * e.z());
      CHECK(c.linear.cross(w).norm() <= 1e-9 * w.norm());
      CHECK(c.linear.dot(w) >= 0.0);
    }
  }
}

TEST_CASE("coordinator examples") {
  TcmState s;
  s.index = 2;
  auto both = tcm_step(s, true, true, 5);
  CHECK(both.state.index == 3);
  CHECK(both.command.dispatch);
  CHECK(!both.state.ugv_reached);
  CHECK(!both.state.uav_reached);

  auto one = tcm_step(s, true, false, 5);
  CHECK(one.state.index == 2);
  CHECK(one.command.ugv_hold);
  CHECK(!one.command.uav_hold);
  CHECK(one.state.phase == TcmPhase::waiting);
  // The UGV flag latches while the UAV catches up.
  auto later = tcm_step(one.state, false, true, 5);
  CHECK(later.state.index == 3);

  s.index = 4;
  auto last = tcm_step(s, true, true, 5);
  CHECK(last.state.phase == TcmPhase::complete);
  CHECK(last.state.index == 4);
  CHECK(tcm_step(last.state, false, false, 5).state.phase == TcmPhase::complete);

  CHECK_THROWS_AS(tcm_step(TcmState{}, true, true, 0), InvalidArgumentError);
  CHECK_THROWS_AS(tcm_step(TcmState{7}, true, true, 3), InvalidArgumentError);
}

TEST_CASE("coordinator index advances only with both flags") {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.3);
  TcmState s;
  bool g = false, a = false;
  for (int i = 0; i < 5000 && s.phase != TcmPhase::complete; ++i) {
    const bool rg = coin(rng), ra = coin(rng);
    const auto next = tcm_step(s, rg, ra, 40);
    g = g || rg;
    a = a || ra;
    CHECK(next.state.index >= s.index);
    CHECK(next.state.index <= s.index + 1);
    if (next.state.index != s.index) {
      CHECK((g && a));
      g = a = false;
    }
    s = next.state;
  }
  CHECK(s.phase == TcmPhase::complete);
}

TEST_CASE("battery discharge examples") {
  BatteryPack pack{1920.0};
  double t = 0.0;
  while (!pack.depleted) {
    pack = battery_step(pack, 1200.0, 1.0);
    t += 1.0;
  }
  CHECK(std::abs(t / 60.0 - 96.0) <= 1.0 / 60.0);

  BatteryPack bank{3840.0};
  for (int s = 0; s < 3600; ++s) bank = battery_step(bank, kFittedDrawW, 1.0);
  CHECK(std::abs(bank.soc - 0.53) < 1e-9);

  BatteryPack backup{500.0, 1.0, 0.86};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> draw(0.0, 5000.0);
  double prev = 1.0;
  for (int s = 0; s < 10000; ++s) {
    backup = battery_step(backup, draw(rng), 1.0);
    CHECK(backup.soc >= 0.86);
    CHECK(backup.soc <= prev);
    prev = backup.soc;
  }
  CHECK(backup.soc == 0.86);
  CHECK(!backup.depleted);

  CHECK_THROWS_AS(battery_step(BatteryPack{100.0}, -1.0, 1.0), InvalidArgumentError);
  CHECK_THROWS_AS(battery_step(BatteryPack{100.0}, 1.0, 0.0), InvalidArgumentError);
  CHECK_THROWS_AS(battery_step(BatteryPack{0.0}, 1.0, 1.0), InvalidArgumentError);
  CHECK(preset_draw("tether") == 1200.0);
  CHECK(preset_draw("fitted") == 1804.8);
  CHECK(preset_draw("reported") == 1635.0);
  CHECK_THROWS_AS(preset_draw("turbo"), InvalidArgumentError);
}

TEST_CASE("endurance trace") {
  PowerConfig cfg;
  cfg.draw_w = kFittedDrawW;
  const auto fitted = endurance_trace(cfg, 60);
  REQUIRE(fitted.rows.size() == 61);
  const double expected[] = {100, 88.25, 76.5, 64.75, 53};
  for (int q = 0; q <= 4; ++q) {
    for (double soc : fitted.rows[static_cast<std::size_t>(15 * q)].pack_soc) {
      CHECK(std::abs(100 * soc - expected[q]) < 1e-9);
    }
  }
  CHECK(!fitted.depletion_min);
  for (std::size_t i = 1; i < fitted.rows.size(); ++i) {
    CHECK(fitted.rows[i].pack_soc[0] <= fitted.rows[i - 1].pack_soc[0]);
    CHECK(fitted.rows[i].backup_soc >= cfg.backup_floor);
  }
  CHECK(fitted.rows.back().backup_soc == cfg.backup_floor);

  cfg.bank_capacity_wh = 1920.0;
  cfg.draw_w = kTetherSystemDrawW;
  const auto rated = endurance_trace(cfg, 200);
  REQUIRE(rated.depletion_min);
  CHECK(std::abs(*rated.depletion_min - 96.0) <= 1.0);
  CHECK(rated.rows.back().pack_soc[0] == 0.0);
}

TEST_CASE("marker visibility examples") {
  const CameraModel cam;
  std::mt19937_64 rng(2);
  const Pose pose = Pose::from_position_yaw(Vec3(0, 0, 2), 0.0);
  const Marker ahead{1, Vec3(2, 0, 2), Vec3(-1, 0, 0)};
  const Marker behind{2, Vec3(-2, 0, 2), Vec3(1, 0, 0)};
  const Marker away{3, Vec3(2, 0, 2), Vec3(1, 0, 0)};
  const Marker far{4, Vec3(9, 0, 2), Vec3(-1, 0, 0)};
  const Marker wide{5, Vec3(2, 2, 2), Vec3(-1, 0, 0)};
  const auto d = detect_markers(pose, {ahead, behind, away, far, wide}, cam, rng);
  REQUIRE(d.size() == 1);
  CHECK(d[0].marker_id == 1);
  CHECK(d[0].error_m < 5 * cam.noise_sigma);

  // Turned around, the camera sees the other marker.
  const Pose back = Pose::from_position_yaw(Vec3(0, 0, 2), kPi);
  const auto db = detect_markers(back, {ahead, behind}, cam, rng);
  REQUIRE(db.size() == 1);
  CHECK(db[0].marker_id == 2);

  CameraModel bad;
  bad.fov = 0.0;
  CHECK_THROWS_AS(detect_markers(pose, {ahead}, bad, rng), InvalidArgumentError);
}

TEST_CASE("marker occlusion uses the distance field") {
  SceneBuilder b(0.05);
  b.rect_xy(0, 8, 0, 8, 0);
  b.rect_yz(0, 8, 0, 4, 6);
  b.box(Vec3(3.5, 0.5, 0), Vec3(4.0, 1.5, 4));
  const VoxelEDF edf = build_edf(build_occupancy(b.build(), 0.1, 0.5), 2.0);
  const Pose cam = Pose::from_position_yaw(Vec3(2, 1, 2), 0.0);
  CameraModel model;
  model.fov = 2.0;
  const Marker hidden{1, Vec3(6, 1, 2), Vec3(-1, 0, 0)};
  const Marker open{2, Vec3(6, 4, 2), Vec3(-1, 0, 0)};
  CHECK(marker_visible(cam, open, model, nullptr));
  CHECK(marker_visible(cam, hidden, model, nullptr));
  CHECK(marker_visible(cam, open, model, &edf));
  CHECK(!marker_visible(cam, hidden, model, &edf));
}

TEST_CASE("averaged marker estimate error shrinks like sigma over sqrt N") {
  const CameraModel cam;
  const Marker m{7, Vec3(2, 0, 2), Vec3(-1, 0, 0)};
  const Pose pose = Pose::from_position_yaw(Vec3(0, 0, 2), 0.0);
  std::mt19937_64 rng(11);
  // |mean of N isotropic Gaussians| follows a Maxwell law with scale sigma/sqrt(N).
  auto expected = [&](int n) { return 2.0 * std::sqrt(2.0 / kPi) * cam.noise_sigma / std::sqrt(n); };
  for (int n : {4, 25, 100}) {
    double total = 0.0;
    const int trials = 2000;
    for (int k = 0; k < trials; ++k) {
      Vec3 sum = Vec3::Zero();
      for (int i = 0; i < n; ++i) sum += detect_markers(pose, {m}, cam, rng).at(0).estimate;
      total += (sum / n - m.position).norm();
    }
    // Maxwell std/mean ~ 0.42, so the trial mean has ~1% relative spread.
    CHECK(rel_err(total / trials, expected(n)) < 0.05);
  }
}

TEST_CASE("simulated straight run completes on the waypoints") {
  const World& w = yard();
  const auto traj = parallel_run(w, 7);
  SimConfig cfg;
  const auto log = simulate_mission(w.env, traj, single_poi(traj.states.back().p_a), cfg, 1);
  CHECK(log.complete());
  CHECK(log.events.empty());
  const auto& last = log.samples.back();
  CHECK(std::hypot(last.p_g.x() - traj.states.back().p_g.x(), last.p_g.y() - traj.states.back().p_g.y()) <=
        cfg.tracker.reached_tolerance);
  CHECK((last.p_a - traj.states.back().p_a).norm() <= cfg.tracker.reached_tolerance);
  CHECK(last.wp_index == traj.size() - 1);

  const auto m = mission_metrics(log, traj);
  CHECK(m.phase == "complete");
  CHECK(m.mean_cross_track_m < 0.01);
  CHECK(m.mean_height_error_m < 0.01);
  CHECK(m.energy_wh > 0.0);
  // The slowest leg sets the pace: 6 hops of 1 m at 0.25 m/s plus ramps.
  CHECK(m.flight_time_s > 6 * 4.0);
  CHECK(m.flight_time_s < 6 * 8.0);
}

TEST_CASE("simulation log invariants under command noise") {
  const World& w = yard();
  const auto traj = parallel_run(w, 7);
  SimConfig cfg;
  cfg.command_noise = 0.02;
  const auto log = simulate_mission(w.env, traj, single_poi(traj.states.back().p_a), cfg, 4);
  REQUIRE(log.complete());
  const double cap = cfg.tracker.lateral_cap();
  const double tol = cfg.tracker.reached_tolerance;
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    const auto& s = log.samples[i];
    CHECK(std::abs(s.t - static_cast<double>(i) * cfg.dt) < 1e-9);
    CHECK(std::hypot(s.cmd_g.x(), s.cmd_g.y()) <= cap + 1e-12);
    CHECK(std::hypot(s.cmd_a.x(), s.cmd_a.y()) <= cap + 1e-12);
    CHECK(s.tether_len <= cfg.l_max);
    CHECK(s.soc_backup >= cfg.power.backup_floor);
    if (i == 0) continue;
    const auto& p = log.samples[i - 1];
    CHECK(s.t > p.t);
    CHECK(s.soc_pack[0] <= p.soc_pack[0]);
    CHECK(s.soc_pack[1] <= p.soc_pack[1]);
    CHECK(s.soc_backup <= p.soc_backup);
    CHECK(s.wp_index >= p.wp_index);
    if (s.wp_index != p.wp_index) {
      // Both platforms were at (or had latched) the previous waypoint.
      const auto& wp = traj.states[p.wp_index];
      const bool g = p.ugv_reached || std::hypot(p.p_g.x() - wp.p_g.x(), p.p_g.y() - wp.p_g.y()) <= tol;
      const bool a = p.uav_reached || (p.p_a - wp.p_a).norm() <= tol;
      CHECK(g);
      CHECK(a);
    }
  }
}

TEST_CASE("simulation is deterministic per seed") {
  const World& w = yard();
  const auto traj = parallel_run(w, 5);
  SimConfig cfg;
  cfg.command_noise = 0.02;
  const auto plan = single_poi(traj.states.back().p_a);
  TempDir dir("sim_det");
  auto csv = [&](std::uint64_t seed, const char* name) {
    save_simlog_csv(simulate_mission(w.env, traj, plan, cfg, seed), dir / name);
    return read_text(dir / name);
  };
  const std::string a = csv(7, "a.csv"), b = csv(7, "b.csv"), c = csv(8, "c.csv");
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.rfind("t,xg,yg,zg,xa,ya,za,yaw,cmd_vx,cmd_vy,cmd_vz,cmd_yaw_rate,wp_index,tcm_phase,"
                "tether_len,tether_clear,soc_pack1,soc_pack2,soc_backup\n",
                0) == 0);
}

TEST_CASE("wall inspection detects exactly the markers the PoIs can see") {
  const World& w = wall_yard();
  const Vec3 ugv = w.ground.project(Vec3(6, 5, 0));
  std::vector<Vec3> vertices = {Vec3(9, 1.5, 1.5)};
  for (const auto& p : wall_pois()) vertices.push_back(p.position);
  const auto traj = uav_polyline(ugv, vertices);
  SimConfig cfg;
  cfg.command_noise = 0.02;
  cfg.camera.fov = 1.4;
  cfg.markers = wall_markers();
  const InspectionPlan plan{wall_pois()};

  std::set<int> expected;
  for (const auto& m : cfg.markers) {
    for (const auto& p : plan.pois) {
      if (oracle_sees(p.position, p.yaw, m, cfg.camera)) expected.insert(m.id);
    }
  }
  REQUIRE(expected.size() == 12);

  for (std::uint64_t seed : {1, 2, 3}) {
    const auto log = simulate_mission(w.env, traj, plan, cfg, seed);
    REQUIRE(log.complete());
    std::set<int> seen;
    for (const auto& d : log.detections) seen.insert(d.marker_id);
    CHECK(seen == expected);
    const auto m = mission_metrics(log, traj);
    CHECK(m.markers_detected == 12);
    for (const auto& s : m.markers) {
      CHECK(s.observations > 0);
      CHECK(s.mean_error_m <= 2 * cfg.camera.noise_sigma);
    }
    CHECK(m.mean_cross_track_m <= 0.10);
    CHECK(m.mean_height_error_m <= 0.10);
  }
}

TEST_CASE("mission aborts on depletion and tether violations") {
  const World& w = yard();
  const auto traj = parallel_run(w, 5);
  const auto plan = single_poi(traj.states.back().p_a);
  SimConfig cfg;
  cfg.power.bank_capacity_wh = 1.0;
  const auto dead = simulate_mission(w.env, traj, plan, cfg, 1);
  CHECK(dead.final_phase == TcmPhase::aborted);
  REQUIRE(!dead.events.empty());
  CHECK(dead.events.back().kind == "depleted");

  SimConfig short_tether;
  short_tether.l_max = 1.0;
  CHECK_THROWS_AS(simulate_mission(w.env, traj, plan, short_tether, 1), InvalidArgumentError);

  CHECK_THROWS_AS(simulate_mission(w.env, traj, single_poi(Vec3(1, 1, 5)), SimConfig{}, 1),
                  InvalidArgumentError);
}

TEST_CASE("mission metrics definitions") {
  MarsupialTrajectory traj;
  traj.states = {{Vec3(0, 0, 0.6), Vec3(0, 2, 3), 0.0}, {Vec3(10, 0, 0.6), Vec3(10, 2, 3), 40.0}};
  SimLog perfect;
  SimLog offset;
  for (int i = 0; i <= 100; ++i) {
    SimSample s;
    s.t = i * 0.4;
    s.wp_index = 1;
    s.p_g = Vec3(0.1 * i, 0, 0.6);
    s.p_a = Vec3(0.1 * i, 2, 3);
    s.tether_len = 1.0;
    s.tether_clear = 1.0;
    perfect.samples.push_back(s);
    s.p_a.y() += 0.05;
    offset.samples.push_back(s);
  }
  const auto p = mission_metrics(perfect, traj);
  CHECK(p.mean_cross_track_m < 1e-12);
  CHECK(p.mean_height_error_m < 1e-12);
  const auto o = mission_metrics(offset, traj);
  CHECK(std::abs(o.mean_cross_track_m - 0.05) < 1e-12);
  CHECK(o.mean_height_error_m == 0.0);
  CHECK(o.flight_time_s == doctest::Approx(40.0));
  CHECK_THROWS_AS(mission_metrics(SimLog{}, traj), EmptyInputError);

  TempDir dir("metrics");
  save_metrics_json(o, dir / "m.json");
  CHECK(read_text(dir / "m.json").find("\"cross_track_mean_m\"") != std::string::npos);
}
