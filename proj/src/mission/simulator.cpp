#include "marsupial/mission/simulator.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "marsupial/common/error.hpp"
#include "marsupial/common/seed.hpp"
#include "marsupial/trajopt/optimizer.hpp"
#include "marsupial/world/los.hpp"

namespace marsupial::mission {

void InspectionPlan::validate() const {
  if (pois.empty()) throw InvalidArgumentError("inspection plan needs at least one PoI");
  for (const auto& p : pois) {
    if (!p.position.allFinite() || !std::isfinite(p.yaw)) {
      throw InvalidArgumentError("PoI values must be finite");
    }
    if (!(p.dwell >= 0.0)) throw InvalidArgumentError("PoI dwell must be >= 0");
  }
}

void InspectionPlan::normalize() {
  for (auto& p : pois) p.yaw = wrap_angle(p.yaw);
}

std::vector<std::size_t> assign_pois(const trajopt::MarsupialTrajectory& traj,
                                     const InspectionPlan& plan, double tolerance) {
  std::vector<std::size_t> out;
  std::size_t from = 0;
  for (std::size_t j = 0; j < plan.pois.size(); ++j) {
    const Vec3& target = plan.pois[j].position;
    auto dist = [&](std::size_t k) { return (traj.states[k].p_a - target).norm(); };
    std::size_t k = from;
    while (k < traj.size() && dist(k) > tolerance) ++k;
    if (k == traj.size()) {
      throw InvalidArgumentError(fmt::format("PoI {} is not on the trajectory", j));
    }
    while (k + 1 < traj.size() && dist(k + 1) < dist(k)) ++k;
    out.push_back(k);
    from = k + 1;
  }
  return out;
}

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidArgumentError("sim dt must be > 0");
  if (!(command_noise >= 0.0)) throw InvalidArgumentError("command noise must be >= 0");
  if (!(max_time > 0.0)) throw InvalidArgumentError("max time must be > 0");
  if (!(l_max > 0.0)) throw InvalidArgumentError("l_max must be > 0");
  if (!(poi_tolerance > 0.0)) throw InvalidArgumentError("PoI tolerance must be > 0");
  tracker.validate();
  power.validate();
  camera.validate();
  for (const auto& m : markers) {
    if (!(m.normal.norm() > 0.0)) throw InvalidArgumentError("marker normal must be non-zero");
  }
}

namespace {

double horizontal(const Vec3& v) { return std::hypot(v.x(), v.y()); }

// Progress along the horizontal segment origin -> target.
double arc_position(const Vec3& origin, const Vec3& target, const Vec3& p) {
  const Vec2 d(target.x() - origin.x(), target.y() - origin.y());
  const double len = d.norm();
  if (len < 1e-12) return 0.0;
  return Vec2(p.x() - origin.x(), p.y() - origin.y()).dot(d) / len;
}

// UGV height follows the ground under it; off the traversable set it keeps z.
void settle_ugv(Vec3& p, const world::TraversableSet& ground) {
  const int m = ground.member_containing(p);
  if (m >= 0) p.z() = ground.cells()[static_cast<std::size_t>(m)].ground_z + ground.params().anchor_height;
}

}  // namespace

SimLog simulate_mission(const planner::Environment& env, const trajopt::MarsupialTrajectory& traj,
                        const InspectionPlan& plan_in, const SimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  plan_in.validate();
  traj.validate();
  InspectionPlan plan = plan_in;
  plan.normalize();
  const auto& edf = env.edf();
  const auto pre = trajopt::hard_checks(traj, edf, cfg.l_max);
  if (!pre.passed()) throw InvalidArgumentError("trajectory fails the tether hard checks");

  const std::size_t n = traj.size();
  std::vector<int> poi_of(n, -1);
  const auto assigned = assign_pois(traj, plan, cfg.poi_tolerance);
  for (std::size_t j = 0; j < assigned.size(); ++j) poi_of[assigned[j]] = static_cast<int>(j);

  SimLog log;
  log.dt = cfg.dt;
  log.markers = cfg.markers;

  PowerSystem power(cfg.power);
  std::mt19937_64 motion_rng(stage_seed(seed, "sim.motion"));
  std::mt19937_64 camera_rng(stage_seed(seed, "sim.camera"));
  std::normal_distribution<double> gauss(0.0, 1.0);

  Pose ugv = Pose::from_position_yaw(traj.states[0].p_g, 0.0);
  Pose uav = Pose::from_position_yaw(traj.states[0].p_a, cfg.initial_yaw);
  TcmState tcm;
  Vec3 origin_g = ugv.position, origin_a = uav.position;
  TrapezoidProfile profile_g, profile_a;
  bool uav_at_latched = false, dwelling = false;
  double dwell_time = 0.0;
  bool violating = false;

  auto make_sample = [&](double t, const VelocityCommand& cg, const VelocityCommand& ca) {
    SimSample s;
    s.t = t;
    s.p_g = ugv.position;
    s.p_a = uav.position;
    s.yaw = uav.yaw;
    s.target_g = traj.states[tcm.index].p_g;
    s.target_a = traj.states[tcm.index].p_a;
    s.cmd_g = cg.linear;
    s.cmd_a = ca.linear;
    s.cmd_yaw_rate = ca.yaw_rate;
    s.wp_index = tcm.index;
    s.phase = tcm.phase;
    s.ugv_reached = tcm.ugv_reached;
    s.uav_reached = tcm.uav_reached;
    s.tether_len = (uav.position - ugv.position).norm();
    s.tether_clear = edf.contains(ugv.position) && edf.contains(uav.position)
                         ? world::min_clearance_along(edf, ugv.position, uav.position)
                         : 0.0;
    const auto& packs = power.packs();
    s.soc_pack = {packs[0].soc, packs[packs.size() > 1 ? 1 : 0].soc};
    s.soc_backup = power.backup().soc;
    return s;
  };
  auto abort = [&](double t, const std::string& kind, const std::string& detail) {
    log.events.push_back({t, kind, detail});
    tcm.phase = TcmPhase::aborted;
    log.abort_reason = kind + ": " + detail;
  };

  log.samples.push_back(make_sample(0.0, {}, {}));
  const double tol = cfg.tracker.reached_tolerance;
  for (long step = 1;; ++step) {
    const double t = static_cast<double>(step) * cfg.dt;

    const auto& wp = traj.states[tcm.index];
    const bool ugv_at = horizontal(wp.p_g - ugv.position) <= tol;
    uav_at_latched = uav_at_latched || (wp.p_a - uav.position).norm() <= tol;
    const int poi = poi_of[tcm.index];
    bool uav_done = uav_at_latched;
    std::optional<double> yaw_target;
    if (poi >= 0 && uav_at_latched) {
      const PoI& p = plan.pois[static_cast<std::size_t>(poi)];
      yaw_target = p.yaw;
      dwelling = dwelling || angle_distance(uav.yaw, p.yaw) <= cfg.tracker.yaw_tolerance;
      uav_done = false;
      if (dwelling) {
        for (auto d : detect_markers(uav, cfg.markers, cfg.camera, camera_rng, &edf)) {
          d.t = t - cfg.dt;
          log.detections.push_back(d);
        }
        dwell_time += cfg.dt;
        uav_done = dwell_time >= p.dwell - 1e-9;
      }
    }

    const TcmStep st = tcm_step(tcm, ugv_at, uav_done, n);
    tcm = st.state;
    if (st.command.dispatch) {
      const auto& next = traj.states[tcm.index];
      origin_g = ugv.position;
      origin_a = uav.position;
      profile_g = trapezoid_profile(horizontal(next.p_g - origin_g), cfg.tracker.lateral_cap(), cfg.tracker.accel);
      profile_a = trapezoid_profile(horizontal(next.p_a - origin_a), cfg.tracker.lateral_cap(), cfg.tracker.accel);
      uav_at_latched = dwelling = false;
      dwell_time = 0.0;
      yaw_target.reset();
    }
    if (tcm.phase == TcmPhase::complete) {
      log.samples.push_back(make_sample(t, {}, {}));
      break;
    }

    const auto& target = traj.states[tcm.index];
    const VelocityCommand cg =
        tracker_step(Platform::ugv, ugv, {target.p_g, std::nullopt}, cfg.tracker, profile_g,
                     arc_position(origin_g, target.p_g, ugv.position));
    const VelocityCommand ca =
        tracker_step(Platform::uav, uav, {target.p_a, yaw_target}, cfg.tracker, profile_a,
                     arc_position(origin_a, target.p_a, uav.position));

    Vec3 v_g = cg.linear, v_a = ca.linear;
    for (int c = 0; c < 2; ++c) v_g[c] += cfg.command_noise * gauss(motion_rng);
    for (int c = 0; c < 3; ++c) v_a[c] += cfg.command_noise * gauss(motion_rng);
    ugv.position += v_g * cfg.dt;
    settle_ugv(ugv.position, env.ground());
    uav.position += v_a * cfg.dt;
    uav.yaw = wrap_angle(uav.yaw + ca.yaw_rate * cfg.dt);
    power.step(cfg.dt);

    const double len = (uav.position - ugv.position).norm();
    const bool inside = edf.contains(ugv.position) && edf.contains(uav.position);
    std::string problem;
    if (len > cfg.l_max) {
      problem = "tether_length";
    } else if (!inside || !world::check_los(edf, ugv.position, uav.position, 0.0)) {
      problem = "tether_los";
    }
    if (!problem.empty()) {
      const std::string detail = fmt::format("waypoint {}, length {:.3f} m", tcm.index, len);
      if (cfg.abort_on_tether_violation) {
        abort(t, problem, detail);
      } else if (!violating) {
        log.events.push_back({t, problem, detail});
      }
    }
    violating = !problem.empty();
    if (tcm.phase != TcmPhase::aborted && power.depleted()) abort(t, "depleted", "battery bank empty");
    if (tcm.phase != TcmPhase::aborted && t >= cfg.max_time) {
      abort(t, "timeout", fmt::format("stopped at waypoint {} of {}", tcm.index, n));
    }

    log.samples.push_back(make_sample(t, cg, ca));
    if (tcm.phase == TcmPhase::aborted) break;
  }
  log.final_phase = tcm.phase;
  log.energy_wh = power.energy_wh();
  return log;
}

}  // namespace marsupial::mission
