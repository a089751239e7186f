#include "marsupial/mission/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "json.hpp"
#include "marsupial/common/error.hpp"
#include "marsupial/common/io.hpp"

namespace marsupial::mission {

namespace {

Vec3 closest_on_segment(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 < 1e-24) return a;
  const double u = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return a + u * d;
}

}  // namespace

MissionMetrics mission_metrics(const SimLog& log, const trajopt::MarsupialTrajectory& traj) {
  if (log.samples.empty()) throw EmptyInputError("simulation log is empty");
  MissionMetrics m;
  double sum_ct = 0.0, sum_h = 0.0;
  m.min_tether_clearance_m = std::numeric_limits<double>::infinity();
  for (const auto& s : log.samples) {
    m.min_tether_clearance_m = std::min(m.min_tether_clearance_m, s.tether_clear);
    m.max_tether_length_m = std::max(m.max_tether_length_m, s.tether_len);
    if (s.wp_index == 0 || s.wp_index >= traj.size() || s.phase == TcmPhase::complete) continue;
    const Vec3 q = closest_on_segment(traj.states[s.wp_index - 1].p_a, traj.states[s.wp_index].p_a, s.p_a);
    const Vec3 e = s.p_a - q;
    const double ct = std::hypot(e.x(), e.y());
    sum_ct += ct;
    sum_h += std::abs(e.z());
    m.max_cross_track_m = std::max(m.max_cross_track_m, ct);
    ++m.tracked_samples;
  }
  if (m.tracked_samples > 0) {
    m.mean_cross_track_m = sum_ct / static_cast<double>(m.tracked_samples);
    m.mean_height_error_m = sum_h / static_cast<double>(m.tracked_samples);
  }

  for (const auto& marker : log.markers) {
    MarkerStats st;
    st.id = marker.id;
    Vec3 sum = Vec3::Zero();
    for (const auto& d : log.detections) {
      if (d.marker_id != marker.id) continue;
      ++st.observations;
      sum += d.estimate;
      st.mean_single_error_m += d.error_m;
    }
    if (st.observations > 0) {
      st.mean_single_error_m /= st.observations;
      st.mean_error_m = (sum / st.observations - marker.position).norm();
      ++m.markers_detected;
    }
    m.markers.push_back(st);
  }
  std::sort(m.markers.begin(), m.markers.end(),
            [](const MarkerStats& a, const MarkerStats& b) { return a.id < b.id; });

  m.flight_time_s = log.samples.back().t;
  m.energy_wh = log.energy_wh;
  m.phase = to_string(log.final_phase);
  m.abort_reason = log.abort_reason;
  return m;
}

void save_simlog_csv(const SimLog& log, const std::filesystem::path& path) {
  std::string out =
      "t,xg,yg,zg,xa,ya,za,yaw,cmd_vx,cmd_vy,cmd_vz,cmd_yaw_rate,wp_index,tcm_phase,tether_len,"
      "tether_clear,soc_pack1,soc_pack2,soc_backup\n";
  for (const auto& s : log.samples) {
    out += fmt::format("{:.4f},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{},{},"
                       "{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n",
                       s.t, s.p_g.x(), s.p_g.y(), s.p_g.z(), s.p_a.x(), s.p_a.y(), s.p_a.z(), s.yaw,
                       s.cmd_a.x(), s.cmd_a.y(), s.cmd_a.z(), s.cmd_yaw_rate, s.wp_index,
                       to_string(s.phase), s.tether_len, s.tether_clear, 100.0 * s.soc_pack[0],
                       100.0 * s.soc_pack[1], 100.0 * s.soc_backup);
  }
  write_text(path, out);
}

void save_detections_csv(const SimLog& log, const std::filesystem::path& path) {
  std::string out = "t,marker_id,est_x,est_y,est_z,err_m\n";
  for (const auto& d : log.detections) {
    out += fmt::format("{:.4f},{},{:.9g},{:.9g},{:.9g},{:.9g}\n", d.t, d.marker_id, d.estimate.x(),
                       d.estimate.y(), d.estimate.z(), d.error_m);
  }
  write_text(path, out);
}

std::string metrics_to_json(const MissionMetrics& m) {
  using nlohmann::ordered_json;
  ordered_json markers = ordered_json::array();
  for (const auto& s : m.markers) {
    markers.push_back({{"id", s.id},
                       {"observations", s.observations},
                       {"mean_error_cm", 100.0 * s.mean_error_m},
                       {"mean_single_error_cm", 100.0 * s.mean_single_error_m}});
  }
  ordered_json j = {{"phase", m.phase},
                    {"abort_reason", m.abort_reason},
                    {"cross_track_mean_m", m.mean_cross_track_m},
                    {"height_error_mean_m", m.mean_height_error_m},
                    {"cross_track_max_m", m.max_cross_track_m},
                    {"tracked_samples", m.tracked_samples},
                    {"flight_time_s", m.flight_time_s},
                    {"energy_wh", m.energy_wh},
                    {"min_tether_clearance_m", m.min_tether_clearance_m},
                    {"max_tether_length_m", m.max_tether_length_m},
                    {"markers_detected", m.markers_detected},
                    {"markers", markers}};
  return j.dump(2) + "\n";
}

void save_metrics_json(const MissionMetrics& m, const std::filesystem::path& path) {
  write_text(path, metrics_to_json(m));
}

}  // namespace marsupial::mission
