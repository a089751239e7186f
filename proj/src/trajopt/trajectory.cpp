#include "marsupial/trajopt/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <tuple>

#include <fmt/format.h>

#include "json.hpp"
#include "marsupial/common/error.hpp"
#include "marsupial/common/io.hpp"
#include "marsupial/world/los.hpp"

namespace marsupial::trajopt {

double MarsupialTrajectory::time_at(std::size_t i) const {
  double t = 0.0;
  for (std::size_t k = 1; k <= i; ++k) t += states[k].dt;
  return t;
}

void MarsupialTrajectory::validate() const {
  if (states.empty()) throw InvalidArgumentError("trajectory has no states");
  if (states[0].dt != 0.0) throw InvalidArgumentError("first state must have dt = 0");
  for (std::size_t i = 1; i < states.size(); ++i) {
    if (!(states[i].dt > 0.0)) {
      throw InvalidArgumentError(fmt::format("state {} has non-positive dt {}", i, states[i].dt));
    }
  }
}

std::vector<Vec3> tether_samples(const Vec3& p_g, const Vec3& p_a, int m) {
  if (m < 2) throw InvalidArgumentError("tether needs at least 2 samples");
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double s = static_cast<double>(j) / (m - 1);
    out.push_back(p_g + (p_a - p_g) * s);
  }
  out.back() = p_a;
  return out;
}

namespace {

// n points at uniform arc length along the polyline; endpoints are copied exactly.
std::vector<Vec3> respace(const std::vector<Vec3>& pts, std::size_t n) {
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  const double total = cum.back();
  std::vector<Vec3> out(n, pts.front());
  if (total == 0.0) return out;
  std::size_t seg = 1;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 1 < pts.size() && cum[seg] < target) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double t = len > 0.0 ? (target - cum[seg - 1]) / len : 0.0;
    out[k] = pts[seg - 1] + (pts[seg] - pts[seg - 1]) * t;
  }
  out.back() = pts.back();
  return out;
}

// Uniform spacing in the summed per-platform arc length. Each output state
// lies on one path edge at the same fraction for both platforms.
std::pair<std::vector<Vec3>, std::vector<Vec3>> respace_shared(const std::vector<JointState>& path) {
  const std::size_t n = path.size();
  std::vector<double> cum(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    cum[i] = cum[i - 1] + (path[i].p_g - path[i - 1].p_g).norm() + (path[i].p_a - path[i - 1].p_a).norm();
  }
  std::vector<Vec3> g(n, path.front().p_g), a(n, path.front().p_a);
  const double total = cum.back();
  if (total > 0.0) {
    std::size_t seg = 1;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
      while (seg + 1 < n && cum[seg] < target) ++seg;
      const double len = cum[seg] - cum[seg - 1];
      const double t = len > 0.0 ? (target - cum[seg - 1]) / len : 0.0;
      g[k] = path[seg - 1].p_g + (path[seg].p_g - path[seg - 1].p_g) * t;
      a[k] = path[seg - 1].p_a + (path[seg].p_a - path[seg - 1].p_a) * t;
    }
  }
  g.back() = path.back().p_g;
  a.back() = path.back().p_a;
  return {g, a};
}

}  // namespace

MarsupialTrajectory initialize_trajectory(const std::vector<JointState>& path, double v_g, double v_a,
                                          Spacing spacing) {
  if (path.size() < 2) throw InvalidArgumentError("path needs at least 2 states");
  if (!(v_g > 0.0) || !(v_a > 0.0)) throw InvalidArgumentError("nominal speeds must be > 0");
  std::vector<Vec3> g, a;
  for (const auto& s : path) {
    g.push_back(s.p_g);
    a.push_back(s.p_a);
  }
  std::vector<Vec3> rg = g, ra = a;
  if (spacing == Spacing::kPerPlatform) {
    rg = respace(g, path.size());
    ra = respace(a, path.size());
  } else if (spacing == Spacing::kShared) {
    std::tie(rg, ra) = respace_shared(path);
  }
  MarsupialTrajectory traj;
  traj.states.resize(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    traj.states[i].p_g = rg[i];
    traj.states[i].p_a = ra[i];
    if (i > 0) {
      traj.states[i].dt = std::max((rg[i] - rg[i - 1]).norm() / v_g, (ra[i] - ra[i - 1]).norm() / v_a);
    }
  }
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (!(traj.states[i].dt > 0.0)) throw InvalidArgumentError("degenerate zero-length path");
  }
  return traj;
}

namespace {

using nlohmann::ordered_json;

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const ordered_json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ParseError(fmt::format("{} must be [x, y, z]", what));
  Vec3 v;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ParseError(fmt::format("{} must hold numbers", what));
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  if (!v.allFinite()) throw ParseError(fmt::format("{} is not finite", what));
  return v;
}

}  // namespace

std::string trajectory_to_json(const MarsupialTrajectory& traj, const TrajectoryMeta& meta) {
  ordered_json states = ordered_json::array();
  for (const auto& s : traj.states) {
    states.push_back({{"p_g", vec_json(s.p_g)}, {"p_a", vec_json(s.p_a)}, {"dt", s.dt}});
  }
  ordered_json weights = ordered_json::object();
  for (const auto& [k, v] : meta.weights) weights[k] = v;
  ordered_json doc = {{"states", states},
                      {"meta", {{"L_max", meta.l_max}, {"weights", weights}, {"seed", meta.seed}}}};
  return doc.dump(2) + "\n";
}

void save_trajectory_json(const MarsupialTrajectory& traj, const TrajectoryMeta& meta,
                          const std::filesystem::path& path) {
  write_text(path, trajectory_to_json(traj, meta));
}

MarsupialTrajectory load_trajectory_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError(fmt::format("cannot open {}", path.string()));
  ordered_json doc;
  try {
    f >> doc;
  } catch (const ordered_json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!doc.is_object() || !doc.contains("states") || !doc["states"].is_array()) {
    throw ParseError(fmt::format("{}: expected an object with a states array", path.string()));
  }
  MarsupialTrajectory traj;
  for (const auto& s : doc["states"]) {
    if (!s.is_object() || !s.contains("p_g") || !s.contains("p_a") || !s.contains("dt") ||
        !s["dt"].is_number()) {
      throw ParseError(fmt::format("{}: each state needs p_g, p_a and dt", path.string()));
    }
    traj.states.push_back({vec_from(s["p_g"], "p_g"), vec_from(s["p_a"], "p_a"), s["dt"].get<double>()});
  }
  if (traj.states.empty()) throw EmptyInputError(fmt::format("{}: no states", path.string()));
  try {
    traj.validate();
  } catch (const InvalidArgumentError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return traj;
}

void save_trajectory_csv(const MarsupialTrajectory& traj, const world::VoxelEDF& edf,
                         const std::filesystem::path& path) {
  std::string out = "i,t,xg,yg,zg,xa,ya,za,dt,tether_len,min_tether_clearance\n";
  double t = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.states[i];
    t += s.dt;
    out += fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n",
                       i, t, s.p_g.x(), s.p_g.y(), s.p_g.z(), s.p_a.x(), s.p_a.y(), s.p_a.z(),
                       s.dt, (s.p_a - s.p_g).norm(), world::min_clearance_along(edf, s.p_g, s.p_a));
  }
  write_text(path, out);
}

}  // namespace marsupial::trajopt
