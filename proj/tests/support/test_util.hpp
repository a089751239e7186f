#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "marsupial/trajopt/residuals.hpp"
#include "marsupial/trajopt/trajectory.hpp"
#include "marsupial/world/edf.hpp"
#include "marsupial/world/voxel_grid.hpp"

namespace testutil {

using marsupial::Vec3;
namespace mw = marsupial::world;

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("marsupial_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Random occupancy of an n^3 grid with the given fill probability; at least
/// one voxel is forced occupied.
inline mw::VoxelGrid random_grid(int n, double resolution, double fill, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution occ(fill);
  mw::GridGeometry g(Vec3(-1.0, 0.5, 2.0), resolution, {n, n, n});
  std::vector<std::uint8_t> cells(g.node_count());
  for (auto& c : cells) c = occ(rng) ? 1 : 0;
  cells[rng() % cells.size()] = 1;
  return mw::VoxelGrid(g, std::move(cells));
}

/// Exhaustive nearest-obstacle distance of every node, computed from integer
/// index offsets: sqrt(di^2 + dj^2 + dk^2) * resolution, minimized over all
/// occupied voxels.
inline std::vector<double> brute_force_edf(const mw::VoxelGrid& grid) {
  const auto& g = grid.geometry();
  std::vector<mw::GridIndex> obstacles;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (grid.occupied(i)) obstacles.push_back(g.grid_index(i));
  }
  std::vector<double> out(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const auto n = g.grid_index(i);
    long best = -1;
    for (const auto& o : obstacles) {
      const long dx = n.x - o.x, dy = n.y - o.y, dz = n.z - o.z;
      const long d2 = dx * dx + dy * dy + dz * dz;
      if (best < 0 || d2 < best) best = d2;
    }
    out[i] = std::sqrt(static_cast<double>(best)) * g.resolution();
  }
  return out;
}

/// Dense segment traversal: true when any sample at spacing step hits an
/// occupied voxel.
inline bool dense_blocked(const mw::VoxelGrid& grid, const Vec3& a, const Vec3& b, double step) {
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const Vec3 p = a + (b - a) * (static_cast<double>(i) / n);
    if (grid.occupied_at(p)) return true;
  }
  return false;
}

/// Distance from `x` (in cell units) to the nearest integer.
inline double face_distance(double x) { return std::abs(x - std::round(x)); }

/// True when `p` is at least `margin` (cell fractions) away from every grid plane.
inline bool away_from_faces(const mw::GridGeometry& g, const Vec3& p, double margin) {
  for (int a = 0; a < 3; ++a) {
    if (face_distance((p[a] - g.origin()[a]) / g.resolution()) < margin) return false;
  }
  return true;
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Independent taut-tether check: samples a->b at `step`, rejecting any
/// sample inside an obstacle voxel or with interpolated EDF below
/// clearance - slack.
inline bool dense_tether_ok(const mw::VoxelEDF& edf, const Vec3& a, const Vec3& b,
                            double clearance, double step, double slack) {
  const auto& g = edf.geometry();
  const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / step)));
  for (int k = 0; k <= n; ++k) {
    const Vec3 p = a + (b - a) * (static_cast<double>(k) / n);
    const auto v = g.voxel_of(p);
    if (!v || edf.node_value(g.linear_index(*v)) == 0.0) return false;
    if (edf.query(p).distance < clearance - slack) return false;
  }
  return true;
}

/// Field with a constant value per x node column (nodes at integer x).
inline mw::VoxelEDF column_field(const std::vector<double>& by_x) {
  const mw::GridGeometry g(Vec3::Zero(), 1.0, {static_cast<int>(by_x.size()), 3, 3});
  std::vector<double> v(g.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = by_x[static_cast<std::size_t>(g.grid_index(i).x)];
  return mw::VoxelEDF(g, v, 10.0);
}

namespace mt = marsupial::trajopt;

/// True when a residual of `t` sits within 1e-4 of a kink (EDF cell face,
/// safety threshold or hinge), where central differences are not meaningful.
inline bool near_kink(const mt::MarsupialTrajectory& t, const mw::VoxelEDF& edf, const mt::OptimizerConfig& cfg) {
  const auto& g = edf.geometry();
  for (const auto& s : t.states) {
    for (const auto& p : mt::tether_samples(s.p_g, s.p_a, cfg.m)) {
      if (!away_from_faces(g, p, 1e-3)) return true;
      if (std::abs(edf.query(p).distance - cfg.rho_ot) < 1e-4) return true;
    }
    for (const auto& [p, safety] : {std::pair{s.p_g, cfg.safety_g}, std::pair{s.p_a, cfg.safety_a}}) {
      if (!away_from_faces(g, p, 1e-3)) return true;
      if (std::abs(edf.query(p).distance - safety) < 1e-4) return true;
    }
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    for (int plat = 0; plat < 2; ++plat) {
      const auto pt = [&](std::size_t j) { return plat == 0 ? t.states[j].p_g : t.states[j].p_a; };
      const double vmax = plat == 0 ? cfg.v_max_g : cfg.v_max_a;
      if (std::abs((pt(i) - pt(i - 1)).norm() / t.states[i].dt - vmax) < 1e-4) return true;
      if (i + 1 < t.size()) {
        const Vec3 v0 = (pt(i) - pt(i - 1)) / t.states[i].dt;
        const Vec3 v1 = (pt(i + 1) - pt(i)) / t.states[i + 1].dt;
        const double amax = plat == 0 ? cfg.a_max_g : cfg.a_max_a;
        if (std::abs((v1 - v0).norm() / t.states[i + 1].dt - amax) < 1e-4) return true;
      }
    }
  }
  return false;
}

/// Worst column error |J_c - fd_c| / max(|fd_c|, 1) of the analytic residual
/// Jacobian against central differences with step h; nullopt when an
/// evaluation leaves the EDF.
inline std::optional<double> jacobian_fd_error(const mt::TrajectoryProblem& problem,
                                               const mt::MarsupialTrajectory& t, double h) {
  const auto ev = problem.evaluate(t, true);
  if (!ev) return std::nullopt;
  const Eigen::MatrixXd ja(ev->J);
  const Eigen::VectorXd x = problem.variables(t);
  double worst = 0.0;
  for (Eigen::Index c = 0; c < problem.dimension(); ++c) {
    Eigen::VectorXd xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    const auto rp = problem.evaluate(problem.apply(t, xp), false);
    const auto rm = problem.evaluate(problem.apply(t, xm), false);
    if (!rp || !rm) return std::nullopt;
    const Eigen::VectorXd fd = (rp->r - rm->r) / (2 * h);
    worst = std::max(worst, (ja.col(c) - fd).norm() / std::max(fd.norm(), 1.0));
  }
  return worst;
}

}  // namespace testutil
