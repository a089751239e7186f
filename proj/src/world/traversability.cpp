#include "marsupial/world/traversability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "marsupial/common/error.hpp"

namespace marsupial::world {

void TraversabilityParams::validate() const {
  if (!(cell_size > 0.0)) throw InvalidArgumentError("traversability cell size must be > 0");
  if (!(max_slope >= 0.0)) throw InvalidArgumentError("max slope must be >= 0");
  if (!(max_step >= 0.0)) throw InvalidArgumentError("max step must be >= 0");
  if (!(clearance > max_step)) throw InvalidArgumentError("clearance must exceed max step");
  if (!(anchor_height >= 0.0)) throw InvalidArgumentError("anchor height must be >= 0");
  if (!(ground_percentile >= 0.0 && ground_percentile <= 1.0)) {
    throw InvalidArgumentError("ground percentile must be in [0, 1]");
  }
}

TraversableSet::TraversableSet(TraversabilityParams params, Vec2 origin, int nx, int ny,
                               std::vector<TraversableCell> cells)
    : params_(params), origin_(origin), nx_(nx), ny_(ny), cells_(std::move(cells)) {
  lookup_.assign(static_cast<std::size_t>(nx_) * ny_, -1);
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const auto& c = cells_[i];
    lookup_[static_cast<std::size_t>(c.iy) * nx_ + c.ix] = static_cast<int>(i);
  }
}

int TraversableSet::member_at(int ix, int iy) const {
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return -1;
  return lookup_[static_cast<std::size_t>(iy) * nx_ + ix];
}

int TraversableSet::member_containing(const Vec3& p) const {
  const double c = params_.cell_size;
  const double fx = std::floor((p.x() - origin_.x()) / c);
  const double fy = std::floor((p.y() - origin_.y()) / c);
  if (!(fx >= 0 && fy >= 0 && fx < nx_ && fy < ny_)) return -1;
  return member_at(static_cast<int>(fx), static_cast<int>(fy));
}

Vec3 TraversableSet::center(std::size_t member) const {
  const auto& c = cells_.at(member);
  const double s = params_.cell_size;
  return {origin_.x() + (c.ix + 0.5) * s, origin_.y() + (c.iy + 0.5) * s,
          c.ground_z + params_.anchor_height};
}

bool TraversableSet::are_neighbors(std::size_t a, std::size_t b) const {
  const auto& ca = cells_.at(a);
  const auto& cb = cells_.at(b);
  if (a == b) return false;
  if (std::abs(ca.ix - cb.ix) > 1 || std::abs(ca.iy - cb.iy) > 1) return false;
  return std::abs(ca.ground_z - cb.ground_z) <= params_.max_step;
}

int TraversableSet::nearest_member(const Vec3& p) const {
  if (cells_.empty()) return -1;
  const double s = params_.cell_size;
  const int cx = std::clamp(static_cast<int>(std::floor((p.x() - origin_.x()) / s)), 0, nx_ - 1);
  const int cy = std::clamp(static_cast<int>(std::floor((p.y() - origin_.y()) / s)), 0, ny_ - 1);
  const double ox = std::abs(p.x() - (origin_.x() + (cx + 0.5) * s));
  const double oy = std::abs(p.y() - (origin_.y() + (cy + 0.5) * s));
  const double offset = std::max(ox, oy);

  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  const int max_ring = std::max(nx_, ny_);
  auto visit = [&](int ix, int iy) {
    const int m = member_at(ix, iy);
    if (m < 0) return;
    const double d2 = (center(static_cast<std::size_t>(m)) - p).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && m < best)) {
      best_d2 = d2;
      best = m;
    }
  };
  for (int r = 0; r <= max_ring; ++r) {
    const double lower = r * s - offset;
    if (best >= 0 && lower > 0.0 && lower * lower > best_d2) break;
    if (r == 0) {
      visit(cx, cy);
      continue;
    }
    for (int ix = cx - r; ix <= cx + r; ++ix) {
      visit(ix, cy - r);
      visit(ix, cy + r);
    }
    for (int iy = cy - r + 1; iy <= cy + r - 1; ++iy) {
      visit(cx - r, iy);
      visit(cx + r, iy);
    }
  }
  return best;
}

Vec3 TraversableSet::project(const Vec3& p) const {
  const int m = member_containing(p);
  if (m >= 0) {
    return {p.x(), p.y(), cells_[static_cast<std::size_t>(m)].ground_z + params_.anchor_height};
  }
  const int n = nearest_member(p);
  if (n < 0) throw EmptyInputError("traversable set is empty");
  return center(static_cast<std::size_t>(n));
}

namespace {

double fit_slope(const std::vector<Vec3>& pts) {
  if (pts.size() < 3) return 0.0;
  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector2d xy(p.x() - mean.x(), p.y() - mean.y());
    a += xy * xy.transpose();
    b += xy * (p.z() - mean.z());
  }
  const Eigen::Vector2d g = a.completeOrthogonalDecomposition().solve(b);
  return std::atan(g.norm());
}

}  // namespace

TraversableSet traversability(const PointCloud& cloud, const TraversabilityParams& params) {
  params.validate();
  if (cloud.empty()) throw EmptyInputError("empty cloud");
  const Aabb box = bounds(cloud);
  const double s = params.cell_size;
  const Vec2 origin(box.min.x(), box.min.y());
  const int nx = static_cast<int>(std::floor((box.max.x() - box.min.x()) / s)) + 1;
  const int ny = static_cast<int>(std::floor((box.max.y() - box.min.y()) / s)) + 1;

  std::vector<std::vector<Vec3>> buckets(static_cast<std::size_t>(nx) * ny);
  for (const auto& p : cloud.points) {
    const int ix = std::min(nx - 1, static_cast<int>(std::floor((p.x() - origin.x()) / s)));
    const int iy = std::min(ny - 1, static_cast<int>(std::floor((p.y() - origin.y()) / s)));
    buckets[static_cast<std::size_t>(iy) * nx + ix].push_back(p);
  }

  std::vector<TraversableCell> cells;
  std::vector<double> zs;
  std::vector<Vec3> ground;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const auto& pts = buckets[static_cast<std::size_t>(iy) * nx + ix];
      if (pts.empty()) continue;
      zs.clear();
      for (const auto& p : pts) zs.push_back(p.z());
      std::sort(zs.begin(), zs.end());
      const auto k = static_cast<std::size_t>(
          std::floor(params.ground_percentile * static_cast<double>(zs.size() - 1)));
      const double ground_z = zs[k];

      bool blocked = false;
      ground.clear();
      for (const auto& p : pts) {
        const double h = p.z() - ground_z;
        if (h > params.max_step && h <= params.clearance) {
          blocked = true;
          break;
        }
        if (std::abs(h) <= params.max_step) ground.push_back(p);
      }
      if (blocked) continue;
      const double slope = fit_slope(ground);
      if (slope > params.max_slope) continue;
      cells.push_back({ix, iy, ground_z, slope});
    }
  }
  return TraversableSet(params, origin, nx, ny, std::move(cells));
}

}  // namespace marsupial::world
