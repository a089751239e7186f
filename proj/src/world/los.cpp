#include "marsupial/world/los.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "marsupial/common/error.hpp"

namespace marsupial::world {

namespace {

template <typename Visit>
bool for_each_sample(const Vec3& a, const Vec3& b, double step, Visit&& visit) {
  const double len = (b - a).norm();
  const long n = std::max(1L, static_cast<long>(std::ceil(len / step - 1e-12)));
  const Vec3 ab = b - a;
  const Vec3 ba = a - b;
  for (long i = 0; i <= n; ++i) {
    Vec3 p;
    if (2 * i < n) {
      p = a + ab * (static_cast<double>(i) / static_cast<double>(n));
    } else if (2 * i > n) {
      p = b + ba * (static_cast<double>(n - i) / static_cast<double>(n));
    } else {
      p = (a + b) * 0.5;
    }
    if (!visit(p)) return false;
  }
  return true;
}

// Exact voxel traversal of a->b (Amanatides-Woo). Endpoints are ordered
// canonically so that a->b and b->a visit the same voxels.
template <typename Blocked>
bool traverse_free(const GridGeometry& g, Vec3 a, Vec3 b, Blocked&& blocked) {
  if (std::lexicographical_compare(b.data(), b.data() + 3, a.data(), a.data() + 3)) std::swap(a, b);
  const Vec3 fa = (a - g.origin()) / g.resolution() + Vec3::Constant(0.5);
  const Vec3 fb = (b - g.origin()) / g.resolution() + Vec3::Constant(0.5);
  const auto& dims = g.dims();
  int v[3], last[3], step[3];
  double t_max[3], t_delta[3];
  for (int k = 0; k < 3; ++k) {
    v[k] = std::clamp(static_cast<int>(std::floor(fa[k])), 0, dims[k] - 1);
    last[k] = std::clamp(static_cast<int>(std::floor(fb[k])), 0, dims[k] - 1);
    const double d = fb[k] - fa[k];
    step[k] = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (step[k] == 0) {
      t_max[k] = t_delta[k] = std::numeric_limits<double>::infinity();
    } else {
      const double boundary = step[k] > 0 ? v[k] + 1.0 : static_cast<double>(v[k]);
      t_max[k] = (boundary - fa[k]) / d;
      t_delta[k] = 1.0 / std::abs(d);
    }
  }
  const int budget = std::abs(last[0] - v[0]) + std::abs(last[1] - v[1]) + std::abs(last[2] - v[2]);
  for (int n = 0; n <= budget; ++n) {
    if (blocked(g.linear_index(v[0], v[1], v[2]))) return false;
    if (v[0] == last[0] && v[1] == last[1] && v[2] == last[2]) break;
    int k = 0;
    if (t_max[1] < t_max[k]) k = 1;
    if (t_max[2] < t_max[k]) k = 2;
    if (t_max[k] > 1.0) break;
    v[k] = std::clamp(v[k] + step[k], 0, dims[k] - 1);
    t_max[k] += t_delta[k];
  }
  return true;
}

void require_inside(const GridGeometry& g, const Vec3& p, const char* what) {
  if (!g.contains(p)) {
    throw OutOfBoundsError(
        fmt::format("LoS {} ({:.3f}, {:.3f}, {:.3f}) outside grid", what, p.x(), p.y(), p.z()));
  }
}

}  // namespace

std::vector<Vec3> segment_samples(const Vec3& a, const Vec3& b, double step) {
  std::vector<Vec3> out;
  for_each_sample(a, b, step, [&](const Vec3& p) {
    out.push_back(p);
    return true;
  });
  return out;
}

bool check_los(const VoxelGrid& grid, const Vec3& a, const Vec3& b) {
  const auto& g = grid.geometry();
  require_inside(g, a, "endpoint");
  require_inside(g, b, "endpoint");
  return traverse_free(g, a, b, [&](std::size_t i) { return grid.occupied(i); });
}

bool check_los(const VoxelEDF& edf, const Vec3& a, const Vec3& b, double clearance) {
  const auto& g = edf.geometry();
  require_inside(g, a, "endpoint");
  require_inside(g, b, "endpoint");
  if (!traverse_free(g, a, b, [&](std::size_t i) { return edf.node_value(i) <= 0.0; })) {
    return false;
  }
  return for_each_sample(a, b, 0.5 * g.resolution(), [&](const Vec3& p) {
    const auto d = edf.try_distance(p);
    return d && *d >= clearance;
  });
}

double min_clearance_along(const VoxelEDF& edf, const Vec3& a, const Vec3& b) {
  const auto& g = edf.geometry();
  require_inside(g, a, "endpoint");
  require_inside(g, b, "endpoint");
  double best = edf.max_dist();
  for_each_sample(a, b, 0.5 * g.resolution(), [&](const Vec3& p) {
    if (const auto d = edf.try_distance(p)) best = std::min(best, *d);
    return true;
  });
  return best;
}

}  // namespace marsupial::world
