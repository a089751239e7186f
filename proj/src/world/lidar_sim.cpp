#include "marsupial/world/lidar_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "marsupial/common/error.hpp"

namespace marsupial::world {

SensorModel SensorModel::spinning(int rings, double min_elevation, double max_elevation,
                                  int azimuth_steps, double max_range, double noise_stddev) {
  if (rings <= 0 || azimuth_steps <= 0) throw InvalidArgumentError("ray counts must be positive");
  SensorModel m;
  m.max_range = max_range;
  m.noise_stddev = noise_stddev;
  m.directions.reserve(static_cast<std::size_t>(rings) * azimuth_steps);
  for (int r = 0; r < rings; ++r) {
    const double elev = rings == 1 ? 0.5 * (min_elevation + max_elevation)
                                   : min_elevation + (max_elevation - min_elevation) * r / (rings - 1);
    for (int a = 0; a < azimuth_steps; ++a) {
      const double az = 2.0 * kPi * a / azimuth_steps;
      m.directions.emplace_back(std::cos(elev) * std::cos(az), std::cos(elev) * std::sin(az),
                                std::sin(elev));
    }
  }
  m.validate();
  return m;
}

void SensorModel::validate() const {
  if (!(max_range > 0.0)) throw InvalidArgumentError("sensor max range must be > 0");
  if (!(noise_stddev >= 0.0)) throw InvalidArgumentError("sensor noise must be >= 0");
}

namespace {

// Range at which the interpolated EDF is smallest near a first hit at t_hit.
// Grazing rays reach the surface well past the first occupied sample, so the
// forward window spans several voxels; the scan stops once the field rises
// clearly above the running minimum so a second surface is never chosen.
// Returns nullopt when the ray only clips the corner of an occupied voxel and
// never comes within kMixedPixel * resolution of the surface (a mixed-pixel
// return that a real sensor would not report consistently).
constexpr double kMixedPixel = 0.2;

std::optional<double> refine_range(const VoxelEDF& edf, const Vec3& origin, const Vec3& dir,
                                   double t_hit) {
  const double res = edf.resolution();
  const double lo = std::max(0.0, t_hit - res);
  const double dt = res / 20.0;
  auto f = [&](double t) {
    return edf.try_distance(origin + dir * t).value_or(std::numeric_limits<double>::infinity());
  };
  constexpr int kMaxSamples = 120;
  int best = 0, last = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kMaxSamples; ++i) {
    const double v = f(lo + dt * i);
    last = i;
    if (v < best_v) {
      best_v = v;
      best = i;
    } else if (v > best_v + 0.5 * res) {
      break;
    }
  }
  double a = lo + dt * std::max(0, best - 1);
  double b = lo + dt * std::min(last, best + 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 40; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double t = 0.5 * (a + b);
  if (f(t) > kMixedPixel * res) return std::nullopt;
  return t;
}

}  // namespace

PointCloud simulate_lidar(const VoxelEDF& edf, const Pose& pose, const SensorModel& model,
                          std::uint64_t seed) {
  model.validate();
  const auto& g = edf.geometry();
  auto occupied = [&](const GridIndex& v) { return edf.node_value(g.linear_index(v)) <= 0.0; };
  if (const auto v = g.voxel_of(pose.position); v && occupied(*v)) {
    throw InvalidArgumentError(fmt::format("sensor pose ({:.3f}, {:.3f}, {:.3f}) inside obstacle",
                                           pose.position.x(), pose.position.y(),
                                           pose.position.z()));
  }
  const Mat3 rot = pose.rotation();
  const Vec3& origin = pose.position;
  const double step = 0.25 * g.resolution();
  const long max_steps = static_cast<long>(std::ceil(model.max_range / step));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  PointCloud out;
  out.points.reserve(model.directions.size());
  for (const auto& dir_sensor : model.directions) {
    const Vec3 dir = rot * dir_sensor;
    for (long s = 1; s <= max_steps; ++s) {
      const double t = step * static_cast<double>(s);
      const auto v = g.voxel_of(origin + dir * t);
      if (!v) break;
      if (!occupied(*v)) continue;
      const auto refined = refine_range(edf, origin, dir, t);
      if (!refined) break;
      double range = *refined;
      if (model.noise_stddev > 0.0) range += model.noise_stddev * noise(rng);
      if (range > 0.0 && range <= model.max_range) out.points.push_back(dir_sensor * range);
      break;
    }
  }
  return out;
}

}  // namespace marsupial::world
