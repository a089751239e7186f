#include <chrono>
#include <cmath>

#include <Eigen/Geometry>

#include "marsupial/common/error.hpp"
#include "marsupial/localization/registration.hpp"

namespace marsupial::localization {

void IcpOptions::validate() const {
  if (max_iterations <= 0) throw InvalidArgumentError("ICP max iterations must be > 0");
  if (!(step_tolerance > 0.0)) throw InvalidArgumentError("ICP step tolerance must be > 0");
  if (!(max_correspondence > 0.0)) {
    throw InvalidArgumentError("ICP correspondence distance must be > 0");
  }
}

namespace {

struct Matches {
  Eigen::Matrix3Xd src, dst;
  double cost = 0.0;
};

Matches correspond(const std::vector<Vec3>& scan, const KdTree& map, const Mat3& r, const Vec3& t,
                   double max_dist) {
  Matches m;
  m.src.resize(3, static_cast<Eigen::Index>(scan.size()));
  m.dst.resize(3, static_cast<Eigen::Index>(scan.size()));
  Eigen::Index n = 0;
  const double cap = max_dist * max_dist;
  for (const auto& p : scan) {
    const Vec3 q = r * p + t;
    const auto nb = map.nearest(q, max_dist);
    if (nb.index < 0) {
      m.cost += cap;
      continue;
    }
    m.cost += nb.squared_distance;
    m.src.col(n) = q;
    m.dst.col(n) = map.points()[static_cast<std::size_t>(nb.index)];
    ++n;
  }
  m.src.conservativeResize(3, n);
  m.dst.conservativeResize(3, n);
  m.cost /= static_cast<double>(scan.size());
  return m;
}

// Closed-form yaw + translation aligning src onto dst.
Eigen::Matrix4d fit_yaw_translation(const Eigen::Matrix3Xd& src, const Eigen::Matrix3Xd& dst) {
  const Vec3 ms = src.rowwise().mean(), md = dst.rowwise().mean();
  double sxx = 0.0, sxy = 0.0;
  for (Eigen::Index i = 0; i < src.cols(); ++i) {
    const Vec3 a = src.col(i) - ms, b = dst.col(i) - md;
    sxx += a.x() * b.x() + a.y() * b.y();
    sxy += a.x() * b.y() - a.y() * b.x();
  }
  const Mat3 r = yaw_rotation(std::atan2(sxy, sxx));
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = r;
  t.topRightCorner<3, 1>() = md - r * ms;
  return t;
}

}  // namespace

RegistrationReport icp_register(const world::PointCloud& scan, const KdTree& map,
                                const Pose& init, const IcpOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  options.validate();
  if (scan.empty()) throw EmptyInputError("empty scan");
  if (map.size() == 0) throw EmptyInputError("empty map");

  const auto points = voxel_decimate(scan.points, options.max_points);
  RegistrationReport report;
  report.points_used = points.size();
  Mat3 r = init.rotation();
  Vec3 t = init.position;

  Matches m = correspond(points, map, r, t, options.max_correspondence);
  report.initial_cost = m.cost;
  report.cost_history.push_back(m.cost);
  bool settled = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    report.iterations = it + 1;
    if (m.src.cols() < 3) break;
    const Eigen::Matrix4d fit = options.fix_roll_pitch ? fit_yaw_translation(m.src, m.dst)
                                                       : Eigen::umeyama(m.src, m.dst, false);
    const Mat3 dr = fit.topLeftCorner<3, 3>();
    const Vec3 dt = fit.topRightCorner<3, 1>();
    r = dr * r;
    t = dr * t + dt;
    m = correspond(points, map, r, t, options.max_correspondence);
    report.cost_history.push_back(m.cost);
    const double angle = Eigen::AngleAxisd(dr).angle();
    if (dt.norm() < options.step_tolerance && angle < options.step_tolerance) {
      settled = true;
      break;
    }
  }

  report.pose = Pose::from_rotation(t, r);
  if (options.fix_roll_pitch) {
    // Re-impose the exact prior angles; the yaw-only updates keep them up to rounding.
    report.pose.roll = init.roll;
    report.pose.pitch = init.pitch;
  }
  report.final_cost = m.cost;
  report.converged = settled && report.final_cost <= report.initial_cost;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

RegistrationReport icp_register(const world::PointCloud& scan, const world::PointCloud& map,
                                const Pose& init, const IcpOptions& options) {
  if (map.empty()) throw EmptyInputError("empty map");
  const auto t0 = std::chrono::steady_clock::now();
  const KdTree index(map.points);
  auto report = icp_register(scan, index, init, options);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace marsupial::localization
