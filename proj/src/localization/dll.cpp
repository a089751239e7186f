#include <chrono>
#include <cmath>
#include <unordered_set>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "marsupial/common/error.hpp"
#include "marsupial/localization/registration.hpp"

namespace marsupial::localization {

namespace {

struct CubeKey {
  std::int64_t x, y, z;
  bool operator==(const CubeKey&) const = default;
};

struct CubeKeyHash {
  std::size_t operator()(const CubeKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

void DllOptions::validate() const {
  if (max_iterations <= 0) throw InvalidArgumentError("DLL max iterations must be > 0");
  if (!(step_tolerance > 0.0)) throw InvalidArgumentError("DLL step tolerance must be > 0");
  if (!(initial_lambda > 0.0)) throw InvalidArgumentError("DLL initial lambda must be > 0");
}

std::vector<Vec3> voxel_decimate(const std::vector<Vec3>& points, std::size_t max_points) {
  if (max_points == 0 || points.size() <= max_points) return points;
  double cube = 0.05;
  for (;;) {
    std::unordered_set<CubeKey, CubeKeyHash> seen;
    seen.reserve(points.size());
    std::vector<Vec3> kept;
    for (const auto& p : points) {
      const CubeKey key{static_cast<std::int64_t>(std::floor(p.x() / cube)),
                        static_cast<std::int64_t>(std::floor(p.y() / cube)),
                        static_cast<std::int64_t>(std::floor(p.z() / cube))};
      if (seen.insert(key).second) kept.push_back(p);
    }
    if (kept.size() <= max_points) return kept;
    cube *= 1.25;
  }
}

double tukey_rho(double r, double tau) {
  if (std::abs(r) >= tau) return tau * tau / 6.0;
  const double u = 1.0 - (r / tau) * (r / tau);
  return tau * tau / 6.0 * (1.0 - u * u * u);
}

double tukey_weight(double r, double tau) {
  if (std::abs(r) >= tau) return 0.0;
  const double u = 1.0 - (r / tau) * (r / tau);
  return u * u;
}

DllObjective::DllObjective(const world::VoxelEDF& edf, std::vector<Vec3> points, double roll,
                           double pitch)
    : edf_(&edf), roll_(roll), pitch_(pitch), tau_(edf.max_dist()) {
  const Mat3 rp = Pose(Vec3::Zero(), roll, pitch, 0.0).rotation();
  leveled_.reserve(points.size());
  for (const auto& p : points) leveled_.push_back(rp * p);
}

DllObjective::State DllObjective::state_of(const Pose& pose) {
  return {pose.position.x(), pose.position.y(), pose.position.z(), pose.yaw};
}

Pose DllObjective::pose_of(const State& x) const {
  return Pose(Vec3(x[0], x[1], x[2]), roll_, pitch_, x[3]);
}

Vec3 DllObjective::transform(const State& x, std::size_t i) const {
  const double c = std::cos(x[3]), s = std::sin(x[3]);
  const Vec3& p = leveled_[i];
  return {c * p.x() - s * p.y() + x[0], s * p.x() + c * p.y() + x[1], p.z() + x[2]};
}

double DllObjective::evaluate(const State& x, Eigen::Vector4d* gradient,
                              Eigen::Matrix4d* hessian) const {
  const double c = std::cos(x[3]), s = std::sin(x[3]);
  const double saturated = tukey_rho(tau_, tau_);
  double cost = 0.0;
  if (gradient) gradient->setZero();
  if (hessian) hessian->setZero();
  for (const auto& p : leveled_) {
    const Vec3 q(c * p.x() - s * p.y() + x[0], s * p.x() + c * p.y() + x[1], p.z() + x[2]);
    const auto sample = edf_->try_query(q);
    if (!sample) {
      cost += saturated;
      continue;
    }
    const double r = sample->distance;
    cost += tukey_rho(r, tau_);
    if (!gradient && !hessian) continue;
    const double w = tukey_weight(r, tau_);
    if (w == 0.0) continue;
    const Vec3& g = sample->gradient;
    const double dyaw = g.x() * (-s * p.x() - c * p.y()) + g.y() * (c * p.x() - s * p.y());
    const Eigen::Vector4d j(g.x(), g.y(), g.z(), dyaw);
    if (gradient) *gradient += (w * r) * j;
    if (hessian) hessian->noalias() += w * (j * j.transpose());
  }
  return cost;
}

RegistrationReport dll_register(const world::PointCloud& scan, const world::VoxelEDF& edf,
                                const Pose& init, const DllOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  options.validate();
  if (scan.empty()) throw EmptyInputError("empty scan");
  if (!edf.contains(init.position)) {
    throw OutOfBoundsError(fmt::format("initial pose ({:.3f}, {:.3f}, {:.3f}) outside the map",
                                       init.position.x(), init.position.y(), init.position.z()));
  }

  const DllObjective objective(edf, voxel_decimate(scan.points, options.max_points), init.roll,
                               init.pitch);
  RegistrationReport report;
  report.points_used = objective.leveled_points().size();

  DllObjective::State x = DllObjective::state_of(init);
  Eigen::Vector4d g;
  Eigen::Matrix4d h;
  double cost = objective.evaluate(x, &g, &h);
  report.initial_cost = cost;
  report.cost_history.push_back(cost);

  double lambda = options.initial_lambda;
  for (int it = 0; it < options.max_iterations; ++it) {
    report.iterations = it + 1;
    Eigen::Matrix4d damped = h;
    for (int k = 0; k < 4; ++k) damped(k, k) += lambda * std::max(h(k, k), 1e-9);
    const Eigen::Vector4d step = damped.ldlt().solve(-g);
    if (!step.allFinite() || step.norm() < options.step_tolerance) {
      report.converged = true;
      break;
    }
    DllObjective::State trial = x + step;
    trial[3] = wrap_angle(trial[3]);
    const double trial_cost = objective.evaluate(trial);
    if (trial_cost < cost) {
      x = trial;
      cost = objective.evaluate(x, &g, &h);
      report.cost_history.push_back(cost);
      lambda = std::max(lambda * 0.1, 1e-9);
      if (step.head<3>().norm() < options.step_tolerance &&
          std::abs(step[3]) < options.step_tolerance) {
        report.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e8) {
        // No descent direction left at any damping: a local minimum.
        report.converged = true;
        break;
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(h, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  report.observable = lo > 0.0 && hi / lo <= options.max_condition;
  report.pose = objective.pose_of(x);
  report.final_cost = cost;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

double scan_alignment_metric(const world::PointCloud& scan, const Pose& pose,
                             const world::VoxelEDF& edf) {
  if (scan.empty()) throw EmptyInputError("empty scan");
  double sum = 0.0;
  for (const auto& p : scan.points) {
    sum += edf.try_distance(pose.transform(p)).value_or(edf.max_dist());
  }
  return sum / static_cast<double>(scan.size());
}

}  // namespace marsupial::localization
