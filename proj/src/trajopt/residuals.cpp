#include "marsupial/trajopt/residuals.hpp"

#include <cmath>

#include <fmt/format.h>

#include "marsupial/common/error.hpp"

namespace marsupial::trajopt {

std::vector<std::pair<std::string, double>> ResidualWeights::named() const {
  return {{"tether_obstacle", tether_obstacle}, {"tether_length", tether_length},
          {"velocity", velocity},               {"acceleration", acceleration},
          {"clearance", clearance},             {"equidistance", equidistance},
          {"smoothness", smoothness},           {"time", time}};
}

void OptimizerConfig::validate() const {
  if (!(l_max > 0.0)) throw InvalidArgumentError("l_max must be > 0");
  if (!(rho_ot >= 0.0)) throw InvalidArgumentError("rho_ot must be >= 0");
  if (!(beta > 1.0)) throw InvalidArgumentError("beta must be > 1");
  if (m < 2) throw InvalidArgumentError("tether samples m must be >= 2");
  for (double v : {v_g, v_a, v_max_g, v_max_a, a_max_g, a_max_a}) {
    if (!(v > 0.0)) throw InvalidArgumentError("speeds and accelerations must be > 0");
  }
  if (!(safety_g >= 0.0) || !(safety_a >= 0.0)) {
    throw InvalidArgumentError("safety distances must be >= 0");
  }
  if (!(epsilon > 0.0)) throw InvalidArgumentError("epsilon must be > 0");
  for (const auto& [name, w] : weights.named()) {
    if (!(w >= 0.0)) throw InvalidArgumentError(fmt::format("weight {} must be >= 0", name));
  }
  if (max_iterations < 0) throw InvalidArgumentError("max iterations must be >= 0");
  if (!(step_tolerance > 0.0) || !(cost_tolerance >= 0.0) || !(initial_lambda > 0.0)) {
    throw InvalidArgumentError("solver tolerances must be positive");
  }
}

double tether_length_residual(double d_u, double l_max) {
  return d_u > l_max ? std::expm1(d_u - l_max) : 0.0;
}

double inverse_distance(double d, double safety, double beta, double epsilon) {
  const double rho = d > safety ? 1.0 : beta;
  return rho / std::max(d, epsilon);
}

double tether_obstacle_residual(const JointState& state, const world::VoxelEDF& edf,
                                const OptimizerConfig& cfg) {
  double sum = 0.0;
  for (const auto& p : tether_samples(state.p_g, state.p_a, cfg.m)) {
    sum += inverse_distance(edf.query(p).distance, cfg.rho_ot, cfg.beta, cfg.epsilon);
  }
  return sum;
}

namespace {

void require_positive_dt(const MarsupialTrajectory& traj) {
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (!(traj.states[i].dt > 0.0)) {
      throw InvalidArgumentError(fmt::format("state {} has non-positive dt", i));
    }
  }
}

template <class Get>
void kinematics(const MarsupialTrajectory& t, Get pos, double v_max, double a_max,
                std::vector<double>& vel, std::vector<double>& acc) {
  const std::size_t n = t.size();
  for (std::size_t i = 1; i < n; ++i) {
    vel.push_back(std::max(0.0, (pos(i) - pos(i - 1)).norm() / t.states[i].dt - v_max));
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Vec3 v0 = (pos(i) - pos(i - 1)) / t.states[i].dt;
    const Vec3 v1 = (pos(i + 1) - pos(i)) / t.states[i + 1].dt;
    acc.push_back(std::max(0.0, (v1 - v0).norm() / t.states[i + 1].dt - a_max));
  }
}

}  // namespace

KinematicResiduals kinematic_residuals(const MarsupialTrajectory& traj, const OptimizerConfig& cfg) {
  require_positive_dt(traj);
  KinematicResiduals k;
  kinematics(traj, [&](std::size_t i) { return traj.states[i].p_g; }, cfg.v_max_g, cfg.a_max_g,
             k.velocity_g, k.acceleration_g);
  kinematics(traj, [&](std::size_t i) { return traj.states[i].p_a; }, cfg.v_max_a, cfg.a_max_a,
             k.velocity_a, k.acceleration_a);
  return k;
}

ShapeResiduals shape_residuals(const MarsupialTrajectory& traj, const world::VoxelEDF& edf,
                               const OptimizerConfig& cfg) {
  ShapeResiduals s;
  const std::size_t n = traj.size();
  auto platform = [&](auto pos, double safety, std::vector<double>& equi,
                      std::vector<double>& clear, std::vector<double>& smooth) {
    double mean = 0.0;
    for (std::size_t i = 1; i < n; ++i) mean += (pos(i) - pos(i - 1)).norm();
    if (n > 1) mean /= static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i) equi.push_back((pos(i) - pos(i - 1)).norm() - mean);
    for (std::size_t i = 0; i < n; ++i) {
      clear.push_back(inverse_distance(edf.query(pos(i)).distance, safety, cfg.beta, cfg.epsilon));
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      smooth.push_back((pos(i - 1) - 2.0 * pos(i) + pos(i + 1)).norm());
    }
  };
  platform([&](std::size_t i) { return traj.states[i].p_g; }, cfg.safety_g, s.equidistance_g,
           s.clearance_g, s.smoothness_g);
  platform([&](std::size_t i) { return traj.states[i].p_a; }, cfg.safety_a, s.equidistance_a,
           s.clearance_a, s.smoothness_a);
  for (std::size_t i = 1; i < n; ++i) s.time.push_back(traj.states[i].dt);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

// Quantity slots of one state: p_g (0..2), p_a (3..5), dt (6).
constexpr int kG = 0, kA = 3, kDt = 6;

// One residual row under construction; partials are keyed by (state, slot).
struct Row {
  double value = 0.0;
  std::vector<std::tuple<std::size_t, int, double>> d;

  void add(std::size_t k, int slot, double v) { d.emplace_back(k, slot, v); }
  void add3(std::size_t k, int base, const Vec3& g) {
    for (int c = 0; c < 3; ++c) add(k, base + c, g[c]);
  }
};

Vec3 unit_or_zero(const Vec3& v) {
  const double n = v.norm();
  return n > 1e-12 ? Vec3(v / n) : Vec3::Zero();
}

}  // namespace

TrajectoryProblem::TrajectoryProblem(const world::VoxelEDF& edf, OptimizerConfig cfg,
                                     std::size_t states)
    : edf_(&edf), cfg_(std::move(cfg)), n_(states) {
  cfg_.validate();
  if (n_ < 2) throw InvalidArgumentError("trajectory needs at least 2 states");
  const auto n = static_cast<Eigen::Index>(n_);
  dim_ = 6 * (n - 2) + 1;
  const std::array<Eigen::Index, kFamilies> counts = {
      n,                  // tether obstacle
      n,                  // tether length
      2 * (n - 1),        // velocity g, a
      2 * (n - 2),        // acceleration g, a
      2 * n,              // clearance g, a
      2 * (n - 1),        // equidistance g, a
      2 * 3 * (n - 2),    // smoothness g, a (components)
      n - 1};             // time
  Eigen::Index row = 0;
  for (int f = 0; f < kFamilies; ++f) {
    blocks_[static_cast<std::size_t>(f)] = {row, counts[static_cast<std::size_t>(f)]};
    row += counts[static_cast<std::size_t>(f)];
  }
  rows_ = row;
}

Eigen::VectorXd TrajectoryProblem::variables(const MarsupialTrajectory& traj) const {
  if (traj.size() != n_) throw InvalidArgumentError("trajectory size does not match the problem");
  Eigen::VectorXd x(dim_);
  for (std::size_t k = 1; k + 1 < n_; ++k) {
    const auto& s = traj.states[k];
    const auto o = static_cast<Eigen::Index>(6 * (k - 1));
    x.segment<6>(o) << s.p_g.x(), s.p_g.y(), s.p_a.x(), s.p_a.y(), s.p_a.z(), std::log(s.dt);
  }
  x[dim_ - 1] = std::log(traj.states.back().dt);
  return x;
}

MarsupialTrajectory TrajectoryProblem::apply(const MarsupialTrajectory& ref,
                                             const Eigen::VectorXd& x) const {
  MarsupialTrajectory t = ref;
  for (std::size_t k = 1; k + 1 < n_; ++k) {
    auto& s = t.states[k];
    const auto o = static_cast<Eigen::Index>(6 * (k - 1));
    s.p_g.x() = x[o];
    s.p_g.y() = x[o + 1];
    s.p_a = x.segment<3>(o + 2);
    s.dt = std::exp(x[o + 5]);
  }
  t.states.back().dt = std::exp(x[dim_ - 1]);
  return t;
}

std::optional<TrajectoryProblem::Evaluation> TrajectoryProblem::evaluate(
    const MarsupialTrajectory& traj, bool jacobian) const {
  if (traj.size() != n_) throw InvalidArgumentError("trajectory size does not match the problem");
  const auto& st = traj.states;
  const std::size_t n = n_;
  const auto wts = cfg_.weights.named();

  // Column of (state, slot), or -1 when held fixed.
  auto column = [&](std::size_t k, int slot) -> Eigen::Index {
    if (k + 1 == n && slot == kDt) return dim_ - 1;
    if (k == 0 || k + 1 == n) return -1;
    static constexpr int kMap[7] = {0, 1, -1, 2, 3, 4, 5};
    const int c = kMap[slot];
    return c < 0 ? -1 : static_cast<Eigen::Index>(6 * (k - 1) + static_cast<std::size_t>(c));
  };

  Evaluation ev;
  ev.r.resize(rows_);
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::Index row = 0;
  int family = 0;
  double scale = 0.0;
  auto begin_family = [&](int f) {
    family = f;
    scale = std::sqrt(wts[static_cast<std::size_t>(f)].second);
    row = blocks_[static_cast<std::size_t>(f)].first;
  };
  auto emit = [&](const Row& r) {
    ev.r[row] = scale * r.value;
    if (jacobian) {
      for (const auto& [k, slot, v] : r.d) {
        const Eigen::Index c = column(k, slot);
        if (c < 0 || v == 0.0) continue;
        // dt = exp(u): d/du = dt * d/d(dt).
        const double chain = slot == kDt ? st[k].dt : 1.0;
        trips.emplace_back(row, c, scale * v * chain);
      }
    }
    ++row;
  };
  auto edf_at = [&](const Vec3& p) { return edf_->try_query(p); };

  // Tether obstacle.
  begin_family(0);
  for (std::size_t k = 0; k < n; ++k) {
    Row r;
    const Vec3 ga = st[k].p_a - st[k].p_g;
    for (int j = 0; j < cfg_.m; ++j) {
      const double s = static_cast<double>(j) / (cfg_.m - 1);
      const Vec3 p = j + 1 == cfg_.m ? st[k].p_a : Vec3(st[k].p_g + ga * s);
      const auto q = edf_at(p);
      if (!q) return std::nullopt;
      const double d = q->distance;
      const double rho = d > cfg_.rho_ot ? 1.0 : cfg_.beta;
      r.value += rho / std::max(d, cfg_.epsilon);
      if (jacobian && d > cfg_.epsilon) {
        const Vec3 g = -rho / (d * d) * q->gradient;
        r.add3(k, kG, (1.0 - s) * g);
        r.add3(k, kA, s * g);
      }
    }
    emit(r);
  }
  (void)family;

  // Tether length.
  begin_family(1);
  for (std::size_t k = 0; k < n; ++k) {
    Row r;
    const Vec3 ga = st[k].p_a - st[k].p_g;
    const double d = ga.norm();
    r.value = tether_length_residual(d, cfg_.l_max);
    if (d > cfg_.l_max) {
      const Vec3 g = std::exp(d - cfg_.l_max) * ga / d;
      r.add3(k, kA, g);
      r.add3(k, kG, -g);
    }
    emit(r);
  }

  auto pos = [&](std::size_t k, int base) -> const Vec3& {
    return base == kG ? st[k].p_g : st[k].p_a;
  };

  // Velocity.
  begin_family(2);
  for (int base : {kG, kA}) {
    const double vmax = base == kG ? cfg_.v_max_g : cfg_.v_max_a;
    for (std::size_t i = 1; i < n; ++i) {
      Row r;
      const Vec3 dp = pos(i, base) - pos(i - 1, base);
      const double len = dp.norm(), dt = st[i].dt;
      const double v = len / dt - vmax;
      if (v > 0.0) {
        r.value = v;
        const Vec3 e = unit_or_zero(dp);
        r.add3(i, base, e / dt);
        r.add3(i - 1, base, -e / dt);
        r.add(i, kDt, -len / (dt * dt));
      }
      emit(r);
    }
  }

  // Acceleration.
  begin_family(3);
  for (int base : {kG, kA}) {
    const double amax = base == kG ? cfg_.a_max_g : cfg_.a_max_a;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      Row r;
      const double t0 = st[i].dt, t1 = st[i + 1].dt;
      const Vec3 v0 = (pos(i, base) - pos(i - 1, base)) / t0;
      const Vec3 v1 = (pos(i + 1, base) - pos(i, base)) / t1;
      const double s = (v1 - v0).norm();
      const double a = s / t1 - amax;
      if (a > 0.0) {
        r.value = a;
        const Vec3 e = unit_or_zero(v1 - v0) / t1;
        r.add3(i + 1, base, e / t1);
        r.add3(i, base, -e / t1 - e / t0);
        r.add3(i - 1, base, e / t0);
        r.add(i + 1, kDt, -e.dot(v1) / t1 - s / (t1 * t1));
        r.add(i, kDt, e.dot(v0) / t0);
      }
      emit(r);
    }
  }

  // Clearance.
  begin_family(4);
  for (int base : {kG, kA}) {
    const double safety = base == kG ? cfg_.safety_g : cfg_.safety_a;
    for (std::size_t k = 0; k < n; ++k) {
      Row r;
      const auto q = edf_at(pos(k, base));
      if (!q) return std::nullopt;
      const double d = q->distance;
      const double rho = d > safety ? 1.0 : cfg_.beta;
      r.value = rho / std::max(d, cfg_.epsilon);
      if (d > cfg_.epsilon) r.add3(k, base, -rho / (d * d) * q->gradient);
      emit(r);
    }
  }

  // Equidistance: gap_i - mean(gaps), the mean coupling every step.
  begin_family(5);
  for (int base : {kG, kA}) {
    const std::size_t steps = n - 1;
    std::vector<double> gap(steps);
    std::vector<Vec3> unit(steps);
    double mean = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const Vec3 dp = pos(i, base) - pos(i - 1, base);
      gap[i - 1] = dp.norm();
      unit[i - 1] = unit_or_zero(dp);
      mean += gap[i - 1];
    }
    mean /= static_cast<double>(steps);
    const double inv = 1.0 / static_cast<double>(steps);
    for (std::size_t i = 1; i < n; ++i) {
      Row r;
      r.value = gap[i - 1] - mean;
      if (jacobian) {
        r.add3(i, base, unit[i - 1]);
        r.add3(i - 1, base, -unit[i - 1]);
        for (std::size_t k = 1; k < n; ++k) {
          r.add3(k, base, -inv * unit[k - 1]);
          r.add3(k - 1, base, inv * unit[k - 1]);
        }
      }
      emit(r);
    }
  }

  // Smoothness: components of the second difference.
  begin_family(6);
  for (int base : {kG, kA}) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const Vec3 dd = pos(i - 1, base) - 2.0 * pos(i, base) + pos(i + 1, base);
      for (int c = 0; c < 3; ++c) {
        Row r;
        r.value = dd[c];
        r.add(i - 1, base + c, 1.0);
        r.add(i, base + c, -2.0);
        r.add(i + 1, base + c, 1.0);
        emit(r);
      }
    }
  }

  // Time.
  begin_family(7);
  for (std::size_t i = 1; i < n; ++i) {
    Row r;
    r.value = st[i].dt;
    r.add(i, kDt, 1.0);
    emit(r);
  }

  if (jacobian) {
    ev.J.resize(rows_, dim_);
    ev.J.setFromTriplets(trips.begin(), trips.end());  // duplicates are summed
  }
  return ev;
}

std::array<double, TrajectoryProblem::kFamilies> TrajectoryProblem::family_costs(
    const Eigen::VectorXd& r) const {
  std::array<double, kFamilies> out{};
  for (int f = 0; f < kFamilies; ++f) {
    const auto [b, len] = blocks_[static_cast<std::size_t>(f)];
    out[static_cast<std::size_t>(f)] = r.segment(b, len).squaredNorm();
  }
  return out;
}

}  // namespace marsupial::trajopt
