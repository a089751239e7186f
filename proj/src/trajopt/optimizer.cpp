#include "marsupial/trajopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/SparseCore>

#include "marsupial/common/error.hpp"
#include "marsupial/world/los.hpp"

namespace marsupial::trajopt {

HardChecks hard_checks(const MarsupialTrajectory& traj, const world::VoxelEDF& edf, double l_max) {
  HardChecks c;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.states[i];
    if ((s.p_a - s.p_g).norm() > l_max) {
      c.all_lengths_ok = false;
      c.length_violations.push_back(i);
    }
    const bool inside = edf.contains(s.p_g) && edf.contains(s.p_a);
    if (!inside || !world::check_los(edf, s.p_g, s.p_a, 0.0)) {
      c.all_los = false;
      c.los_violations.push_back(i);
    }
  }
  return c;
}

Initialization initialize_checked(const std::vector<JointState>& path, double v_g, double v_a,
                                  const world::VoxelEDF& edf, double l_max) {
  for (const auto spacing : {Spacing::kPerPlatform, Spacing::kShared}) {
    auto t = initialize_trajectory(path, v_g, v_a, spacing);
    if (hard_checks(t, edf, l_max).passed()) return {std::move(t), spacing};
  }
  return {initialize_trajectory(path, v_g, v_a, Spacing::kNone), Spacing::kNone};
}

double polyline_clearance(const std::vector<Vec3>& points, const world::VoxelEDF& edf) {
  double m = std::numeric_limits<double>::infinity();
  if (points.size() == 1) return edf.query(points[0]).distance;
  for (std::size_t i = 1; i < points.size(); ++i) {
    m = std::min(m, world::min_clearance_along(edf, points[i - 1], points[i]));
  }
  return m;
}

std::vector<Vec3> ugv_points(const MarsupialTrajectory& traj) {
  std::vector<Vec3> out;
  for (const auto& s : traj.states) out.push_back(s.p_g);
  return out;
}

std::vector<Vec3> uav_points(const MarsupialTrajectory& traj) {
  std::vector<Vec3> out;
  for (const auto& s : traj.states) out.push_back(s.p_a);
  return out;
}

namespace {

bool subset(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<std::pair<std::string, double>> breakdown(const TrajectoryProblem& problem,
                                                      const OptimizerConfig& cfg,
                                                      const Eigen::VectorXd& r) {
  const auto costs = problem.family_costs(r);
  const auto names = cfg.weights.named();
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t f = 0; f < names.size(); ++f) out.emplace_back(names[f].first, costs[f]);
  return out;
}

// Puts interior UGV positions on the ground manifold.
void project_ugv(MarsupialTrajectory& t, const world::TraversableSet& ground) {
  for (std::size_t k = 1; k + 1 < t.size(); ++k) t.states[k].p_g = ground.project(t.states[k].p_g);
}

bool in_bounds(const MarsupialTrajectory& t, const world::VoxelEDF& edf) {
  return std::all_of(t.states.begin(), t.states.end(), [&](const TrajState& s) {
    return edf.contains(s.p_g) && edf.contains(s.p_a);
  });
}

}  // namespace

std::pair<MarsupialTrajectory, OptReport> optimize_trajectory(const MarsupialTrajectory& input,
                                                              const planner::Environment& env,
                                                              const OptimizerConfig& cfg) {
  cfg.validate();
  input.validate();
  const auto& edf = env.edf();
  if (!in_bounds(input, edf)) throw OutOfBoundsError("trajectory leaves the map");

  OptReport rep;
  MarsupialTrajectory cur = input;
  project_ugv(cur, env.ground());
  if (!in_bounds(cur, edf)) throw OutOfBoundsError("trajectory leaves the map");

  const TrajectoryProblem problem(edf, cfg, cur.size());
  auto ev = problem.evaluate(cur, true);
  if (!ev) throw OutOfBoundsError("tether samples leave the map");
  double cost = ev->r.squaredNorm();
  rep.initial_cost = cost;
  rep.initial_breakdown = breakdown(problem, cfg, ev->r);
  rep.cost_history.push_back(cost);
  HardChecks checks = hard_checks(cur, edf, cfg.l_max);
  rep.initial_clearance_g = polyline_clearance(ugv_points(cur), edf);
  rep.initial_clearance_a = polyline_clearance(uav_points(cur), edf);

  double lambda = cfg.initial_lambda;
  const auto dim = problem.dimension();
  for (int it = 0; it < cfg.max_iterations && dim > 0; ++it) {
    rep.iterations = it + 1;
    const Eigen::SparseMatrix<double> jtj_sparse = ev->J.transpose() * ev->J;
    const Eigen::MatrixXd jtj(jtj_sparse);
    const Eigen::VectorXd g = ev->J.transpose() * ev->r;
    const Eigen::VectorXd x = problem.variables(cur);

    bool accepted = false;
    double step_norm = 0.0, new_cost = cost;
    while (lambda <= 1e10) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index i = 0; i < dim; ++i) a(i, i) += lambda * std::max(jtj(i, i), 1e-9);
      const Eigen::VectorXd delta = a.ldlt().solve(-g);
      step_norm = delta.norm();
      MarsupialTrajectory cand = problem.apply(cur, x + delta);
      project_ugv(cand, env.ground());
      std::optional<TrajectoryProblem::Evaluation> cev;
      if (delta.allFinite() && in_bounds(cand, edf)) cev = problem.evaluate(cand, false);
      bool ok = cev && cev->r.squaredNorm() <= cost;
      HardChecks cand_checks;
      if (ok) {
        cand_checks = hard_checks(cand, edf, cfg.l_max);
        ok = subset(cand_checks.los_violations, checks.los_violations) &&
             subset(cand_checks.length_violations, checks.length_violations) &&
             polyline_clearance(ugv_points(cand), edf) >= rep.initial_clearance_g &&
             polyline_clearance(uav_points(cand), edf) >= rep.initial_clearance_a;
      }
      if (ok) {
        new_cost = cev->r.squaredNorm();
        cur = std::move(cand);
        checks = std::move(cand_checks);
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      rep.converged = true;
      break;
    }
    ++rep.accepted_steps;
    const double decrease = cost - new_cost;
    cost = new_cost;
    rep.cost_history.push_back(cost);
    ev = problem.evaluate(cur, true);
    if (step_norm < cfg.step_tolerance || decrease <= cfg.cost_tolerance * std::max(cost, 1e-300)) {
      rep.converged = true;
      break;
    }
  }

  rep.final_cost = cost;
  rep.final_breakdown = breakdown(problem, cfg, ev->r);
  rep.final_clearance_g = polyline_clearance(ugv_points(cur), edf);
  rep.final_clearance_a = polyline_clearance(uav_points(cur), edf);
  rep.checks = checks;
  return {cur, rep};
}

}  // namespace marsupial::trajopt
