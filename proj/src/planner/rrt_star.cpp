#include "marsupial/planner/rrt_star.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "marsupial/world/los.hpp"

namespace marsupial::planner {

void PlannerParams::validate() const {
  if (!(l_max > 0.0)) throw InvalidArgumentError("l_max must be > 0");
  if (!(clearance_air >= 0.0) || !(clearance_tether >= 0.0)) {
    throw InvalidArgumentError("clearances must be >= 0");
  }
  if (!(step_g > 0.0) || !(step_a > 0.0)) throw InvalidArgumentError("steering steps must be > 0");
  if (!(goal_tolerance > 0.0)) throw InvalidArgumentError("goal tolerance must be > 0");
  if (max_iterations < 0) throw InvalidArgumentError("max iterations must be >= 0");
  if (!(rewire_gamma >= 0.0)) throw InvalidArgumentError("rewire gamma must be >= 0");
  if (!(w_g >= 0.0) || !(w_a >= 0.0) || (w_g == 0.0 && w_a == 0.0)) {
    throw InvalidArgumentError("cost weights must be >= 0 and not both 0");
  }
  if (!(p_goal >= 0.0 && p_goal <= 1.0)) throw InvalidArgumentError("p_goal must be in [0, 1]");
}

double PlannerParams::edge_step() const { return std::min(step_g, step_a) / 4.0; }

double joint_distance(const JointState& a, const JointState& b, double w_g, double w_a) {
  return std::sqrt(w_g * (a.p_g - b.p_g).squaredNorm() + w_a * (a.p_a - b.p_a).squaredNorm());
}

double edge_cost(const JointState& a, const JointState& b, double w_g, double w_a) {
  return w_g * (a.p_g - b.p_g).norm() + w_a * (a.p_a - b.p_a).norm();
}

double path_cost(const std::vector<JointState>& states, double w_g, double w_a) {
  double c = 0.0;
  for (std::size_t i = 1; i < states.size(); ++i) c += edge_cost(states[i - 1], states[i], w_g, w_a);
  return c;
}

namespace {

Vec3 step_toward(const Vec3& from, const Vec3& to, double step) {
  const Vec3 d = to - from;
  const double n = d.norm();
  if (n <= step) return to;
  return from + d * (step / n);
}

}  // namespace

JointState steer(const JointState& from, const JointState& to, double step_g, double step_a,
                 const world::TraversableSet& ground) {
  JointState out;
  out.p_a = step_toward(from.p_a, to.p_a, step_a);
  const int m = ground.nearest_member(step_toward(from.p_g, to.p_g, step_g));
  if (m < 0) throw EmptyInputError("traversable set is empty");
  out.p_g = ground.center(static_cast<std::size_t>(m));
  return out;
}

JointState sample_state(const Environment& env, const Vec3& goal_uav, double p_goal,
                        std::mt19937_64& rng) {
  if (env.ground().empty()) throw EmptyInputError("no traversable cells to sample");
  if (env.safe_air().empty()) throw EmptyInputError("no safe-air nodes to sample");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> cell(0, env.ground().size() - 1);
  std::uniform_int_distribution<std::size_t> air(0, env.safe_air().size() - 1);
  const bool to_goal = coin(rng) < p_goal;
  JointState s;
  s.p_g = env.ground().center(cell(rng));
  s.p_a = to_goal ? goal_uav : env.safe_air()[air(rng)];
  return s;
}

bool edge_feasible(const Environment& env, const JointState& a, const JointState& b,
                   const PlannerParams& params) {
  const auto& edf = env.edf();
  if (!edf.contains(a.p_a) || !edf.contains(b.p_a)) return false;
  if (!world::check_los(edf, a.p_a, b.p_a, params.clearance_air)) return false;

  const auto& ground = env.ground();
  const Vec3 dg = b.p_g - a.p_g;
  const double hg = std::min(params.edge_step(), ground.params().cell_size / 2.0);
  const int ng = static_cast<int>(std::ceil(dg.norm() / hg));
  int prev = ground.member_containing(a.p_g);
  if (prev < 0) return false;
  for (int k = 1; k <= ng; ++k) {
    const int m = ground.member_containing(a.p_g + dg * (static_cast<double>(k) / ng));
    if (m < 0) return false;
    if (m != prev && !ground.are_neighbors(static_cast<std::size_t>(prev),
                                           static_cast<std::size_t>(m))) {
      return false;
    }
    prev = m;
  }

  const Vec3 da = b.p_a - a.p_a;
  const double span = std::max(dg.norm(), da.norm());
  const int n = std::max(1, static_cast<int>(std::ceil(span / params.edge_step())));
  for (int k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    const JointState s{a.p_g + dg * t, a.p_a + da * t};
    if (!edf.contains(s.p_g) || !edf.contains(s.p_a)) return false;
    if (!check_tether_feasibility(s, edf, params.l_max, params.clearance_tether).feasible) {
      return false;
    }
  }
  return true;
}

namespace {

// Buckets tree nodes by one platform's position (the UAV unless its weight is
// zero). A node whose bucketed component is farther than r / sqrt(w) from the
// query cannot be within joint distance r, so cube scans give exact answers.
class NodeIndex {
 public:
  NodeIndex(bool on_uav, double weight, double cell)
      : on_uav_(on_uav), scale_(std::sqrt(weight)), cell_(cell) {}

  void insert(int id, const JointState& x) {
    const auto c = cell_of(key_point(x));
    if (buckets_.empty()) {
      lo_ = hi_ = c;
    } else {
      lo_ = lo_.cwiseMin(c);
      hi_ = hi_.cwiseMax(c);
    }
    buckets_[pack(c)].push_back(id);
  }

  // Calls f(id) for every node whose component lies in the cube of half-size
  // `half` around q, visiting cells in a fixed order.
  template <class F>
  void for_cube(const Vec3& q, double half, F&& f) const {
    const Eigen::Vector3i a = cell_of(q - Vec3::Constant(half)).cwiseMax(lo_);
    const Eigen::Vector3i b = cell_of(q + Vec3::Constant(half)).cwiseMin(hi_);
    for (int z = a.z(); z <= b.z(); ++z) {
      for (int y = a.y(); y <= b.y(); ++y) {
        for (int x = a.x(); x <= b.x(); ++x) {
          const auto it = buckets_.find(pack(Eigen::Vector3i(x, y, z)));
          if (it == buckets_.end()) continue;
          for (int id : it->second) f(id);
        }
      }
    }
  }

  int nearest(const JointState& q, const std::vector<JointState>& xs, double w_g,
              double w_a) const {
    const Vec3 k = key_point(q);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (double half = cell_;; half *= 2.0) {
      for_cube(k, half, [&](int id) {
        const double d = joint_distance(q, xs[static_cast<std::size_t>(id)], w_g, w_a);
        if (d < best_d || (d == best_d && id < best)) {
          best_d = d;
          best = id;
        }
      });
      if (best >= 0 && best_d <= scale_ * half) return best;
      if (covers_all(k, half)) return best;
    }
  }

  std::vector<int> within(const JointState& q, double radius, const std::vector<JointState>& xs,
                          double w_g, double w_a) const {
    std::vector<int> out;
    for_cube(key_point(q), radius / scale_, [&](int id) {
      if (joint_distance(q, xs[static_cast<std::size_t>(id)], w_g, w_a) <= radius) {
        out.push_back(id);
      }
    });
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  Vec3 key_point(const JointState& x) const { return on_uav_ ? x.p_a : x.p_g; }

  Eigen::Vector3i cell_of(const Vec3& p) const {
    return (p / cell_).array().floor().cast<int>();
  }

  static std::int64_t pack(const Eigen::Vector3i& c) {
    constexpr std::int64_t kOff = 1 << 20;
    return ((c.x() + kOff) << 42) | ((c.y() + kOff) << 21) | (c.z() + kOff);
  }

  bool covers_all(const Vec3& q, double half) const {
    const Eigen::Vector3i a = cell_of(q - Vec3::Constant(half));
    const Eigen::Vector3i b = cell_of(q + Vec3::Constant(half));
    return (a.array() <= lo_.array()).all() && (b.array() >= hi_.array()).all();
  }

  bool on_uav_;
  double scale_;
  double cell_;
  Eigen::Vector3i lo_ = Eigen::Vector3i::Zero(), hi_ = Eigen::Vector3i::Zero();
  std::unordered_map<std::int64_t, std::vector<int>> buckets_;
};

struct Tree {
  std::vector<JointState> x;
  std::vector<int> parent;
  std::vector<double> cost;
  std::vector<std::vector<int>> children;

  int add(const JointState& s, int p, double c) {
    x.push_back(s);
    parent.push_back(p);
    cost.push_back(c);
    children.emplace_back();
    if (p >= 0) children[static_cast<std::size_t>(p)].push_back(static_cast<int>(x.size()) - 1);
    return static_cast<int>(x.size()) - 1;
  }

  // Recomputes cost-to-come below `root` after its cost dropped.
  void propagate(int root, double w_g, double w_a) {
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const auto u = static_cast<std::size_t>(stack.back());
      stack.pop_back();
      for (int c : children[u]) {
        const auto ci = static_cast<std::size_t>(c);
        const double updated = cost[u] + edge_cost(x[u], x[ci], w_g, w_a);
        if (updated > cost[ci]) throw std::logic_error("rewire increased a descendant's cost");
        cost[ci] = updated;
        stack.push_back(c);
      }
    }
  }

  void reparent(int node, int new_parent, double new_cost) {
    const auto n = static_cast<std::size_t>(node);
    auto& siblings = children[static_cast<std::size_t>(parent[n])];
    siblings.erase(std::find(siblings.begin(), siblings.end(), node));
    parent[n] = new_parent;
    cost[n] = new_cost;
    children[static_cast<std::size_t>(new_parent)].push_back(node);
  }
};

void validate_query(const Environment& env, const JointState& start, const Vec3& goal_uav,
                    const PlannerParams& params) {
  const auto& ground = env.ground();
  const int m = ground.member_containing(start.p_g);
  if (m < 0 || (ground.center(static_cast<std::size_t>(m)) - start.p_g).norm() > 1e-9) {
    throw InfeasibleQueryError("start UGV position is not a traversable cell center");
  }
  if (!env.air_free(start.p_a)) {
    throw InfeasibleQueryError("start UAV position fails the air clearance check");
  }
  if (!check_tether_feasibility(start, env.edf(), params.l_max, params.clearance_tether)
           .feasible) {
    throw InfeasibleQueryError("start state fails the tether feasibility check");
  }
  if (!env.edf().contains(goal_uav)) {
    throw InfeasibleQueryError("goal UAV position is outside the map");
  }
  if (!env.air_free(goal_uav)) {
    throw InfeasibleQueryError(
        fmt::format("goal UAV position fails the air clearance check (EDF {:.3f} m <= {:.3f} m)",
                    env.edf().query(goal_uav).distance, env.clearance_air()));
  }
}

JointPath extract(const Tree& tree, int goal) {
  JointPath p;
  for (int n = goal; n >= 0; n = tree.parent[static_cast<std::size_t>(n)]) {
    p.states.push_back(tree.x[static_cast<std::size_t>(n)]);
    p.tree_nodes.push_back(n);
  }
  std::reverse(p.states.begin(), p.states.end());
  std::reverse(p.tree_nodes.begin(), p.tree_nodes.end());
  p.cost = tree.cost[static_cast<std::size_t>(goal)];
  return p;
}

}  // namespace

PlanResult plan_rrt_star(const Environment& env, const JointState& start, const Vec3& goal_uav,
                         const PlannerParams& params) {
  params.validate();
  if (std::abs(params.clearance_air - env.clearance_air()) > 1e-12) {
    throw InvalidArgumentError("environment and planner disagree on clearance_air");
  }
  validate_query(env, start, goal_uav, params);

  const double wg = params.w_g, wa = params.w_a;
  Tree tree;
  tree.add(start, -1, 0.0);
  std::vector<int> goal_nodes;
  const auto reaches_goal = [&](const JointState& s) {
    return (s.p_a - goal_uav).norm() <= params.goal_tolerance;
  };
  if (reaches_goal(start)) goal_nodes.push_back(0);

  const bool on_uav = wa > 0.0;
  NodeIndex index(on_uav, on_uav ? wa : wg, std::max(params.step_g, params.step_a));
  index.insert(0, start);

  PlanResult result;
  auto best_goal = [&]() {
    int best = -1;
    for (int g : goal_nodes) {
      if (best < 0 || tree.cost[static_cast<std::size_t>(g)] < tree.cost[static_cast<std::size_t>(best)]) {
        best = g;
      }
    }
    return best;
  };
  std::vector<int> checkpoints = params.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  std::size_t next_cp = 0;
  auto record = [&](int it) {
    while (next_cp < checkpoints.size() && checkpoints[next_cp] <= it) {
      Checkpoint cp;
      cp.iteration = checkpoints[next_cp];
      const int b = best_goal();
      if (b >= 0) cp.best_cost = tree.cost[static_cast<std::size_t>(b)];
      result.checkpoints.push_back(cp);
      ++next_cp;
    }
  };

  // Trivial query: no tree growth is needed, the start is already a goal.
  if (!goal_nodes.empty()) {
    result.found = true;
    result.path = extract(tree, 0);
    result.tree_size = 1;
    record(std::numeric_limits<int>::max());
    return result;
  }

  std::mt19937_64 rng(params.seed);
  // The UGV may land up to half a cell diagonal past its step when snapped.
  const double reach_g = params.step_g + env.ground().params().cell_size * std::sqrt(0.5);
  const double eta = std::sqrt(wg * params.step_g * params.step_g +
                               wa * params.step_a * params.step_a);
  for (int it = 1; it <= params.max_iterations; ++it) {
    result.iterations = it;
    const JointState rand = sample_state(env, goal_uav, params.p_goal, rng);
    const int nearest = index.nearest(rand, tree.x, wg, wa);
    const JointState xn = steer(tree.x[static_cast<std::size_t>(nearest)], rand, params.step_g,
                                params.step_a, env.ground());
    if (joint_distance(xn, tree.x[static_cast<std::size_t>(nearest)], wg, wa) < 1e-9 ||
        !env.air_free(xn.p_a) || !env.edf().contains(xn.p_g) ||
        !check_tether_feasibility(xn, env.edf(), params.l_max, params.clearance_tether).feasible) {
      record(it);
      continue;
    }

    const double n = static_cast<double>(tree.x.size() + 1);
    const double radius = std::min(params.rewire_gamma * std::pow(std::log(n) / n, 1.0 / 6.0), eta);
    std::vector<int> near = index.within(xn, radius, tree.x, wg, wa);
    if (std::find(near.begin(), near.end(), nearest) == near.end()) near.push_back(nearest);
    // Edges never exceed the steering reach of either platform.
    std::erase_if(near, [&](int id) {
      const auto& x = tree.x[static_cast<std::size_t>(id)];
      return (x.p_a - xn.p_a).norm() > params.step_a + 1e-12 ||
             (x.p_g - xn.p_g).norm() > reach_g + 1e-12;
    });

    // Cheapest feasible parent; ties go to the lowest node index.
    std::vector<std::pair<double, int>> cand;
    cand.reserve(near.size());
    for (int id : near) {
      const auto i = static_cast<std::size_t>(id);
      cand.emplace_back(tree.cost[i] + edge_cost(tree.x[i], xn, wg, wa), id);
    }
    std::sort(cand.begin(), cand.end());
    int parent = -1;
    double cost = 0.0;
    for (const auto& [c, id] : cand) {
      if (edge_feasible(env, tree.x[static_cast<std::size_t>(id)], xn, params)) {
        parent = id;
        cost = c;
        break;
      }
    }
    if (parent < 0) {
      record(it);
      continue;
    }
    const int id_new = tree.add(xn, parent, cost);
    index.insert(id_new, xn);
    if (reaches_goal(xn)) goal_nodes.push_back(id_new);

    for (int id : near) {
      if (id == parent) continue;
      const auto i = static_cast<std::size_t>(id);
      const double via = cost + edge_cost(xn, tree.x[i], wg, wa);
      if (!(via < tree.cost[i])) continue;
      if (!edge_feasible(env, xn, tree.x[i], params)) continue;
      if (via > tree.cost[i]) throw std::logic_error("rewire would increase cost-to-come");
      tree.reparent(id, id_new, via);
      tree.propagate(id, wg, wa);
      ++result.rewires;
    }
    record(it);
  }
  record(params.max_iterations);

  result.tree_size = tree.x.size();
  const int best = best_goal();
  if (best < 0) {
    result.message = fmt::format("no path found within {} iterations (tree size {})",
                                 params.max_iterations, tree.x.size());
    return result;
  }
  result.found = true;
  result.path = extract(tree, best);
  return result;
}

}  // namespace marsupial::planner
