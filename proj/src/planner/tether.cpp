#include "marsupial/planner/tether.hpp"

#include <fmt/format.h>

#include "marsupial/common/error.hpp"
#include "marsupial/world/los.hpp"

namespace marsupial::planner {

TetherCheck check_tether_feasibility(const JointState& state, const world::VoxelEDF& edf,
                                     double l_max, double clearance) {
  if (!edf.contains(state.p_g) || !edf.contains(state.p_a)) {
    throw OutOfBoundsError(fmt::format("tether endpoint outside the grid: ({}, {}, {}) -> ({}, {}, {})",
                                       state.p_g.x(), state.p_g.y(), state.p_g.z(), state.p_a.x(),
                                       state.p_a.y(), state.p_a.z()));
  }
  TetherCheck out;
  out.length = state.tether_length();
  out.feasible = out.length <= l_max && world::check_los(edf, state.p_g, state.p_a, clearance);
  return out;
}

Environment::Environment(const world::VoxelEDF& edf, const world::TraversableSet& ground,
                         double clearance_air)
    : edf_(&edf),
      ground_(&ground),
      clearance_air_(clearance_air),
      safe_air_(world::sample_safe_air(edf, clearance_air)) {
  if (!(clearance_air >= 0.0)) throw InvalidArgumentError("clearance_air must be >= 0");
}

bool Environment::air_free(const Vec3& p) const {
  const auto d = edf_->try_distance(p);
  return d && *d > clearance_air_;
}

}  // namespace marsupial::planner
