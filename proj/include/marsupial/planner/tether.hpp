#pragma once

#include <vector>

#include "marsupial/common/types.hpp"
#include "marsupial/world/edf.hpp"
#include "marsupial/world/traversability.hpp"

namespace marsupial::planner {

/// Joint configuration of the marsupial pair: UGV tether anchor and UAV position.
struct JointState {
  Vec3 p_g = Vec3::Zero();
  Vec3 p_a = Vec3::Zero();

  /// Straight (taut) tether length.
  double tether_length() const { return (p_a - p_g).norm(); }
  bool operator==(const JointState& o) const { return p_g == o.p_g && p_a == o.p_a; }
};

struct TetherCheck {
  bool feasible = false;
  double length = 0.0;
};

/// A taut tether is feasible when it is no longer than l_max and the segment
/// p_g -> p_a has line of sight at `clearance`. Throws OutOfBoundsError when
/// either position is outside the EDF.
TetherCheck check_tether_feasibility(const JointState& state, const world::VoxelEDF& edf,
                                     double l_max, double clearance);

/// Read-only planning world: the EDF for the UAV and tether, the traversable
/// ground for the UGV, and the safe-air nodes (EDF > clearance_air) that UAV
/// samples are drawn from. Borrows `edf` and `ground`, which must outlive it.
class Environment {
 public:
  Environment(const world::VoxelEDF& edf, const world::TraversableSet& ground,
              double clearance_air);

  const world::VoxelEDF& edf() const { return *edf_; }
  const world::TraversableSet& ground() const { return *ground_; }
  double clearance_air() const { return clearance_air_; }
  const std::vector<Vec3>& safe_air() const { return safe_air_; }

  /// EDF strictly above clearance_air (false outside the grid).
  bool air_free(const Vec3& p) const;

 private:
  const world::VoxelEDF* edf_;
  const world::TraversableSet* ground_;
  double clearance_air_;
  std::vector<Vec3> safe_air_;
};

}  // namespace marsupial::planner
