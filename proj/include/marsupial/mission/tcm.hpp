#pragma once

#include <cstddef>
#include <string>

namespace marsupial::mission {

enum class TcmPhase { running, waiting, complete, aborted };

std::string to_string(TcmPhase phase);

/// Stop-and-go coordinator state. Reached flags latch until the next waypoint
/// is dispatched.
struct TcmState {
  std::size_t index = 0;  ///< waypoint both platforms are currently sent to
  bool ugv_reached = false;
  bool uav_reached = false;
  TcmPhase phase = TcmPhase::running;
};

struct TcmCommand {
  bool dispatch = false;   ///< a new waypoint was sent to both platforms
  bool ugv_hold = false;   ///< UGV waits at its waypoint for the UAV
  bool uav_hold = false;
};

struct TcmStep {
  TcmState state;
  TcmCommand command;
};

/// Latches the reached flags, then advances to the next waypoint only when
/// both are set. Reaching the last waypoint with both flags completes the
/// mission. complete and aborted are terminal. Throws InvalidArgumentError
/// when n_waypoints is 0 or the index is out of range.
TcmStep tcm_step(TcmState state, bool ugv_reached, bool uav_reached, std::size_t n_waypoints);

}  // namespace marsupial::mission
