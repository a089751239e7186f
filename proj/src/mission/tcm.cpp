#include "marsupial/mission/tcm.hpp"

#include "marsupial/common/error.hpp"

namespace marsupial::mission {

std::string to_string(TcmPhase phase) {
  switch (phase) {
    case TcmPhase::running: return "running";
    case TcmPhase::waiting: return "waiting";
    case TcmPhase::complete: return "complete";
    case TcmPhase::aborted: return "aborted";
  }
  return "unknown";
}

TcmStep tcm_step(TcmState state, bool ugv_reached, bool uav_reached, std::size_t n_waypoints) {
  if (n_waypoints == 0) throw InvalidArgumentError("coordinator needs at least one waypoint");
  if (state.index >= n_waypoints) throw InvalidArgumentError("waypoint index out of range");
  TcmStep out{state, {}};
  if (state.phase == TcmPhase::complete || state.phase == TcmPhase::aborted) return out;

  auto& s = out.state;
  s.ugv_reached = s.ugv_reached || ugv_reached;
  s.uav_reached = s.uav_reached || uav_reached;
  if (s.ugv_reached && s.uav_reached) {
    if (s.index + 1 == n_waypoints) {
      s.phase = TcmPhase::complete;
      return out;
    }
    ++s.index;
    s.ugv_reached = s.uav_reached = false;
    s.phase = TcmPhase::running;
    out.command.dispatch = true;
    return out;
  }
  s.phase = (s.ugv_reached || s.uav_reached) ? TcmPhase::waiting : TcmPhase::running;
  out.command.ugv_hold = s.ugv_reached;
  out.command.uav_hold = s.uav_reached;
  return out;
}

}  // namespace marsupial::mission
