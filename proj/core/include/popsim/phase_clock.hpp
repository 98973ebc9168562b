#pragma once

#include <cstdint>

#include "popsim/engine.hpp"

namespace popsim {

// Leader-driven phase clock. The tick counts phase advances since the start;
// phase = tick mod m, round = tick / m. A non-leader responder adopts the
// larger tick, the leader advances its own tick when it meets an agent that
// has caught up to it, and a round boundary is the leader's wrap from phase
// m-1 to 0. Adoption is one-way (responder only), which stretches a round to
// roughly 8 n ln n interactions at m=8 - enough for a probe's two epidemic
// sweeps to finish inside a single round.
struct ClockUpdate {
  std::uint32_t tick = 0;
  bool round_boundary = false;
};

inline std::uint32_t clock_phase(std::uint32_t tick, int m) {
  return tick % static_cast<std::uint32_t>(m);
}

inline std::uint32_t clock_round(std::uint32_t tick, int m) {
  return tick / static_cast<std::uint32_t>(m);
}

inline ClockUpdate clock_advance(bool is_leader, Role role, std::uint32_t own_tick,
                                 std::uint32_t partner_tick, int m) {
  ClockUpdate u{own_tick, false};
  if (is_leader) {
    if (partner_tick == own_tick) {
      u.tick = own_tick + 1;
      u.round_boundary = clock_phase(u.tick, m) == 0;
    }
  } else if (role == Role::Responder) {
    if (partner_tick > own_tick) u.tick = partner_tick;
  }
  return u;
}

}  // namespace popsim
