#pragma once

#include <algorithm>
#include <cstdint>

namespace popsim {

// Existence probe over z in {0,1,2}: a 1-signal spreads from the leader; an
// agent satisfying the probed predicate bumps a positive signal to 2, which
// spreads back. Only the responder moves.
inline std::uint8_t probe_advance(std::uint8_t initiator_z, std::uint8_t responder_z,
                                  bool responder_satisfies) {
  if (!responder_satisfies) return std::max(initiator_z, responder_z);
  if (initiator_z == 0) return responder_z;
  return 2;
}

enum class ProbeOutcome : std::uint8_t {
  NoneSatisfies,  // leader ended the round at 1: signal returned clean
  SomeSatisfies,  // leader ended the round at 2
  Inconclusive,   // leader still at 0: the signal never came back
};

inline ProbeOutcome classify_probe(std::uint8_t leader_z) {
  switch (leader_z) {
    case 1: return ProbeOutcome::NoneSatisfies;
    case 2: return ProbeOutcome::SomeSatisfies;
    default: return ProbeOutcome::Inconclusive;
  }
}

}  // namespace popsim
