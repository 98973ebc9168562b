#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "popsim/engine.hpp"
#include "popsim/label.hpp"
#include "popsim/modular.hpp"
#include "popsim/phase_clock.hpp"
#include "popsim/probe.hpp"
#include "popsim/rng.hpp"

namespace popsim {

// Remainder with hidden inputs. A single token performs masked hand-offs
// around the population, folding one input into the running sum per visit.
// The leader seeds the sum with a mask of its own, so every intermediate
// value any agent ever holds or shows is uniform. A probe riding on a
// leader-driven phase clock detects when no Unvisited agent remains; the
// leader then rejoins as the last receiver, strips its mask, and broadcasts
// the answer through the visible out slot.
class MaskedRemainder {
 public:
  struct Message {
    zk_t mask = kBot;        // refreshable transfer mask
    Label label = Label::Unvisited;
    std::uint8_t leader = 0;
    zk_t out = kBot;         // broadcast slot for the final answer
    std::uint32_t tick = 0;  // phase clock position
    std::uint8_t probe_z = 0;
    std::uint32_t probe_stamp = 0;  // round the probe value belongs to
    bool operator==(const Message&) const = default;
  };
  struct Hidden {
    zk_t secret = kBot;
    zk_t leader_mask = kBot;  // the leader's initial mask, never shown
    bool operator==(const Hidden&) const = default;
  };
  struct State {
    Hidden hidden;
    Message msg;
    bool operator==(const State&) const = default;
  };
  struct Input {
    int value = 0;
    bool leader = false;
  };
  using Output = int;  // the broadcast answer in Z_k
  static constexpr bool kNeedsPairDraw = false;

  MaskedRemainder(int k, int clock_phases = 8) : k_(k), m_(clock_phases) {
    if (k < 2 || k > 64) throw std::invalid_argument("modulus must be in [2, 64]");
    if (m_ < 2) throw std::invalid_argument("phase clock needs at least 2 phases");
  }

  State init(const Input& input, Rng& rng) const {
    if (input.value < 0 || input.value >= k_) throw std::invalid_argument("input outside Z_k");
    State s;
    s.msg.mask = static_cast<zk_t>(rng.zk(k_));
    if (input.leader) {
      s.hidden.leader_mask = static_cast<zk_t>(rng.zk(k_));
      s.hidden.secret = mod_add(static_cast<zk_t>(input.value), s.hidden.leader_mask, k_);
      s.msg.label = Label::Sender;
      s.msg.leader = 1;
      s.msg.probe_z = 1;  // the leader opens round 0 with the probe signal
    } else {
      s.hidden.secret = static_cast<zk_t>(input.value);
      s.msg.label = Label::Unvisited;
    }
    return s;
  }

  State apply(Role role, const State& own, const Message& partner, Rng& rng,
              std::uint64_t) const {
    if (holds_token(own.msg.label) && holds_token(partner.label))
      throw InvariantViolation("duplicate transfer token in population");
    State s = own;
    const bool was_unvisited = own.msg.label == Label::Unvisited;

    if (role == Role::Initiator) {
      if (s.msg.label == Label::Sender && partner.label == Label::Visited) {
        s.msg.mask = static_cast<zk_t>(rng.zk(k_));
      } else if (s.msg.label == Label::Sender && partner.label == Label::Unvisited) {
        s.msg.mask = mod_sub(s.hidden.secret, s.msg.mask, k_);
        s.hidden.secret = kBot;
        s.msg.label = Label::SenderCommitted;
      } else if (s.msg.label == Label::SenderCommitted && partner.label == Label::Receiver) {
        s.msg.mask = kBot;
        s.msg.label = Label::Visited;
      }
    } else {
      if (s.msg.label == Label::Unvisited && partner.label == Label::Sender) {
        zk_t held = is_bot(s.hidden.secret) ? 0 : s.hidden.secret;
        s.hidden.secret = mod_add(held, partner.mask, k_);
        s.msg.label = Label::Receiver;
      } else if (s.msg.label == Label::Receiver && partner.label == Label::SenderCommitted) {
        s.hidden.secret = mod_add(s.hidden.secret, partner.mask, k_);
        s.msg.label = Label::Sender;
        if (s.msg.leader) {
          // Final hand-off: the leader strips its initial mask and publishes.
          s.hidden.secret = mod_sub(s.hidden.secret, s.hidden.leader_mask, k_);
          if (is_bot(s.msg.out)) s.msg.out = s.hidden.secret;
        }
      }
    }

    if (!is_bot(partner.out)) {
      if (is_bot(s.msg.out)) {
        s.msg.out = partner.out;
      } else if (s.msg.out != partner.out) {
        throw InvariantViolation("conflicting broadcast values");
      }
    }

    advance_clock_and_probe(s, partner, was_unvisited, role);
    return s;
  }

  std::optional<Output> output(const State& s) const {
    if (is_bot(s.msg.out)) return std::nullopt;
    return static_cast<int>(s.msg.out);
  }

  int modulus() const { return k_; }
  int clock_phases() const { return m_; }

 private:
  void advance_clock_and_probe(State& s, const Message& partner, bool was_unvisited,
                               Role role) const {
    if (s.msg.leader) {
      ClockUpdate u = clock_advance(true, role, s.msg.tick, partner.tick, m_);
      if (u.round_boundary) {
        std::uint32_t ended = clock_round(s.msg.tick, m_);
        std::uint8_t z_end = s.msg.probe_stamp == ended ? s.msg.probe_z : 0;
        if (classify_probe(z_end) == ProbeOutcome::NoneSatisfies &&
            s.msg.label == Label::Visited && is_bot(s.hidden.secret) && is_bot(s.msg.mask)) {
          s.msg.label = Label::Unvisited;  // everyone is folded in; rejoin last
        }
        s.msg.tick = u.tick;
        s.msg.probe_z = 1;  // open the next round's probe
        s.msg.probe_stamp = clock_round(u.tick, m_);
        return;  // the reset replaces this round's responder move
      }
      s.msg.tick = u.tick;
    } else {
      s.msg.tick = clock_advance(false, role, s.msg.tick, partner.tick, m_).tick;
    }

    if (role == Role::Responder) {
      std::uint32_t here = clock_round(s.msg.tick, m_);
      std::uint8_t x = partner.probe_stamp == here ? partner.probe_z : 0;
      std::uint8_t y = s.msg.probe_stamp == here ? s.msg.probe_z : 0;
      s.msg.probe_z = probe_advance(x, y, was_unvisited);
      s.msg.probe_stamp = here;
    }
  }

  int k_;
  int m_;
};

// Sum of all held secrets plus the in-flight masked value, mod k. Constant
// over a run (at the leader's initial mask plus the input total) until the
// leader strips that mask at the final hand-off.
inline zk_t masked_remainder_ledger(const std::vector<MaskedRemainder::State>& config, int k) {
  int acc = 0;
  for (const auto& s : config) {
    if (!is_bot(s.hidden.secret)) acc += s.hidden.secret;
    if (s.msg.label == Label::SenderCommitted && !is_bot(s.msg.mask)) acc += s.msg.mask;
  }
  return static_cast<zk_t>(acc % k);
}

}  // namespace popsim
