#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "popsim/engine.hpp"
#include "popsim/label.hpp"
#include "popsim/modular.hpp"
#include "popsim/rng.hpp"

namespace popsim {

// One-shot masked hand-off of a hidden value from the Sender to some
// Unvisited agent. The sender keeps refreshing its visible mask until it
// meets an eligible agent, hands over the fresh mask, then delivers the
// value offset by that mask; the receiver recombines the two locally.
// Every value the sender ever shows is uniform on Z_k.
class SecureTransfer {
 public:
  struct Message {
    zk_t mask = kBot;
    Label label = Label::Visited;
    bool operator==(const Message&) const = default;
  };
  struct State {
    zk_t secret = kBot;
    Message msg;
    bool operator==(const State&) const = default;
  };
  struct Input {
    zk_t secret = kBot;
    Label label = Label::Visited;
  };
  using Output = int;
  static constexpr bool kNeedsPairDraw = false;

  explicit SecureTransfer(int k) : k_(k) {
    if (k < 2 || k > 64) throw std::invalid_argument("modulus must be in [2, 64]");
  }

  State init(const Input& input, Rng& rng) const {
    State s;
    s.secret = input.secret;
    s.msg.label = input.label;
    if (input.label == Label::Sender) {
      if (is_bot(input.secret)) throw std::invalid_argument("sender needs a secret");
      s.msg.mask = static_cast<zk_t>(rng.zk(k_));
    }
    return s;
  }

  State apply(Role role, const State& own, const Message& partner, Rng& rng,
              std::uint64_t) const {
    State s = own;
    if (role == Role::Initiator) {
      if (s.msg.label == Label::Sender && partner.label == Label::Visited) {
        s.msg.mask = static_cast<zk_t>(rng.zk(k_));
      } else if (s.msg.label == Label::Sender && partner.label == Label::Unvisited) {
        s.msg.mask = mod_sub(s.secret, s.msg.mask, k_);
        s.secret = kBot;
        s.msg.label = Label::SenderCommitted;
      } else if (s.msg.label == Label::SenderCommitted && partner.label == Label::Receiver) {
        s.msg.mask = kBot;
        s.msg.label = Label::Visited;
      }
    } else {
      if (s.msg.label == Label::Unvisited && partner.label == Label::Sender) {
        s.secret = partner.mask;
        s.msg.label = Label::Receiver;
      } else if (s.msg.label == Label::Receiver && partner.label == Label::SenderCommitted) {
        s.secret = mod_add(s.secret, partner.mask, k_);
        s.msg.label = Label::Sender;
      }
    }
    return s;
  }

  std::optional<Output> output(const State& s) const {
    if (is_bot(s.secret)) return std::nullopt;
    return static_cast<int>(s.secret);
  }

  int modulus() const { return k_; }

 private:
  int k_;
};

}  // namespace popsim
