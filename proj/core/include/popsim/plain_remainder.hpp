#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>

#include "popsim/engine.hpp"
#include "popsim/modular.hpp"
#include "popsim/rng.hpp"

namespace popsim {

// Remainder protocol with a fully visible state: agents shuttle value units
// around while flags are up, then consolidate and decide. The entire state
// is the message, so every interaction shows an agent's current value to its
// partner.
class PlainRemainder {
 public:
  // value >= 0 is an element of Z_k; decided agents carry a verdict marker.
  static constexpr zk_t kDecidedFalse = -1;
  static constexpr zk_t kDecidedTrue = -2;

  struct Message {
    zk_t value = 0;
    std::uint8_t flag = 1;
    bool operator==(const Message&) const = default;
  };
  struct State {
    Message msg;
    bool operator==(const State&) const = default;
  };
  using Input = int;
  using Output = bool;
  static constexpr bool kNeedsPairDraw = true;

  enum class Rule : std::uint8_t {
    kNone,
    kUnitTransfer,  // both flags up: move one unit between the values
    kFlagOff,       // initiator lowers its flag
    kFlagOn,        // flag-0 initiator re-arms on meeting a raised flag
    kMerge,         // both flags down: responder's value folds into initiator
    kMarkZero,      // spent (0,0) responder decides False
    kReset,         // decided initiator rejoins as (0,0) on meeting a raised flag
    kDecideTrue,    // holder of the target value corrects responder to True
    kDecideFalse,   // holder of a non-target value corrects responder to False
  };

  PlainRemainder(int k, int r, double unit_transfer_prob = 0.5)
      : k_(k), r_(static_cast<zk_t>(r)), p_(unit_transfer_prob) {
    if (k < 2 || k > 64) throw std::invalid_argument("modulus must be in [2, 64]");
    if (r < 0 || r >= k) throw std::invalid_argument("target remainder must be in [0, k)");
    if (p_ < 0.0 || p_ > 1.0) throw std::invalid_argument("rule probability must be in [0, 1]");
  }

  State init(const Input& input, Rng&) const {
    if (input < 0 || input >= k_) throw std::invalid_argument("input outside Z_k");
    return State{Message{static_cast<zk_t>(input), 1}};
  }

  State apply(Role role, const State& own, const Message& partner, Rng&,
              std::uint64_t pair_draw) const {
    Message a = role == Role::Initiator ? own.msg : partner;
    Message b = role == Role::Initiator ? partner : own.msg;
    auto [na, nb] = transition(a, b, pair_draw);
    return State{role == Role::Initiator ? na : nb};
  }

  std::optional<Output> output(const State& s) const {
    if (s.msg.value == kDecidedTrue) return true;
    if (s.msg.value == kDecidedFalse) return false;
    return std::nullopt;
  }

  // Joint transition on an ordered message pair; both agents of an
  // interaction evaluate this identically.
  std::pair<Message, Message> transition(const Message& a, const Message& b,
                                         std::uint64_t pair_draw) const {
    Rule rule = select_rule(a, b, pair_draw);
    return apply_rule(rule, a, b);
  }

  // First rule (in listed order) whose application changes the pair; the
  // overlap between unit transfer and flag lowering is decided by a coin
  // with configurable weight, since both are always available to a pair of
  // raised flags.
  Rule select_rule(const Message& a, const Message& b, std::uint64_t pair_draw) const {
    static constexpr Rule kOrder[] = {
        Rule::kUnitTransfer, Rule::kFlagOff,  Rule::kFlagOn,     Rule::kMerge,
        Rule::kMarkZero,     Rule::kReset,    Rule::kDecideTrue, Rule::kDecideFalse,
    };
    for (Rule rule : kOrder) {
      if (!applicable(rule, a, b)) continue;
      if (rule == Rule::kUnitTransfer && applicable(Rule::kFlagOff, a, b)) {
        double u = static_cast<double>(pair_draw >> 11) * 0x1.0p-53;
        return u < p_ ? Rule::kUnitTransfer : Rule::kFlagOff;
      }
      return rule;
    }
    return Rule::kNone;
  }

  bool applicable(Rule rule, const Message& a, const Message& b) const {
    if (!matches(rule, a, b)) return false;
    auto [na, nb] = apply_rule(rule, a, b);
    return !(na == a && nb == b);
  }

  int modulus() const { return k_; }
  zk_t target() const { return r_; }

 private:
  static bool numeric(const Message& m) { return m.value >= 0; }
  static bool decided(const Message& m) { return m.value < 0; }

  bool matches(Rule rule, const Message& a, const Message& b) const {
    switch (rule) {
      case Rule::kNone:
        return true;
      case Rule::kUnitTransfer:
        return numeric(a) && numeric(b) && a.flag == 1 && b.flag == 1;
      case Rule::kFlagOff:
        return a.flag == 1;
      case Rule::kFlagOn:
        return a.flag == 0 && b.flag == 1;
      case Rule::kMerge:
        return numeric(a) && numeric(b) && a.flag == 0 && b.flag == 0;
      case Rule::kMarkZero:
        return numeric(a) && a.flag == 0 && b.value == 0 && b.flag == 0;
      case Rule::kReset:
        return decided(a) && b.flag == 1;
      case Rule::kDecideTrue:
        return a.value == r_ && a.flag == 0 && decided(b) && b.flag == 0;
      case Rule::kDecideFalse:
        return numeric(a) && a.value != r_ && a.flag == 0 && decided(b) && b.flag == 0;
    }
    return false;
  }

  std::pair<Message, Message> apply_rule(Rule rule, Message a, Message b) const {
    switch (rule) {
      case Rule::kNone:
        break;
      case Rule::kUnitTransfer:
        a.value = mod_add(a.value, 1, k_);
        b.value = mod_sub(b.value, 1, k_);
        break;
      case Rule::kFlagOff:
        a.flag = 0;
        break;
      case Rule::kFlagOn:
        a.flag = 1;
        break;
      case Rule::kMerge:
        a.value = mod_add(a.value, b.value, k_);
        b.value = 0;
        break;
      case Rule::kMarkZero:
        b.value = kDecidedFalse;
        break;
      case Rule::kReset:
        a = Message{0, 0};
        break;
      case Rule::kDecideTrue:
        b.value = kDecidedTrue;
        break;
      case Rule::kDecideFalse:
        b.value = kDecidedFalse;
        break;
    }
    return {a, b};
  }

  int k_;
  zk_t r_;
  double p_;
};

// Population verdict once all but one agent are decided and agree; nullopt
// otherwise.
template <class Config>
std::optional<bool> plain_remainder_verdict(const Config& config) {
  std::size_t decided = 0;
  int verdict = -1;
  for (const auto& s : config) {
    if (s.msg.value >= 0) continue;
    int v = s.msg.value == PlainRemainder::kDecidedTrue ? 1 : 0;
    if (verdict == -1) verdict = v;
    if (verdict != v) return std::nullopt;
    ++decided;
  }
  if (decided + 1 != config.size() || verdict == -1) return std::nullopt;
  return verdict == 1;
}

}  // namespace popsim
