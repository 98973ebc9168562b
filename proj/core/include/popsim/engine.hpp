#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "popsim/rng.hpp"

namespace popsim {

enum class Role : std::uint8_t { Initiator, Responder };

struct InteractionRecord {
  std::uint64_t step = 0;  // 1-based
  std::uint32_t initiator = 0;
  std::uint32_t responder = 0;
};

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform draw over the n(n-1) ordered pairs of distinct agents.
inline std::pair<std::uint32_t, std::uint32_t> select_pair(std::uint32_t n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("select_pair: population must have at least 2 agents");
  std::uint32_t i = static_cast<std::uint32_t>(rng.below(n));
  std::uint32_t j = static_cast<std::uint32_t>(rng.below(n - 1));
  if (j >= i) ++j;
  return {i, j};
}

inline double parallel_time(std::uint64_t steps, std::uint32_t n) {
  if (n < 1) throw std::invalid_argument("parallel_time: population must be non-empty");
  return static_cast<double>(steps) / static_cast<double>(n);
}

// Everything one agent sees: its input, its state after the input function,
// and the ordered (role, partner message) observations. Together with the
// agent's own random tape this determines every later state of the agent.
template <class P>
struct View {
  struct Obs {
    Role role;
    typename P::Message partner;
  };
  typename P::Input input{};
  typename P::State initial{};
  std::vector<Obs> observations;
};

struct RunOptions {
  bool record_trace = false;
  bool record_views = false;
  // When >= 0 and record_views is set, only this agent's observations are
  // kept; the per-agent inputs and initial states are recorded either way.
  std::int64_t views_only_agent = -1;
  // How often (in steps) the convergence predicate is evaluated; 1 checks
  // after every interaction.
  std::uint64_t check_interval = 1;
};

struct RunStatus {
  std::uint64_t steps = 0;
  bool converged = false;
  std::uint64_t last_effective_step = 0;  // 0 if no state ever changed
};

// Sequential executor for one population under the uniform random scheduler.
//
// A protocol P provides:
//   types   Input, Message, State (with .msg), Output
//   flag    kNeedsPairDraw  -- true if delta consumes the shared per-interaction draw
//   State   init(const Input&, Rng&) const
//   State   apply(Role, const State& own, const Message& partner, Rng& own_rng,
//                 std::uint64_t pair_draw) const
//   std::optional<Output> output(const State&) const
//
// apply sees only the partner's message part, never its hidden part; the
// state/message split is enforced by this signature.
template <class P>
class Population {
 public:
  using State = typename P::State;
  using Input = typename P::Input;
  using Message = typename P::Message;

  Population(P proto, const std::vector<Input>& inputs, std::uint64_t seed, RunOptions opt = {})
      : proto_(std::move(proto)),
        opt_(opt),
        n_(static_cast<std::uint32_t>(inputs.size())),
        scheduler_(derive_stream(seed, "scheduler")),
        interaction_(derive_stream(seed, "interaction")) {
    if (n_ < 2) throw std::invalid_argument("population must have at least 2 agents");
    states_.reserve(n_);
    delta_rngs_.reserve(n_);
    for (std::uint32_t a = 0; a < n_; ++a) {
      Rng input_rng = derive_stream(seed, "input", a);
      states_.push_back(proto_.init(inputs[a], input_rng));
      delta_rngs_.push_back(derive_stream(seed, "delta", a));
    }
    if (opt_.record_views) {
      views_.resize(n_);
      for (std::uint32_t a = 0; a < n_; ++a) {
        views_[a].input = inputs[a];
        views_[a].initial = states_[a];
      }
    }
    interaction_counts_.assign(n_, 0);
  }

  // Executes one interaction; returns the record and whether it changed state.
  std::pair<InteractionRecord, bool> step() {
    auto [i, j] = select_pair(n_, scheduler_);
    ++steps_;
    std::uint64_t pair_draw = 0;
    if constexpr (P::kNeedsPairDraw) pair_draw = interaction_();

    const Message mi = states_[i].msg;
    const Message mj = states_[j].msg;
    State ni = proto_.apply(Role::Initiator, states_[i], mj, delta_rngs_[i], pair_draw);
    State nj = proto_.apply(Role::Responder, states_[j], mi, delta_rngs_[j], pair_draw);
    bool effective = !(ni == states_[i]) || !(nj == states_[j]);
    states_[i] = ni;
    states_[j] = nj;
    if (effective) last_effective_step_ = steps_;

    ++interaction_counts_[i];
    ++interaction_counts_[j];
    InteractionRecord rec{steps_, i, j};
    if (opt_.record_trace) {
      records_.push_back(rec);
      if constexpr (P::kNeedsPairDraw) pair_draws_.push_back(pair_draw);
    }
    if (opt_.record_views) {
      if (opt_.views_only_agent < 0 || opt_.views_only_agent == i)
        views_[i].observations.push_back({Role::Initiator, mj});
      if (opt_.views_only_agent < 0 || opt_.views_only_agent == j)
        views_[j].observations.push_back({Role::Responder, mi});
    }
    return {rec, effective};
  }

  // Runs until the predicate holds or the budget is exhausted. A run that
  // exhausts its budget reports converged=false rather than throwing.
  template <class Done>
  RunStatus run(std::uint64_t budget, Done&& done) {
    std::uint64_t interval = opt_.check_interval ? opt_.check_interval : 1;
    if (done(*this)) return {steps_, true, last_effective_step_};
    while (steps_ < budget) {
      step();
      if (steps_ % interval == 0 && done(*this)) return {steps_, true, last_effective_step_};
    }
    return {steps_, done(*this), last_effective_step_};
  }

  RunStatus run(std::uint64_t budget) {
    return run(budget, [](const Population&) { return false; });
  }

  const P& protocol() const { return proto_; }
  std::uint32_t size() const { return n_; }
  std::uint64_t steps() const { return steps_; }
  std::uint64_t last_effective_step() const { return last_effective_step_; }
  const std::vector<State>& config() const { return states_; }
  const std::vector<InteractionRecord>& records() const { return records_; }
  const std::vector<std::uint64_t>& pair_draws() const { return pair_draws_; }
  const std::vector<View<P>>& views() const { return views_; }
  const std::vector<std::uint64_t>& interaction_counts() const { return interaction_counts_; }

  std::optional<typename P::Output> output(std::uint32_t agent) const {
    return proto_.output(states_.at(agent));
  }

 private:
  P proto_;
  RunOptions opt_;
  std::uint32_t n_;
  Rng scheduler_;
  Rng interaction_;
  std::vector<State> states_;
  std::vector<Rng> delta_rngs_;
  std::vector<InteractionRecord> records_;
  std::vector<std::uint64_t> pair_draws_;
  std::vector<View<P>> views_;
  std::vector<std::uint64_t> interaction_counts_;
  std::uint64_t steps_ = 0;
  std::uint64_t last_effective_step_ = 0;
};

// Replays a view through the transition function. pair_draws must hold the
// shared draw for each of the agent's interactions when the protocol uses
// them (they are part of the interaction, recoverable from the trace).
template <class P>
typename P::State replay_view(const P& proto, const View<P>& view, Rng delta_rng,
                              const std::vector<std::uint64_t>& pair_draws = {}) {
  typename P::State s = view.initial;
  for (std::size_t t = 0; t < view.observations.size(); ++t) {
    std::uint64_t draw = t < pair_draws.size() ? pair_draws[t] : 0;
    s = proto.apply(view.observations[t].role, s, view.observations[t].partner, delta_rng, draw);
  }
  return s;
}

}  // namespace popsim
