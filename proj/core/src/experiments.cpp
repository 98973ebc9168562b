#include "popsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "popsim/masked_remainder.hpp"
#include "popsim/parallel.hpp"
#include "popsim/phase_clock.hpp"
#include "popsim/plain_remainder.hpp"
#include "popsim/probe.hpp"
#include "popsim/remainder_oracle.hpp"
#include "popsim/secure_transfer.hpp"

namespace popsim {

std::uint64_t default_budget(std::uint32_t n) {
  double b = 20.0 * std::pow(static_cast<double>(n), 3.0) * std::log(static_cast<double>(n));
  return static_cast<std::uint64_t>(b);
}

namespace {

std::vector<int> resolve_inputs(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.inputs.empty()) {
    if (cfg.inputs.size() != cfg.n)
      throw std::invalid_argument("inputs list must match the population size");
    return cfg.inputs;
  }
  Rng rng = derive_stream(seed, "experiment-inputs");
  std::vector<int> inputs(cfg.n);
  for (auto& v : inputs) v = rng.zk(cfg.k);
  return inputs;
}

std::uint32_t resolve_leader(const ExperimentConfig& cfg) {
  if (cfg.leader >= 0) {
    if (cfg.leader >= static_cast<std::int64_t>(cfg.n))
      throw std::invalid_argument("leader index out of range");
    return static_cast<std::uint32_t>(cfg.leader);
  }
  return 0;
}

bool all_broadcast(const Population<MaskedRemainder>& p) {
  for (const auto& s : p.config())
    if (is_bot(s.msg.out)) return false;
  return true;
}

struct MaskedRunOut {
  bool converged = false;
  std::uint64_t steps = 0;
  int answer = -1;
};

MaskedRunOut masked_run(std::uint32_t n, int k, int clock_phases, const std::vector<int>& values,
                        std::uint32_t leader, std::uint64_t seed, std::uint64_t budget,
                        std::vector<InteractionRecord>* trace_out = nullptr) {
  MaskedRemainder proto(k, clock_phases);
  std::vector<MaskedRemainder::Input> inputs(n);
  for (std::uint32_t a = 0; a < n; ++a) inputs[a] = {values[a], a == leader};
  RunOptions opt;
  opt.check_interval = n;
  opt.record_trace = trace_out != nullptr;
  Population<MaskedRemainder> pop(proto, inputs, seed, opt);
  RunStatus st = pop.run(budget, all_broadcast);
  MaskedRunOut out;
  out.converged = st.converged;
  out.steps = st.steps;
  if (st.converged) out.answer = static_cast<int>(pop.config()[0].msg.out);
  if (trace_out) *trace_out = pop.records();
  return out;
}

struct PlainRunOut {
  bool converged = false;
  std::uint64_t steps = 0;
  std::optional<bool> verdict;
};

PlainRunOut plain_run(std::uint32_t n, int k, int r, double p_m1, const std::vector<int>& values,
                      std::uint64_t seed, std::uint64_t budget,
                      std::vector<InteractionRecord>* trace_out = nullptr) {
  PlainRemainder proto(k, r, p_m1);
  RunOptions opt;
  opt.check_interval = n;
  opt.record_trace = trace_out != nullptr;
  Population<PlainRemainder> pop(proto, values, seed, opt);
  // Verdict plus a quiet window: nothing may have fired for 3*n^2 steps.
  const std::uint64_t window = 3ull * n * n;
  auto done = [&](const Population<PlainRemainder>& p) {
    if (p.steps() < p.last_effective_step() + window) return false;
    return plain_remainder_verdict(p.config()).has_value();
  };
  RunStatus st = pop.run(budget, done);
  PlainRunOut out;
  out.converged = st.converged;
  out.steps = st.steps;
  if (st.converged) out.verdict = plain_remainder_verdict(pop.config());
  if (trace_out) *trace_out = pop.records();
  return out;
}

}  // namespace

RunSummary run_once(const ExperimentConfig& cfg, bool keep_trace) {
  RunSummary sum;
  sum.protocol = cfg.protocol;
  sum.n = cfg.n;
  sum.inputs = resolve_inputs(cfg, cfg.seed);
  const std::uint64_t budget =
      cfg.budget >= 0 ? static_cast<std::uint64_t>(cfg.budget) : default_budget(cfg.n);
  RemainderParams params{cfg.k, cfg.r};
  sum.ground_truth = remainder_predicate(sum.inputs, params);
  std::vector<InteractionRecord> trace;

  if (cfg.protocol == "masked") {
    MaskedRunOut out = masked_run(cfg.n, cfg.k, cfg.clock_phases, sum.inputs,
                                  resolve_leader(cfg), cfg.seed, budget,
                                  keep_trace ? &trace : nullptr);
    sum.converged = out.converged;
    sum.steps = out.steps;
    if (out.converged) {
      sum.answer = out.answer;
      sum.output = out.answer == cfg.r;
    }
  } else if (cfg.protocol == "plain") {
    PlainRunOut out = plain_run(cfg.n, cfg.k, cfg.r, cfg.p_m1, sum.inputs, cfg.seed, budget,
                                keep_trace ? &trace : nullptr);
    sum.converged = out.converged && out.verdict.has_value();
    sum.steps = out.steps;
    if (out.verdict) sum.output = *out.verdict;
  } else {
    throw std::invalid_argument("unknown protocol: " + cfg.protocol);
  }
  sum.parallel_time = parallel_time(sum.steps, cfg.n);
  sum.agree = sum.output.has_value() && *sum.output == sum.ground_truth;
  sum.trace = std::move(trace);
  return sum;
}

ConvergenceResult convergence_sweep(const ExperimentConfig& cfg,
                                    const std::vector<std::uint32_t>& sizes) {
  if (cfg.trials < 1) throw std::invalid_argument("convergence: need at least one trial");
  ConvergenceResult res;
  std::vector<double> xs, ys, ys_logn;
  for (std::uint32_t n : sizes) {
    const std::uint64_t budget =
        cfg.budget >= 0 ? static_cast<std::uint64_t>(cfg.budget) : default_budget(n);
    std::vector<double> steps(cfg.trials, 0.0);
    std::vector<std::uint8_t> bad(cfg.trials, 0);
    parallel_trials(cfg.trials, [&](std::uint64_t t) {
      std::uint64_t ts = trial_seed(detail::mix64(cfg.seed ^ n), t);
      Rng input_rng = derive_stream(ts, "experiment-inputs");
      std::vector<int> values(n);
      for (auto& v : values) v = input_rng.zk(cfg.k);
      if (cfg.protocol == "plain") {
        PlainRunOut out = plain_run(n, cfg.k, cfg.r, cfg.p_m1, values, ts, budget);
        steps[t] = static_cast<double>(out.steps);
        bad[t] = out.converged ? 0 : 1;
      } else {
        MaskedRunOut out = masked_run(n, cfg.k, cfg.clock_phases, values, 0, ts, budget);
        steps[t] = static_cast<double>(out.steps);
        bad[t] = out.converged ? 0 : 1;
      }
    });
    ConvergenceRow row;
    row.n = n;
    row.trials = cfg.trials;
    for (auto b : bad) row.unconverged += b;
    row.median_steps = median(steps);
    row.q1_steps = quantile(steps, 0.25);
    row.q3_steps = quantile(steps, 0.75);
    res.rows.push_back(row);
    if (row.unconverged == 0) {
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(row.median_steps));
      ys_logn.push_back(std::log(row.median_steps) -
                        std::log(std::log(static_cast<double>(n))));
    }
  }
  if (xs.size() >= 2) {
    LinearFit fit = least_squares(xs, ys);
    res.alpha = fit.slope;
    res.log_c = fit.intercept;
    res.alpha_logn = least_squares(xs, ys_logn).slope;
  }
  return res;
}

std::vector<ProbeBenchPoint> probe_bench(std::uint32_t n, const std::vector<double>& ds,
                                         std::uint64_t rounds, std::uint64_t seed) {
  if (n < 8) throw std::invalid_argument("probe_bench: population too small");
  std::vector<ProbeBenchPoint> points;
  const int counts[] = {0, 1, 2, 4};
  for (double d : ds) {
    const std::uint64_t len =
        static_cast<std::uint64_t>(std::ceil(d * n * std::log(static_cast<double>(n))));
    std::vector<std::uint64_t> match(rounds, 0);
    parallel_trials(rounds, [&](std::uint64_t round) {
      Rng rng = derive_stream(trial_seed(seed, round), "probe-bench");
      std::vector<std::uint8_t> z(n, 0);
      std::vector<char> sat(n, 0);
      int c = counts[round % 4];
      for (int placed = 0; placed < c;) {
        std::uint32_t a = 1 + static_cast<std::uint32_t>(rng.below(n - 1));
        if (!sat[a]) {
          sat[a] = 1;
          ++placed;
        }
      }
      z[0] = 1;  // leader opens the round
      for (std::uint64_t s = 0; s < len; ++s) {
        auto [i, j] = select_pair(n, rng);
        z[j] = probe_advance(z[i], z[j], sat[j]);
      }
      bool truth = c > 0;
      ProbeOutcome out = classify_probe(z[0]);
      bool said_some = out == ProbeOutcome::SomeSatisfies;
      match[round] = (out != ProbeOutcome::Inconclusive && said_some == truth) ? 1 : 0;
    });
    std::uint64_t good = 0;
    for (auto m : match) good += m;
    points.push_back({d, rounds, static_cast<double>(good) / static_cast<double>(rounds)});
  }
  return points;
}

ClockedProbeStats clocked_probe_accuracy(std::uint32_t n, int clock_phases,
                                         std::uint64_t rounds, std::uint64_t seed) {
  if (n < 4) throw std::invalid_argument("clocked probe: population too small");
  Rng sched = derive_stream(seed, "scheduler");
  Rng flags = derive_stream(seed, "probe-flags");
  std::vector<std::uint32_t> tick(n, 0);
  std::vector<std::uint8_t> z(n, 0);
  std::vector<std::uint32_t> stamp(n, 0);
  std::vector<char> sat(n, 0);
  const int counts[] = {0, 1, 2, 4};

  auto assign_flags = [&](std::uint64_t round_index) {
    std::fill(sat.begin(), sat.end(), 0);
    int c = counts[round_index % 4];
    for (int placed = 0; placed < c;) {
      std::uint32_t a = 1 + static_cast<std::uint32_t>(flags.below(n - 1));
      if (!sat[a]) {
        sat[a] = 1;
        ++placed;
      }
    }
    return c > 0;
  };

  ClockedProbeStats stats;
  bool truth = assign_flags(0);
  z[0] = 1;
  std::uint64_t matched = 0, step = 0, round_start = 0;

  while (stats.rounds < rounds) {
    ++step;
    auto [i, j] = select_pair(n, sched);
    std::uint32_t ti = tick[i], tj = tick[j];
    bool boundary = false;
    {
      ClockUpdate ui = clock_advance(i == 0, Role::Initiator, ti, tj, clock_phases);
      ClockUpdate uj = clock_advance(j == 0, Role::Responder, tj, ti, clock_phases);
      if ((i == 0 && ui.round_boundary) || (j == 0 && uj.round_boundary)) boundary = true;
      tick[i] = ui.tick;
      tick[j] = uj.tick;
    }
    if (boundary) {
      std::uint32_t ended = clock_round(tick[0], clock_phases) - 1;
      std::uint8_t z_end = stamp[0] == ended ? z[0] : 0;
      ProbeOutcome out = classify_probe(z_end);
      bool said_some = out == ProbeOutcome::SomeSatisfies;
      if (out != ProbeOutcome::Inconclusive && said_some == truth) ++matched;
      stats.round_lengths.push_back(step - round_start);
      round_start = step;
      ++stats.rounds;
      truth = assign_flags(stats.rounds);
      z[0] = 1;
      stamp[0] = clock_round(tick[0], clock_phases);
      continue;  // the boundary interaction resets rather than relays
    }
    std::uint32_t here = clock_round(tick[j], clock_phases);
    std::uint8_t x = stamp[i] == here ? z[i] : 0;
    std::uint8_t y = stamp[j] == here ? z[j] : 0;
    z[j] = probe_advance(x, y, sat[j] != 0);
    stamp[j] = here;
  }

  stats.accuracy = static_cast<double>(matched) / static_cast<double>(stats.rounds);
  double total = 0;
  for (auto len : stats.round_lengths) total += static_cast<double>(len);
  stats.mean_round_steps = total / static_cast<double>(stats.rounds);
  return stats;
}

TransferTestResult transfer_test(std::uint32_t n, int k, std::uint64_t trials,
                                 std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("transfer_test: population too small");
  SecureTransfer proto(k);
  const zk_t secret = static_cast<zk_t>(1 % k);
  const std::uint64_t budget = 200ull * n * n;

  struct Sample {
    int handoff = -1;
    int committed = -1;
    int idle = -1;
    std::uint8_t delivered = 0;
    std::uint8_t finished = 0;
  };
  std::vector<Sample> samples(trials);

  parallel_trials(trials, [&](std::uint64_t t) {
    std::uint64_t ts = trial_seed(seed, t);
    Rng setup = derive_stream(ts, "transfer-setup");
    std::vector<SecureTransfer::Input> inputs(n);
    inputs[0] = {secret, Label::Sender};
    std::uint32_t eligible = 1 + static_cast<std::uint32_t>(setup.below(n - 1));
    for (std::uint32_t a = 1; a < n; ++a)
      inputs[a] = {kBot, a <= eligible ? Label::Unvisited : Label::Visited};
    Population<SecureTransfer> pop(proto, inputs, ts);
    Sample& s = samples[t];
    std::uint32_t receiver = n;
    while (pop.steps() < budget) {
      SecureTransfer::Message before = pop.config()[0].msg;
      auto [rec, effective] = pop.step();
      (void)effective;
      if (rec.initiator != 0 && rec.responder != 0) continue;
      std::uint32_t partner = rec.initiator == 0 ? rec.responder : rec.initiator;
      Label after = pop.config()[0].msg.label;
      if (before.label == Label::Sender && after == Label::SenderCommitted) {
        s.handoff = before.mask;
        receiver = partner;
      } else if (before.label == Label::SenderCommitted && after == Label::Visited) {
        s.committed = before.mask;
        s.finished = 1;
        break;
      } else if (before.label == Label::Sender) {
        s.idle = before.mask;  // last mask shown before the pick, refreshed or initial
      }
    }
    if (s.finished && receiver < n) {
      const auto& r = pop.config()[receiver];
      s.delivered = (r.msg.label == Label::Sender && r.secret == secret) ? 1 : 0;
    }
  });

  TransferTestResult res;
  res.trials = trials;
  std::vector<int> handoff, committed, idle;
  handoff.reserve(trials);
  committed.reserve(trials);
  idle.reserve(trials);
  for (const auto& s : samples) {
    if (!s.finished) {
      ++res.undelivered_runs;
      continue;
    }
    res.delivered += s.delivered;
    if (s.handoff >= 0) handoff.push_back(s.handoff);
    if (s.committed >= 0) committed.push_back(s.committed);
    if (s.idle >= 0) idle.push_back(s.idle);
  }
  res.handoff_mask = chi_square_uniform(handoff, k);
  res.committed_mask = chi_square_uniform(committed, k);
  res.idle_mask = chi_square_uniform(idle, k);
  return res;
}

std::vector<std::uint64_t> epidemic_spread_steps(std::uint32_t n, std::uint64_t trials,
                                                 std::uint64_t seed) {
  std::vector<std::uint64_t> out(trials, 0);
  parallel_trials(trials, [&](std::uint64_t t) {
    Rng rng = derive_stream(trial_seed(seed, t), "epidemic");
    std::vector<char> has(n, 0);
    has[0] = 1;
    std::uint32_t holders = 1;
    std::uint64_t steps = 0;
    while (holders < n) {
      ++steps;
      auto [i, j] = select_pair(n, rng);
      if (has[i] != has[j]) {
        has[i] = has[j] = 1;
        ++holders;
      }
    }
    out[t] = steps;
  });
  return out;
}

}  // namespace popsim
