// Acceptance suite: full-scale statistical checks of the simulator, the two
// Remainder protocols, the transfer and probe subroutines, and the privacy
// laboratory. Each check prints one PASS/FAIL line; the process exits
// non-zero if any check fails.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "popsim/engine.hpp"
#include "popsim/experiments.hpp"
#include "popsim/masked_remainder.hpp"
#include "popsim/parallel.hpp"
#include "popsim/plain_remainder.hpp"
#include "popsim/privacy.hpp"
#include "popsim/remainder_oracle.hpp"
#include "popsim/rng.hpp"
#include "popsim/secure_transfer.hpp"
#include "popsim/stats.hpp"

using namespace popsim;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%-4s %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::vector<MaskedRemainder::Input> masked_inputs(const std::vector<int>& values,
                                                  std::uint32_t leader) {
  std::vector<MaskedRemainder::Input> inputs(values.size());
  for (std::uint32_t a = 0; a < values.size(); ++a) inputs[a] = {values[a], a == leader};
  return inputs;
}

bool all_broadcast(const Population<MaskedRemainder>& p) {
  for (const auto& s : p.config())
    if (is_bot(s.msg.out)) return false;
  return true;
}

// --- 1. Masked protocol computes the remainder across an (n, k) grid. ----

void check_masked_correctness() {
  bool pass = true;
  std::string detail;
  for (std::uint32_t n : {8u, 16u, 32u}) {
    for (int k : {2, 3, 5}) {
      const std::uint64_t trials = 100;
      std::vector<std::uint8_t> good(trials, 0);
      parallel_trials(trials, [&](std::uint64_t t) {
        std::uint64_t ts = trial_seed(1000 + 10 * n + k, t);
        Rng in = derive_stream(ts, "experiment-inputs");
        std::vector<int> values(n);
        for (auto& v : values) v = in.zk(k);
        RunOptions opt;
        opt.check_interval = n;
        Population<MaskedRemainder> pop(MaskedRemainder(k, 8), masked_inputs(values, 0), ts,
                                        opt);
        RunStatus st = pop.run(default_budget(n), all_broadcast);
        good[t] = st.converged && pop.config()[0].msg.out == remainder_sum(values, k);
      });
      std::uint64_t correct = 0;
      for (auto g : good) correct += g;
      if (correct < 99) pass = false;
      detail += "n" + std::to_string(n) + "k" + std::to_string(k) + "=" +
                std::to_string(correct) + " ";
    }
  }
  report("masked_correctness_grid", pass, detail + "(need >=99/100 per cell)");
}

// --- 2. Median running time scales like a cubic power of n. --------------

void check_scaling() {
  ExperimentConfig cfg;
  cfg.protocol = "masked";
  cfg.k = 3;
  cfg.trials = 30;
  cfg.seed = 20250;
  ConvergenceResult res = convergence_sweep(cfg, {8, 16, 32, 64});
  std::uint64_t unconverged = 0;
  for (const auto& row : res.rows) unconverged += row.unconverged;
  bool pass = res.alpha && *res.alpha >= 2.6 && *res.alpha <= 3.4 && unconverged == 0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "alpha=%.3f (need [2.6,3.4]); alpha_logn=%.3f; unconv=%llu",
                res.alpha ? *res.alpha : -1.0, res.alpha_logn ? *res.alpha_logn : -1.0,
                static_cast<unsigned long long>(unconverged));
  report("convergence_scaling", pass, buf);
}

// --- 3. First-contact freshness probability matches the closed form. -----

void check_freshness() {
  bool pass = true;
  std::string detail;
  for (std::uint32_t n : {3u, 10u, 50u}) {
    double closed = freshness_probability(n);
    double mc = freshness_estimate(n, 100000, 30000 + n);
    double err = std::abs(closed - mc);
    if (err > 0.005) pass = false;
    char buf[64];
    std::snprintf(buf, sizeof buf, "n%u|%.4f-%.4f|=%.4f ", n, closed, mc, err);
    detail += buf;
  }
  report("freshness_closed_form", pass, detail + "(need <=0.005)");
}

// --- 4. The fully visible protocol leaks its inputs. ---------------------

void check_plain_leaks() {
  bool pass = true;
  std::string detail;
  for (int k : {2, 4}) {
    AttackReport rep = first_partner_plain(10, k, 0, 0.5, 100000, 0, 40000 + k);
    if (rep.verdict != "leaks") pass = false;
    char buf[96];
    std::snprintf(buf, sizeof buf, "fp k%d acc=%.3f>thr=%.3f:%s ", k, rep.accuracy,
                  rep.threshold, rep.verdict.c_str());
    detail += buf;
  }
  auto [ia, ib] = distinguisher_input_pair(8, 4, 0, 41000);
  ViewDistConfig vd;
  vd.n = 8;
  vd.k = 4;
  vd.inputs_a = ia;
  vd.inputs_b = ib;
  vd.trials = 100000;
  vd.permutations = 1999;
  vd.seed = 41001;
  ViewDistResult res = view_distribution_plain(vd);
  if (res.report.verdict != "leaks") pass = false;
  char buf[96];
  std::snprintf(buf, sizeof buf, "vd tv=%.4f>null=%.4f:%s", res.report.tv_distance,
                res.report.threshold, res.report.verdict.c_str());
  report("plain_protocol_leaks", pass, detail + buf);
}

// --- 5. The masked protocol shows no leakage on successful runs. ---------

void check_masked_no_evidence() {
  bool pass = true;
  std::string detail;
  for (int k : {2, 4}) {
    AttackReport rep = first_partner_masked(10, k, 8, 100000, 0, 50000 + k);
    if (rep.verdict != "no-evidence") pass = false;
    if (rep.successes < 99000) pass = false;
    char buf[112];
    std::snprintf(buf, sizeof buf, "fp k%d acc=%.4f(base %.2f) kept=%llu:%s ", k, rep.accuracy,
                  rep.baseline, static_cast<unsigned long long>(rep.successes),
                  rep.verdict.c_str());
    detail += buf;
  }
  auto [ia, ib] = distinguisher_input_pair(8, 4, 0, 51000);
  ViewDistConfig vd;
  vd.n = 8;
  vd.k = 4;
  vd.inputs_a = ia;
  vd.inputs_b = ib;
  vd.trials = 100000;
  vd.permutations = 1999;
  vd.seed = 51001;
  ViewDistResult res = view_distribution_masked(vd);
  if (res.report.verdict != "no-evidence") pass = false;
  char buf[96];
  std::snprintf(buf, sizeof buf, "vd tv=%.4f null=%.4f:%s", res.report.tv_distance,
                res.report.threshold, res.report.verdict.c_str());
  report("masked_no_evidence", pass, detail + buf);
}

// --- 6. Transfer subroutine: exact delivery, uniform visible values. ------

void check_transfer() {
  bool pass = true;
  std::string detail;
  for (int k : {2, 4, 8}) {
    TransferTestResult res = transfer_test(16, k, 100000, 60000 + k);
    bool ok = res.undelivered_runs == 0 && res.delivered == res.trials &&
              res.handoff_mask.p_value > 0.001 && res.committed_mask.p_value > 0.001 &&
              res.idle_mask.p_value > 0.001;
    if (!ok) pass = false;
    char buf[128];
    std::snprintf(buf, sizeof buf, "k%d del=%llu/%llu p=(%.3f,%.3f,%.3f) ", k,
                  static_cast<unsigned long long>(res.delivered),
                  static_cast<unsigned long long>(res.trials), res.handoff_mask.p_value,
                  res.committed_mask.p_value, res.idle_mask.p_value);
    detail += buf;
  }
  report("transfer_delivery_uniform", pass, detail);
}

// --- 7. Clock-driven probe matches ground truth round by round. -----------

void check_probe() {
  ClockedProbeStats big = clocked_probe_accuracy(32, 8, 10000, 70032);
  ClockedProbeStats mid = clocked_probe_accuracy(16, 8, 10000, 70016);
  bool pass = big.accuracy >= 0.99 && mid.accuracy >= 1.0 - 1.0 / 16.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "n32 acc=%.4f (need >=0.99, %llu rounds); n16 acc=%.4f (need >=0.9375)",
                big.accuracy, static_cast<unsigned long long>(big.rounds), mid.accuracy);
  report("probe_round_accuracy", pass, buf);
}

// --- 8. Invariant property suites. ----------------------------------------

void check_invariants() {
  std::uint64_t violations = 0;
  std::string detail;

  // Plain protocol: the numeric value total mod k never moves.
  {
    std::uint64_t bad = 0;
    Rng meta = derive_stream(81001, "meta");
    for (int trial = 0; trial < 1000; ++trial) {
      std::uint32_t n = 3 + static_cast<std::uint32_t>(meta.below(8));
      int k = 2 + meta.zk(6);
      std::vector<int> values(n);
      for (auto& v : values) v = meta.zk(k);
      int expected = remainder_sum(values, k);
      Population<PlainRemainder> pop(PlainRemainder(k, meta.zk(k), 0.5), values,
                                     trial_seed(81002, trial));
      for (int s = 0; s < 1200; ++s) {
        pop.step();
        int acc = 0;
        for (const auto& st : pop.config())
          if (st.msg.value >= 0) acc = (acc + st.msg.value) % k;
        if (acc != expected) {
          ++bad;
          break;
        }
      }
    }
    violations += bad;
    detail += "sum=" + std::to_string(bad) + " ";
  }

  // Masked protocol: unique token, ledger constancy, monotone visitation.
  {
    std::uint64_t bad_token = 0, bad_ledger = 0, bad_visited = 0;
    Rng meta = derive_stream(82001, "meta");
    for (int trial = 0; trial < 1000; ++trial) {
      const std::uint32_t n = 8;
      int k = 2 + meta.zk(6);
      std::vector<int> values(n);
      for (auto& v : values) v = meta.zk(k);
      std::uint32_t leader = static_cast<std::uint32_t>(meta.below(n));
      std::uint64_t seed = trial_seed(82002, trial);
      Population<MaskedRemainder> pop(MaskedRemainder(k, 8), masked_inputs(values, leader),
                                      seed);
      zk_t ledger0 = masked_remainder_ledger(pop.config(), k);
      int expected = remainder_sum(values, k);
      bool stripped = false;
      int visited_before = 0;
      for (const auto& s : pop.config())
        if (s.msg.label == Label::Visited) ++visited_before;
      int rejoins = 0;
      for (int s = 0; s < 30000 && !all_broadcast(pop); ++s) {
        pop.step();
        int tokens = 0, visited = 0;
        for (const auto& st : pop.config()) {
          if (holds_token(st.msg.label)) ++tokens;
          if (st.msg.label == Label::Visited) ++visited;
        }
        if (tokens != 1) {
          ++bad_token;
          break;
        }
        if (visited < visited_before) {
          if (visited != visited_before - 1 ||
              pop.config()[leader].msg.label != Label::Unvisited || ++rejoins > 1) {
            ++bad_visited;
            break;
          }
        }
        visited_before = visited;
        if (!stripped && !is_bot(pop.config()[leader].msg.out)) stripped = true;
        zk_t expect = stripped ? static_cast<zk_t>(expected) : ledger0;
        if (masked_remainder_ledger(pop.config(), k) != expect) {
          ++bad_ledger;
          break;
        }
      }
    }
    violations += bad_token + bad_ledger + bad_visited;
    detail += "token=" + std::to_string(bad_token) + " ledger=" + std::to_string(bad_ledger) +
              " visit=" + std::to_string(bad_visited) + " ";
  }

  // View sufficiency: replaying observations through the transition function
  // reproduces the final state (masked tapes; plain needs the shared draws).
  {
    std::uint64_t bad = 0;
    Rng meta = derive_stream(83001, "meta");
    for (int trial = 0; trial < 1000; ++trial) {
      const std::uint32_t n = 6;
      int k = 2 + meta.zk(6);
      std::vector<int> values(n);
      for (auto& v : values) v = meta.zk(k);
      std::uint64_t seed = trial_seed(83002, trial);
      RunOptions opt;
      opt.record_views = true;
      MaskedRemainder proto(k, 8);
      Population<MaskedRemainder> pop(proto, masked_inputs(values, 0), seed, opt);
      pop.run(1500);
      for (std::uint32_t a = 0; a < n; ++a) {
        auto replayed =
            replay_view(proto, pop.views()[a], derive_stream(seed, "delta", a));
        if (!(replayed == pop.config()[a])) ++bad;
      }
    }
    Rng meta2 = derive_stream(83501, "meta");
    for (int trial = 0; trial < 1000; ++trial) {
      const std::uint32_t n = 6;
      int k = 2 + meta2.zk(6);
      std::vector<int> values(n);
      for (auto& v : values) v = meta2.zk(k);
      std::uint64_t seed = trial_seed(83502, trial);
      RunOptions opt;
      opt.record_views = true;
      opt.record_trace = true;
      PlainRemainder proto(k, meta2.zk(k), 0.5);
      Population<PlainRemainder> pop(proto, values, seed, opt);
      pop.run(600);
      for (std::uint32_t a = 0; a < n; ++a) {
        std::vector<std::uint64_t> draws;
        for (std::size_t s = 0; s < pop.records().size(); ++s) {
          if (pop.records()[s].initiator == a || pop.records()[s].responder == a)
            draws.push_back(pop.pair_draws()[s]);
        }
        auto replayed =
            replay_view(proto, pop.views()[a], derive_stream(seed, "delta", a), draws);
        if (!(replayed == pop.config()[a])) ++bad;
      }
    }
    violations += bad;
    detail += "replay=" + std::to_string(bad) + " ";
  }

  // Scheduler uniformity at one million draws.
  {
    std::uint64_t bad = 0;
    for (std::uint32_t n : {4u, 8u, 16u}) {
      Rng rng = derive_stream(84000 + n, "scheduler");
      std::vector<std::uint64_t> counts(n * n, 0);
      for (int i = 0; i < 1000000; ++i) {
        auto [a, b] = select_pair(n, rng);
        ++counts[a * n + b];
      }
      std::vector<std::uint64_t> cells;
      for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t b = 0; b < n; ++b)
          if (a != b) cells.push_back(counts[a * n + b]);
      if (chi_square_uniform_counts(cells).p_value <= 0.001) ++bad;
    }
    violations += bad;
    detail += "sched=" + std::to_string(bad) + " ";
  }

  // Frame property: a step may touch only the two scheduled agents.
  {
    std::uint64_t bad = 0;
    Rng meta = derive_stream(85001, "meta");
    for (int trial = 0; trial < 1000; ++trial) {
      const std::uint32_t n = 8;
      int k = 2 + meta.zk(6);
      std::vector<int> values(n);
      for (auto& v : values) v = meta.zk(k);
      Population<MaskedRemainder> pop(MaskedRemainder(k, 8), masked_inputs(values, 0),
                                      trial_seed(85002, trial));
      for (int s = 0; s < 150; ++s) {
        auto before = pop.config();
        auto [rec, effective] = pop.step();
        (void)effective;
        for (std::uint32_t a = 0; a < n; ++a) {
          if (a == rec.initiator || a == rec.responder) continue;
          if (!(pop.config()[a] == before[a])) {
            ++bad;
            break;
          }
        }
      }
    }
    violations += bad;
    detail += "frame=" + std::to_string(bad);
  }

  report("invariant_suites", violations == 0, detail + " (need all zero)");
}

// --- 9. Distinguishers almost never cry wolf on null data. ----------------

void check_null_calibration() {
  const int reps = 500;
  std::string detail;

  std::vector<std::uint8_t> fp_false(reps, 0);
  parallel_trials(reps, [&](std::uint64_t r) {
    AttackReport rep = first_partner_null(10, 4, 2000, trial_seed(91001, r));
    fp_false[r] = rep.verdict == "leaks" ? 1 : 0;
  });
  int fp_total = 0;
  for (auto f : fp_false) fp_total += f;

  std::vector<std::uint8_t> vd_false(reps, 0);
  parallel_trials(reps, [&](std::uint64_t r) {
    ViewDistConfig vd;
    vd.n = 8;
    vd.k = 4;
    auto pair = distinguisher_input_pair(8, 4, 0, trial_seed(92001, r));
    vd.inputs_a = pair.first;
    vd.inputs_b = pair.first;  // identical distributions
    vd.trials = 1000;
    vd.permutations = 1999;
    vd.seed = trial_seed(92002, r);
    vd.threads = 1;
    ViewDistResult res = view_distribution_plain(vd);
    vd_false[r] = res.report.verdict == "leaks" ? 1 : 0;
  });
  int vd_total = 0;
  for (auto f : vd_false) vd_total += f;

  std::vector<std::uint8_t> cs_false(reps, 0);
  parallel_trials(reps, [&](std::uint64_t r) {
    Rng rng = derive_stream(trial_seed(93001, r), "calibration");
    std::vector<int> samples(2000);
    for (auto& s : samples) s = rng.zk(4);
    cs_false[r] = chi_square_uniform(samples, 4).p_value <= 0.001 ? 1 : 0;
  });
  int cs_total = 0;
  for (auto f : cs_false) cs_total += f;

  // 0.2% of 500 repetitions allows at most one false alarm per distinguisher.
  bool pass = fp_total <= 1 && vd_total <= 1 && cs_total <= 1;
  detail = "first-partner=" + std::to_string(fp_total) + "/500 view-dist=" +
           std::to_string(vd_total) + "/500 chi-square=" + std::to_string(cs_total) +
           "/500 (need <=1 each)";
  report("null_calibration", pass, detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite (version 0.1.0)\n");
  check_masked_correctness();
  check_scaling();
  check_freshness();
  check_plain_leaks();
  check_masked_no_evidence();
  check_transfer();
  check_probe();
  check_invariants();
  check_null_calibration();
  if (g_failures == 0) {
    std::printf("all checks passed\n");
    return 0;
  }
  std::printf("%d check(s) failed\n", g_failures);
  return 1;
}
