#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "popsim/engine.hpp"
#include "popsim/privacy.hpp"
#include "popsim/stats.hpp"

namespace popsim {

struct ExperimentConfig {
  std::string protocol = "masked";  // "plain" | "masked"
  std::uint32_t n = 16;
  int k = 3;
  int r = 0;
  std::uint64_t seed = 1;
  std::uint64_t trials = 100;
  std::int64_t budget = -1;  // negative = protocol default; 0 is a real budget
  int clock_phases = 8;      // m
  double p_m1 = 0.5;         // weight of the unit-transfer rule in the plain protocol
  std::uint32_t adversary = 0;
  std::int64_t leader = -1;  // -1 = auto (0, shifted off the adversary for attacks)
  std::vector<int> inputs;   // optional fixed inputs; otherwise drawn from the seed
};

std::uint64_t default_budget(std::uint32_t n);

struct RunSummary {
  std::string protocol;
  std::uint32_t n = 0;
  bool converged = false;
  std::uint64_t steps = 0;
  double parallel_time = 0.0;
  std::optional<bool> output;  // predicate verdict, when decided
  std::optional<int> answer;   // broadcast value (masked protocol)
  bool ground_truth = false;
  bool agree = false;
  std::vector<int> inputs;
  std::vector<InteractionRecord> trace;  // filled when requested
};

RunSummary run_once(const ExperimentConfig& cfg, bool keep_trace = false);

struct ConvergenceRow {
  std::uint32_t n = 0;
  std::uint64_t trials = 0;
  std::uint64_t unconverged = 0;
  double median_steps = 0.0;
  double q1_steps = 0.0;
  double q3_steps = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  // Power-law exponent of median steps vs n, fitted when >= 2 sizes; the
  // second form divides out a log n factor first (steps ~ c * n^alpha * log n).
  std::optional<double> alpha;
  std::optional<double> alpha_logn;
  std::optional<double> log_c;
};

ConvergenceResult convergence_sweep(const ExperimentConfig& cfg,
                                    const std::vector<std::uint32_t>& sizes);

// Probe run for a fixed round length of ceil(d * n * ln n) interactions,
// measured against a known ground truth; the satisfied-count per round
// cycles through {0, 1, 2, 4}.
struct ProbeBenchPoint {
  double d = 0.0;
  std::uint64_t rounds = 0;
  double accuracy = 0.0;
};
std::vector<ProbeBenchPoint> probe_bench(std::uint32_t n, const std::vector<double>& ds,
                                         std::uint64_t rounds, std::uint64_t seed);

// Probe driven by the leader phase clock; rounds end at leader wraps.
struct ClockedProbeStats {
  std::uint64_t rounds = 0;
  double accuracy = 0.0;
  double mean_round_steps = 0.0;
  std::vector<std::uint64_t> round_lengths;
};
ClockedProbeStats clocked_probe_accuracy(std::uint32_t n, int clock_phases,
                                         std::uint64_t rounds, std::uint64_t seed);

// Delivery exactness and uniformity of every sender-shown value for the
// one-shot transfer protocol. One sample per run and category.
struct TransferTestResult {
  std::uint64_t trials = 0;
  std::uint64_t delivered = 0;
  ChiSquareResult handoff_mask;     // mask shown when the receiver is picked
  ChiSquareResult committed_mask;   // masked value shown at delivery
  ChiSquareResult idle_mask;        // mask shown to bystanders before the pick
  std::uint64_t undelivered_runs = 0;
};
TransferTestResult transfer_test(std::uint32_t n, int k, std::uint64_t trials,
                                 std::uint64_t seed);

// One-way spread of a single non-empty out slot; returns steps from the
// first non-empty slot until every agent holds it, per trial.
std::vector<std::uint64_t> epidemic_spread_steps(std::uint32_t n, std::uint64_t trials,
                                                 std::uint64_t seed);

}  // namespace popsim
