#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "popsim/stats.hpp"

namespace popsim {

// Outcome of one statistical distinguisher run. The verdict is one-sided:
// "leaks" certifies a detected difference, "no-evidence" reports only the
// absence of one at the configured threshold.
struct AttackReport {
  std::string protocol;
  std::string attack;
  std::uint32_t n = 0;
  int k = 2;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;  // trials kept after success conditioning
  double accuracy = 0.0;
  double baseline = 0.0;
  double tv_distance = 0.0;
  double p_value = 1.0;
  double threshold = 0.0;
  std::string verdict = "no-evidence";
};

// Chance that an agent's first interaction partner is still in its initial
// state under the uniform scheduler: (n-1)/(2n-3).
double freshness_probability(std::uint32_t n);

// The same probability estimated from raw scheduler draws.
double freshness_estimate(std::uint32_t n, std::uint64_t trials, std::uint64_t seed);

struct TvTestResult {
  double tv = 0.0;
  double threshold = 0.0;  // null quantile of the label-shuffled distance
  double p_value = 1.0;
  bool leaks = false;
};

// Permutation test: is the distance between the two feature samples larger
// than the given quantile of the label-shuffled null?
TvTestResult tv_permutation_test(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b, std::size_t permutations,
                                 double quantile_level, std::uint64_t seed,
                                 unsigned threads = 0);

// First-partner attack: the adversary guesses its first interaction
// partner's input from the first message it observes.
AttackReport first_partner_plain(std::uint32_t n, int k, int r, double p_m1,
                                 std::uint64_t trials, std::uint32_t adversary,
                                 std::uint64_t seed);
// Same attack against the masked protocol (guess = first observed mask),
// restricted to runs that computed the correct answer.
AttackReport first_partner_masked(std::uint32_t n, int k, int clock_phases,
                                  std::uint64_t trials, std::uint32_t adversary,
                                  std::uint64_t seed);
// Calibration attacker that ignores its view and guesses uniformly.
AttackReport first_partner_null(std::uint32_t n, int k, std::uint64_t trials,
                                std::uint64_t seed);

struct ViewDistConfig {
  std::uint32_t n = 8;
  int k = 4;
  std::vector<int> inputs_a;  // must agree with inputs_b at the adversary and on the output
  std::vector<int> inputs_b;
  std::uint32_t adversary = 0;
  std::uint64_t trials = 10000;  // per arm
  std::size_t permutations = 1999;
  std::size_t feature_len = 2;
  double quantile_level = 0.999;
  double p_m1 = 0.5;     // plain protocol only
  int clock_phases = 8;  // masked protocol only
  std::uint64_t seed = 1;
  unsigned threads = 0;  // worker threads for trials and permutations (0 = auto)
};

struct ViewDistResult {
  AttackReport report;
  Histogram arm_a;
  Histogram arm_b;
};

// Distinguishes the adversary's view-feature distributions under the two
// input vectors. Preconditions: same adversary input, same predicate output.
ViewDistResult view_distribution_plain(const ViewDistConfig& cfg);
// Masked variant, conditioned on runs whose broadcast answer was correct.
ViewDistResult view_distribution_masked(const ViewDistConfig& cfg);

// Canonical valid input pair for the distinguisher: same adversary input and
// total sum, but the non-adversary input multisets differ (two positions
// moved one unit apart from a flat baseline).
std::pair<std::vector<int>, std::vector<int>> distinguisher_input_pair(std::uint32_t n, int k,
                                                                       std::uint32_t adversary,
                                                                       std::uint64_t seed);

}  // namespace popsim
