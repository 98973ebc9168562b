#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace popsim {

// Empirical distribution over a discrete feature space.
struct Histogram {
  std::unordered_map<std::string, std::uint64_t> bins;
  std::uint64_t total = 0;

  void add(const std::string& key, std::uint64_t count = 1) {
    bins[key] += count;
    total += count;
  }

  void merge(const Histogram& other) {
    for (const auto& [k, c] : other.bins) bins[k] += c;
    total += other.total;
  }
};

// 1/2 sum over the union of bins of |p1(b) - p2(b)|.
double total_variation(const Histogram& h1, const Histogram& h2);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::uint64_t samples = 0;
};

// Pearson goodness-of-fit against the uniform distribution on Z_k,
// k-1 degrees of freedom. Requires at least 10*k samples.
ChiSquareResult chi_square_uniform(const std::vector<int>& samples, int k);

// Same test for arbitrary pre-binned counts against equal expected mass.
ChiSquareResult chi_square_uniform_counts(const std::vector<std::uint64_t>& counts);

double median(std::vector<double> xs);
double quantile(std::vector<double> xs, double q);

// Least-squares slope/intercept of y on x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace popsim
