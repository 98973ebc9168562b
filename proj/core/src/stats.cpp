#include "popsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace popsim {

double total_variation(const Histogram& h1, const Histogram& h2) {
  if (h1.total == 0 || h2.total == 0)
    throw std::invalid_argument("total_variation: empty histogram");
  const double n1 = static_cast<double>(h1.total);
  const double n2 = static_cast<double>(h2.total);
  double acc = 0.0;
  for (const auto& [k, c1] : h1.bins) {
    auto it = h2.bins.find(k);
    double p2 = it == h2.bins.end() ? 0.0 : static_cast<double>(it->second) / n2;
    acc += std::abs(static_cast<double>(c1) / n1 - p2);
  }
  for (const auto& [k, c2] : h2.bins) {
    if (!h1.bins.contains(k)) acc += static_cast<double>(c2) / n2;
  }
  return 0.5 * acc;
}

ChiSquareResult chi_square_uniform_counts(const std::vector<std::uint64_t>& counts) {
  const std::size_t k = counts.size();
  if (k < 2) throw std::invalid_argument("chi_square: need at least 2 cells");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total < 10 * k) throw std::invalid_argument("chi_square: insufficient samples");
  const double expected = static_cast<double>(total) / static_cast<double>(k);
  double stat = 0.0;
  for (auto c : counts) {
    double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(k - 1));
  double p = stat <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, stat));
  return {stat, p, total};
}

ChiSquareResult chi_square_uniform(const std::vector<int>& samples, int k) {
  if (k < 2) throw std::invalid_argument("chi_square: modulus must be >= 2");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(k), 0);
  for (int s : samples) {
    if (s < 0 || s >= k) throw std::invalid_argument("chi_square: sample out of range");
    ++counts[static_cast<std::size_t>(s)];
  }
  return chi_square_uniform_counts(counts);
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
  q = std::clamp(q, 0.0, 1.0);
  double pos = q * static_cast<double>(xs.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, xs.size() - 1);
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(lo), xs.end());
  double vlo = xs[lo];
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(hi), xs.end());
  double vhi = xs[hi];
  double frac = pos - static_cast<double>(lo);
  return vlo + (vhi - vlo) * frac;
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("least_squares: degenerate x values");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace popsim
