#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace popsim {

// SplitMix64 stream with a per-stream increment. Cheap to construct, which
// matters because every agent in every Monte Carlo trial owns two streams.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng() : Rng(0, 1) {}
  Rng(std::uint64_t state, std::uint64_t gamma) : state_(state), gamma_(gamma | 1ull) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += gamma_);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Unbiased draw in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = (*this)();
      if (r >= threshold) return r % n;
    }
  }

  int zk(int k) { return static_cast<int>(below(static_cast<std::uint64_t>(k))); }

  double unit() { return ((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

 private:
  std::uint64_t state_;
  std::uint64_t gamma_;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdull;
  z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ull;
  return z ^ (z >> 33);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace detail

// Derives an independent named stream from a root seed. Streams differ in
// both starting state and increment, so distinct (tag, index) pairs yield
// distinct orbits, not shifted copies of one sequence.
inline Rng derive_stream(std::uint64_t root, std::string_view tag, std::uint64_t index = 0) {
  std::uint64_t t = detail::hash_tag(tag);
  std::uint64_t state = detail::mix64(root ^ detail::mix64(t + 0x9e3779b97f4a7c15ull * (index + 1)));
  std::uint64_t gamma = detail::mix64(state ^ t ^ (index * 0xda942042e4dd58b5ull)) | 1ull;
  return Rng(state, gamma);
}

// Per-trial root seeds for Monte Carlo fan-out.
inline std::uint64_t trial_seed(std::uint64_t root, std::uint64_t trial) {
  return detail::mix64(root ^ detail::mix64(trial + 0x632be59bd9b4e019ull));
}

}  // namespace popsim
