#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "popsim/modular.hpp"
#include "popsim/rng.hpp"

namespace popsim {

struct RemainderParams {
  int k = 2;
  int r = 0;
};

inline void validate(const RemainderParams& p) {
  if (p.k < 2 || p.k > 64) throw std::invalid_argument("modulus must be in [2, 64]");
  if (p.r < 0 || p.r >= p.k) throw std::invalid_argument("target remainder must be in [0, k)");
}

// Ground truth: True iff the input sum is congruent to r mod k.
inline bool remainder_predicate(const std::vector<int>& inputs, const RemainderParams& p) {
  validate(p);
  if (inputs.empty()) throw std::invalid_argument("remainder: empty input list");
  long long sum = 0;
  for (int v : inputs) {
    if (v < 0 || v >= p.k) throw std::invalid_argument("remainder: input outside Z_k");
    sum += v;
  }
  return sum % p.k == p.r;
}

inline int remainder_sum(const std::vector<int>& inputs, int k) {
  long long sum = 0;
  for (int v : inputs) sum += v;
  return static_cast<int>(sum % k);
}

// Sequential ring computation used as the privacy reference: the leader adds
// a uniform mask to its input, the masked partial sums travel once around
// the ring, and the leader strips the mask and broadcasts. Each agent's view
// is three values: its input, the message it received, and the answer.
struct RingView {
  int input = 0;
  int received = 0;
  int answer = 0;
};

struct RingResult {
  int answer = 0;
  int leader_mask = 0;
  std::vector<RingView> views;  // views[0] is the leader; received[j] came from j-1
};

inline RingResult ring_remainder(const std::vector<int>& inputs, int k, Rng& rng) {
  if (inputs.size() < 2) throw std::invalid_argument("ring: need at least 2 agents");
  if (k < 2 || k > 64) throw std::invalid_argument("modulus must be in [2, 64]");
  const std::size_t n = inputs.size();
  RingResult res;
  res.leader_mask = rng.zk(k);
  std::vector<int> received(n, 0);
  int carry = static_cast<int>(mod_add(static_cast<zk_t>(inputs[0] % k),
                                       static_cast<zk_t>(res.leader_mask), k));
  for (std::size_t j = 1; j < n; ++j) {
    received[j] = carry;
    carry = static_cast<int>(mod_add(static_cast<zk_t>(carry), static_cast<zk_t>(inputs[j] % k), k));
  }
  received[0] = carry;  // the leader hears the full masked sum from the last agent
  res.answer = static_cast<int>(mod_sub(static_cast<zk_t>(carry),
                                        static_cast<zk_t>(res.leader_mask), k));
  res.views.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    res.views[j] = RingView{inputs[j], received[j], res.answer};
  }
  return res;
}

}  // namespace popsim
