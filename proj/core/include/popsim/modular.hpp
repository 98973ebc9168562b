#pragma once

#include <cstdint>

namespace popsim {

// Values in Z_k are stored as int16_t; kBot marks the absent value.
using zk_t = std::int16_t;
inline constexpr zk_t kBot = -1;

inline bool is_bot(zk_t v) { return v < 0; }

inline zk_t mod_add(zk_t a, zk_t b, int k) {
  int s = (static_cast<int>(a) + static_cast<int>(b)) % k;
  return static_cast<zk_t>(s);
}

inline zk_t mod_sub(zk_t a, zk_t b, int k) {
  int s = (static_cast<int>(a) - static_cast<int>(b)) % k;
  if (s < 0) s += k;
  return static_cast<zk_t>(s);
}

}  // namespace popsim
