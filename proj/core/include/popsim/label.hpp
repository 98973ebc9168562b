#pragma once

#include <cstdint>
#include <string_view>

namespace popsim {

// Token labels for the masked hand-off protocols. The population holds at
// most one Sender/SenderCommitted token and at most one Receiver at a time.
enum class Label : std::uint8_t {
  Unvisited,        // eligible to receive (u)
  Visited,          // already folded in, out of the pool
  Sender,           // holds the value, searching for a receiver
  SenderCommitted,  // has picked a receiver, carries the masked value
  Receiver,         // chosen target of the current transfer
};

inline bool holds_token(Label l) { return l == Label::Sender || l == Label::SenderCommitted; }

inline std::string_view label_name(Label l) {
  switch (l) {
    case Label::Unvisited: return "u";
    case Label::Visited: return "v";
    case Label::Sender: return "S";
    case Label::SenderCommitted: return "S+";
    case Label::Receiver: return "R";
  }
  return "?";
}

}  // namespace popsim
