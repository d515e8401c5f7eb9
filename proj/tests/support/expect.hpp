#pragma once

#include <optional>
#include <ostream>

#include "feed4org/error.hpp"

namespace feed4org {
inline void PrintTo(Errc code, std::ostream* os) { *os << to_string(code); }
}  // namespace feed4org

/// Error code thrown by fn, or nothing if it returned normally.
template <typename Fn>
std::optional<feed4org::Errc> error_of(Fn&& fn) {
  try {
    fn();
  } catch (const feed4org::Error& e) {
    return e.code();
  }
  return std::nullopt;
}
