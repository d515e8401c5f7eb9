#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace feed4org {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view data);

/// Lowercase hex, 64 characters.
std::string sha256_hex(std::string_view data);

std::string to_hex(const std::uint8_t* data, std::size_t size);

inline std::string to_hex(const Digest& digest) {
  return to_hex(digest.data(), digest.size());
}

}  // namespace feed4org
