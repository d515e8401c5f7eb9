#pragma once

#include <cstdint>
#include <compare>
#include <string>
#include <string_view>

namespace feed4org {

/// Fixed-point amount with two fractional digits, stored in minor units
/// (cents / Rappen). Used for fiat reporting; never touches binary floating
/// point.
class Money2 {
 public:
  constexpr Money2() = default;
  static constexpr Money2 from_minor(std::int64_t minor) { return Money2(minor); }

  /// Parses "12", "0.2", "0.20", "-3.05". More than two fractional digits is
  /// rejected rather than rounded.
  static Money2 parse(std::string_view text);

  constexpr std::int64_t minor_units() const { return minor_; }

  /// Always two fractional digits: "37.80", "0.00".
  std::string to_string() const;

  constexpr Money2 operator*(std::int64_t factor) const { return Money2(minor_ * factor); }
  constexpr Money2 operator+(Money2 other) const { return Money2(minor_ + other.minor_); }
  constexpr auto operator<=>(const Money2&) const = default;

 private:
  constexpr explicit Money2(std::int64_t minor) : minor_(minor) {}
  std::int64_t minor_ = 0;
};

/// Exact ratio rendered with three decimals (round half up), e.g. 494/1704
/// -> "0.290". Denominator 0 renders as "0.000".
std::int64_t ratio_permille(std::int64_t numerator, std::int64_t denominator);
std::string format_permille(std::int64_t permille);

}  // namespace feed4org
