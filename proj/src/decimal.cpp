#include "feed4org/decimal.hpp"

#include <cstdlib>

#include "feed4org/error.hpp"

namespace feed4org {

Money2 Money2::parse(std::string_view text) {
  const std::string original(text);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  require(!text.empty(), Errc::invalid_value, "empty decimal");
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool seen_point = false;
  bool seen_digit = false;
  for (char c : text) {
    if (c == '.') {
      require(!seen_point, Errc::invalid_value, "malformed decimal: " + original);
      seen_point = true;
      continue;
    }
    require(c >= '0' && c <= '9', Errc::invalid_value, "malformed decimal: " + original);
    seen_digit = true;
    if (seen_point) {
      require(frac_digits < 2, Errc::invalid_value,
              "more than two fractional digits: " + original);
      frac = frac * 10 + (c - '0');
      ++frac_digits;
    } else {
      require(whole < 1'000'000'000'000'000, Errc::invalid_value, "decimal overflow: " + original);
      whole = whole * 10 + (c - '0');
    }
  }
  require(seen_digit, Errc::invalid_value, "malformed decimal: " + original);
  if (frac_digits == 1) frac *= 10;
  const std::int64_t minor = whole * 100 + frac;
  return Money2(negative ? -minor : minor);
}

std::string Money2::to_string() const {
  const bool negative = minor_ < 0;
  const std::int64_t magnitude = negative ? -minor_ : minor_;
  std::string frac = std::to_string(magnitude % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return (negative ? "-" : "") + std::to_string(magnitude / 100) + "." + frac;
}

std::int64_t ratio_permille(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0) return 0;
  return (2 * 1000 * numerator + denominator) / (2 * denominator);
}

std::string format_permille(std::int64_t permille) {
  std::string frac = std::to_string(permille % 1000);
  while (frac.size() < 3) frac.insert(0, "0");
  return std::to_string(permille / 1000) + "." + frac;
}

}  // namespace feed4org
