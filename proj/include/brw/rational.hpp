#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace brw {

/// Exact rational number used for regime-selecting parameters such as the
/// tail exponent, so that boundary values like 1 or 3/2 compare exactly.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational parse(std::string_view text);  // "3/2", "1", "0.75"
  static Rational of(std::int64_t n, std::int64_t d = 1);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);
};

}  // namespace brw
