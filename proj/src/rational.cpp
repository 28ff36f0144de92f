#include "brw/rational.hpp"

#include <charconv>
#include <numeric>

#include "brw/error.hpp"

namespace brw {

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::ConfigParse, "not a rational number: '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

Rational Rational::of(std::int64_t n, std::int64_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(n, d);
  return Rational{n / (g == 0 ? 1 : g), d / (g == 0 ? 1 : g)};
}

Rational Rational::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return of(parse_int(text.substr(0, slash), text), parse_int(text.substr(slash + 1), text));
  }
  // Finite decimal: "0.75" -> 3/4.
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    const std::string_view ip = text.substr(0, dot);
    const std::string_view fp = text.substr(dot + 1);
    if (fp.size() > 15) throw Error(ErrorCode::ConfigParse, "too many decimals: " + std::string(text));
    std::int64_t den = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
    const bool neg = !ip.empty() && ip.front() == '-';
    const std::int64_t whole = (ip.empty() || ip == "-") ? 0 : parse_int(ip, text);
    const std::int64_t frac = fp.empty() ? 0 : parse_int(fp, text);
    const std::int64_t num = whole * den + (neg ? -frac : frac);
    return of(num, den);
  }
  return of(parse_int(text, text), 1);
}

std::string Rational::to_string() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const __int128 l = static_cast<__int128>(a.num) * b.den;
  const __int128 r = static_cast<__int128>(b.num) * a.den;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace brw
