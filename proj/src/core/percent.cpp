#include "dense/core/percent.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace dense {

namespace {

constexpr std::int64_t kSaturate = 1'000'000'000'000'000LL;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::optional<Percent> Percent::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  std::int64_t whole = 0;
  std::size_t int_digits = 0;
  while (i < text.size() && is_digit(text[i])) {
    if (whole < kSaturate) whole = whole * 10 + (text[i] - '0');
    ++i;
    ++int_digits;
  }
  std::string_view frac;
  if (i < text.size() && text[i] == '.') {
    ++i;
    const std::size_t start = i;
    while (i < text.size() && is_digit(text[i])) ++i;
    frac = text.substr(start, i - start);
  }
  if (i != text.size() || (int_digits == 0 && frac.empty())) return std::nullopt;

  std::int64_t hundredths = std::min(whole, kSaturate) * 100;
  if (frac.size() >= 1) hundredths += (frac[0] - '0') * 10;
  if (frac.size() >= 2) hundredths += frac[1] - '0';
  if (frac.size() > 2) {
    const std::string_view rest = frac.substr(2);
    const bool any_after_first = rest.find_first_not_of('0', 1) != std::string_view::npos;
    const char first = rest[0];
    bool round_up = false;
    if (first > '5' || (first == '5' && any_after_first)) {
      round_up = true;
    } else if (first == '5') {
      round_up = (hundredths % 2) != 0;  // tie: round half to even
    }
    if (round_up) ++hundredths;
  }
  return Percent(negative ? -hundredths : hundredths);
}

std::optional<Percent> Percent::from_double(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  std::array<char, 400> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
  if (res.ec != std::errc{}) return std::nullopt;
  return parse(std::string_view(buf.data(), static_cast<std::size_t>(res.ptr - buf.data())));
}

std::string Percent::str() const {
  const std::int64_t mag = hundredths_ < 0 ? -hundredths_ : hundredths_;
  std::array<char, 40> buf{};
  const int len = std::snprintf(buf.data(), buf.size(), "%s%lld.%02lld", hundredths_ < 0 ? "-" : "",
                                static_cast<long long>(mag / 100), static_cast<long long>(mag % 100));
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

}  // namespace dense
