#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dense {

// Percent image coordinate held as an exact count of hundredths, so that
// "65.20" survives storage, arithmetic-free transport and re-serialization
// without binary floating-point drift.
class Percent {
 public:
  constexpr Percent() = default;

  static constexpr Percent from_hundredths(std::int64_t h) { return Percent(h); }

  // Parses [+-]?digits[.digits] (or .digits) and rounds to two decimals with
  // round-half-to-even on the decimal digits. Returns nullopt on any other
  // syntax, including exponents.
  static std::optional<Percent> parse(std::string_view text);

  // Rounds the shortest round-trip decimal representation of `v`.
  static std::optional<Percent> from_double(double v);

  constexpr std::int64_t hundredths() const noexcept { return hundredths_; }
  constexpr double value() const noexcept { return static_cast<double>(hundredths_) / 100.0; }

  constexpr bool in_range() const noexcept { return hundredths_ >= 0 && hundredths_ <= 10000; }

  // Exactly two decimals, e.g. "5.00", "100.00", "-0.50".
  std::string str() const;

  friend constexpr auto operator<=>(const Percent&, const Percent&) = default;

 private:
  constexpr explicit Percent(std::int64_t h) : hundredths_(h) {}
  std::int64_t hundredths_ = 0;
};

}  // namespace dense
