#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace potflare {

/// Minutes in a 365-day year; the default observation calendar for
/// return-period bookkeeping (leap time ignored).
inline constexpr double kMinutesPerYear = 525600.0;

/// A UTC instant at minute resolution, stored as minutes since 1970-01-01T00:00Z.
struct UtcMinute {
  std::int64_t value{0};

  friend constexpr auto operator<=>(UtcMinute, UtcMinute) = default;
  friend constexpr std::int64_t operator-(UtcMinute a, UtcMinute b) { return a.value - b.value; }
  friend constexpr UtcMinute operator+(UtcMinute a, std::int64_t minutes) { return {a.value + minutes}; }
};

/// Calendar date (UTC) of an instant.
std::chrono::year_month_day utc_date(UtcMinute t);

/// Parses `YYYY-MM-DDTHH:MM[:SS[.fff]]Z`. Returns nullopt on any syntax error,
/// an invalid calendar date, or a nonzero seconds component.
std::optional<UtcMinute> parse_utc_minute(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:00Z`.
std::string format_utc_minute(UtcMinute t);

/// Parses `YYYY-MM-DD`.
std::optional<std::chrono::year_month_day> parse_date(std::string_view text);
std::string format_date(std::chrono::year_month_day date);

UtcMinute make_utc_minute(int year, unsigned month, unsigned day, int hour = 0, int minute = 0);

}  // namespace potflare
