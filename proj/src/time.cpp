#include "potflare/time.hpp"

#include <charconv>
#include <cstdio>

namespace potflare {
namespace {

using namespace std::chrono;

constexpr std::int64_t kMinutesPerDay = 1440;

bool read_uint(std::string_view text, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > text.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + width, out);
  return ec == std::errc{} && ptr == text.data() + pos + width;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::chrono::year_month_day utc_date(UtcMinute t) {
  return year_month_day{sys_days{days{floor_div(t.value, kMinutesPerDay)}}};
}

UtcMinute make_utc_minute(int year, unsigned month, unsigned day, int hour, int minute) {
  const sys_days d{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}};
  return {d.time_since_epoch().count() * kMinutesPerDay + hour * 60 + minute};
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view text) {
  int y = 0, mo = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!read_uint(text, 0, 4, y) || !read_uint(text, 5, 2, mo) || !read_uint(text, 8, 2, d)) {
    return std::nullopt;
  }
  const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                           std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

std::string format_date(std::chrono::year_month_day date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::optional<UtcMinute> parse_utc_minute(std::string_view text) {
  // YYYY-MM-DDTHH:MM
  if (text.size() < 17 || text.back() != 'Z') return std::nullopt;
  text.remove_suffix(1);
  const auto date = parse_date(text.substr(0, 10));
  if (!date || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') return std::nullopt;
  int hh = 0, mm = 0;
  if (!read_uint(text, 11, 2, hh) || !read_uint(text, 14, 2, mm)) return std::nullopt;
  if (hh > 23 || mm > 59) return std::nullopt;
  std::string_view rest = text.substr(16);
  if (!rest.empty()) {
    int ss = 0;
    if (rest.size() < 3 || rest[0] != ':' || !read_uint(rest, 1, 2, ss) || ss != 0) return std::nullopt;
    rest.remove_prefix(3);
    if (!rest.empty()) {
      if (rest[0] != '.' || rest.size() < 2) return std::nullopt;
      for (char c : rest.substr(1)) {
        if (c != '0') return std::nullopt;
      }
    }
  }
  const sys_days d{*date};
  return UtcMinute{d.time_since_epoch().count() * kMinutesPerDay + hh * 60 + mm};
}

std::string format_utc_minute(UtcMinute t) {
  const auto ymd = utc_date(t);
  const std::int64_t in_day = t.value - floor_div(t.value, kMinutesPerDay) * kMinutesPerDay;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:00Z", format_date(ymd).c_str(),
                static_cast<int>(in_day / 60), static_cast<int>(in_day % 60));
  return buf;
}

}  // namespace potflare
