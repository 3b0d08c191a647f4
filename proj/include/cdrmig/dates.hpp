#pragma once

// Civil-date helpers. Every date in the pipeline is a Day: an integer count
// of days since 1970-01-01 in the corpus timezone.

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cdrmig {

struct Day {
  int32_t value = 0;

  constexpr Day() = default;
  constexpr explicit Day(int32_t v) : value(v) {}

  friend constexpr auto operator<=>(Day, Day) = default;
  constexpr Day operator+(int32_t n) const { return Day{value + n}; }
  constexpr Day operator-(int32_t n) const { return Day{value - n}; }
  constexpr int32_t operator-(Day o) const { return value - o.value; }
  Day &operator++() { ++value; return *this; }
};

/// Inclusive day count of [a, b]; zero when b < a.
constexpr int32_t span_days(Day a, Day b) { return b < a ? 0 : (b - a) + 1; }

/// Size of the intersection of two inclusive ranges.
constexpr int32_t overlap_days(Day a0, Day a1, Day b0, Day b1) {
  Day lo = a0 < b0 ? b0 : a0;
  Day hi = a1 < b1 ? a1 : b1;
  return span_days(lo, hi);
}

Day make_day(int year, unsigned month, unsigned day);
std::chrono::year_month_day civil(Day d);
int year_of(Day d);
unsigned month_of(Day d);
unsigned day_of_month(Day d);

/// ISO yyyy-mm-dd.
std::string format_day(Day d);
/// Parses yyyy-mm-dd; throws std::invalid_argument on malformed input.
Day parse_day(std::string_view s);

/// Splits a unix timestamp into (civil day, hour) at a fixed UTC offset.
struct DayHour {
  Day day;
  int hour = 0;
};
DayHour to_day_hour(int64_t unix_seconds, int32_t utc_offset_seconds = 0);

/// Calendar month, numbered as year*12 + (month-1).
struct MonthKey {
  int32_t value = 0;
  friend constexpr auto operator<=>(MonthKey, MonthKey) = default;
  int year() const { return value / 12; }
  unsigned month() const { return static_cast<unsigned>(value % 12) + 1; }
  Day first_day() const;
  Day last_day() const;
};
MonthKey month_key(Day d);

/// Half-month time unit: days 1-15 or 16-end of a calendar month.
struct HalfMonth {
  int32_t index = 0;  // year*24 + (month-1)*2 + (half-1)

  friend constexpr auto operator<=>(HalfMonth, HalfMonth) = default;
  int year() const { return index / 24; }
  unsigned month() const { return static_cast<unsigned>((index % 24) / 2) + 1; }
  int half() const { return index % 2 + 1; }
  Day start() const;
  Day end() const;
  int32_t length() const { return span_days(start(), end()); }
  HalfMonth next() const { return HalfMonth{index + 1}; }
  HalfMonth prev() const { return HalfMonth{index - 1}; }
  static HalfMonth of(int year, unsigned month, int half);
};
HalfMonth half_month_of(Day d);
std::string format_half_month(HalfMonth h);

}  // namespace cdrmig
