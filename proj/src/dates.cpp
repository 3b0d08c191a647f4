#include "cdrmig/dates.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace cdrmig {

using namespace std::chrono;

Day make_day(int y, unsigned m, unsigned d) {
  year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  return Day{static_cast<int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

year_month_day civil(Day d) { return year_month_day{sys_days{days{d.value}}}; }

int year_of(Day d) { return static_cast<int>(civil(d).year()); }
unsigned month_of(Day d) { return static_cast<unsigned>(civil(d).month()); }
unsigned day_of_month(Day d) { return static_cast<unsigned>(civil(d).day()); }

std::string format_day(Day d) {
  auto ymd = civil(d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Day parse_day(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw std::invalid_argument("bad date: " + std::string(s));
  int y = 0;
  unsigned m = 0, d = 0;
  auto ok = [](auto r) { return r.ec == std::errc{}; };
  if (!ok(std::from_chars(s.data(), s.data() + 4, y)) ||
      !ok(std::from_chars(s.data() + 5, s.data() + 7, m)) ||
      !ok(std::from_chars(s.data() + 8, s.data() + 10, d)))
    throw std::invalid_argument("bad date: " + std::string(s));
  return make_day(y, m, d);
}

DayHour to_day_hour(int64_t unix_seconds, int32_t utc_offset_seconds) {
  int64_t local = unix_seconds + utc_offset_seconds;
  int64_t day = local >= 0 ? local / 86400 : -((-local + 86399) / 86400);
  int64_t sec = local - day * 86400;
  return DayHour{Day{static_cast<int32_t>(day)}, static_cast<int>(sec / 3600)};
}

MonthKey month_key(Day d) {
  auto ymd = civil(d);
  return MonthKey{static_cast<int>(ymd.year()) * 12 +
                  static_cast<int32_t>(static_cast<unsigned>(ymd.month())) - 1};
}

Day MonthKey::first_day() const { return make_day(year(), month(), 1); }

Day MonthKey::last_day() const {
  year_month_day_last l{std::chrono::year{year()},
                        month_day_last{std::chrono::month{month()}}};
  return Day{static_cast<int32_t>(sys_days{l}.time_since_epoch().count())};
}

HalfMonth HalfMonth::of(int y, unsigned m, int half) {
  return HalfMonth{y * 24 + static_cast<int32_t>(m - 1) * 2 + (half - 1)};
}

Day HalfMonth::start() const { return make_day(year(), month(), half() == 1 ? 1 : 16); }

Day HalfMonth::end() const {
  if (half() == 1) return make_day(year(), month(), 15);
  return MonthKey{year() * 12 + static_cast<int32_t>(month()) - 1}.last_day();
}

HalfMonth half_month_of(Day d) {
  auto ymd = civil(d);
  int half = static_cast<unsigned>(ymd.day()) <= 15 ? 1 : 2;
  return HalfMonth::of(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), half);
}

std::string format_half_month(HalfMonth h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02u-H%d", h.year(), h.month(), h.half());
  return buf;
}

}  // namespace cdrmig
