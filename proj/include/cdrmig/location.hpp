#pragma once

// Hourly, daily and monthly locations by hierarchical modes with a night-time
// preference for daily locations.

#include <span>
#include <utility>
#include <vector>

#include "cdrmig/dates.hpp"
#include "cdrmig/ingest.hpp"

namespace cdrmig {

/// Most frequent cell; ties go to the smallest cell id. Precondition: nonempty.
CellId mode_cell(std::span<const CellId> cells);

struct HourlyLocation {
  Day day;
  int hour = 0;
  CellId cell = kNoCell;
  friend bool operator==(const HourlyLocation &, const HourlyLocation &) = default;
};

struct DailyLocation {
  Day day;
  CellId cell = kNoCell;
  friend bool operator==(const DailyLocation &, const DailyLocation &) = default;
};
using DailySeries = std::vector<DailyLocation>;  // ascending by day

struct MonthlyLocation {
  MonthKey month;
  CellId cell = kNoCell;
  int32_t days_observed = 0;
  friend bool operator==(const MonthlyLocation &, const MonthlyLocation &) = default;
};
using MonthlySeries = std::vector<MonthlyLocation>;  // ascending by month

inline constexpr int kNightStartHour = 18;
inline constexpr int kDayStartHour = 8;
inline constexpr int32_t kMinMonthDays = 10;

/// One entry per (day, hour) holding at least one record, sorted.
std::vector<HourlyLocation> hourly(const Trajectory &trajectory, int32_t utc_offset_seconds = 0);
std::vector<HourlyLocation> hourly(std::span<const CdrEvent> events, int32_t utc_offset_seconds = 0);

/// Daily location of day d: mode over its night hours (18-23 of d and 0-7 of
/// d+1) when any exist, otherwise mode over its daytime hours 8-17.
DailySeries daily(std::span<const HourlyLocation> hours);

/// Calendar months with at least `min_month_days` observed days, valued at
/// the modal daily cell.
MonthlySeries monthly(const DailySeries &days, int32_t min_month_days = kMinMonthDays);

}  // namespace cdrmig
