#include "cdrmig/location.hpp"

#include <algorithm>
#include <map>

namespace cdrmig {

CellId mode_cell(std::span<const CellId> cells) {
  std::vector<CellId> sorted(cells.begin(), cells.end());
  std::sort(sorted.begin(), sorted.end());
  CellId best = kNoCell;
  size_t best_count = 0;
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    // strict > keeps the smallest id among equally frequent cells
    if (j - i > best_count) {
      best_count = j - i;
      best = sorted[i];
    }
    i = j;
  }
  return best;
}

std::vector<HourlyLocation> hourly(std::span<const CdrEvent> events, int32_t utc_offset_seconds) {
  // Slot key is the hour index since epoch; sorting by it groups each hour.
  std::vector<std::pair<int64_t, CellId>> keyed;
  keyed.reserve(events.size());
  for (const auto &e : events) {
    auto dh = to_day_hour(e.timestamp, utc_offset_seconds);
    keyed.emplace_back(int64_t{dh.day.value} * 24 + dh.hour, e.cell);
  }
  if (!std::is_sorted(keyed.begin(), keyed.end())) std::sort(keyed.begin(), keyed.end());
  std::vector<HourlyLocation> out;
  std::vector<CellId> cells;
  for (size_t i = 0; i < keyed.size();) {
    size_t j = i;
    cells.clear();
    while (j < keyed.size() && keyed[j].first == keyed[i].first) cells.push_back(keyed[j++].second);
    int64_t slot = keyed[i].first;
    int32_t day = static_cast<int32_t>(slot >= 0 ? slot / 24 : -((-slot + 23) / 24));
    out.push_back({Day{day}, static_cast<int>(slot - int64_t{day} * 24), mode_cell(cells)});
    i = j;
  }
  return out;
}

std::vector<HourlyLocation> hourly(const Trajectory &trajectory, int32_t utc_offset_seconds) {
  return hourly(std::span<const CdrEvent>(trajectory.events), utc_offset_seconds);
}

DailySeries daily(std::span<const HourlyLocation> hours) {
  // Night hours 0-7 belong to the previous day's night set.
  std::map<int32_t, std::pair<std::vector<CellId>, std::vector<CellId>>> per_day;
  for (const auto &h : hours) {
    if (h.hour >= kNightStartHour) per_day[h.day.value].first.push_back(h.cell);
    else if (h.hour < kDayStartHour) per_day[h.day.value - 1].first.push_back(h.cell);
    else per_day[h.day.value].second.push_back(h.cell);
  }
  DailySeries out;
  out.reserve(per_day.size());
  for (const auto &[day, sets] : per_day) {
    const auto &[night, daytime] = sets;
    out.push_back({Day{day}, mode_cell(night.empty() ? daytime : night)});
  }
  return out;
}

MonthlySeries monthly(const DailySeries &days, int32_t min_month_days) {
  MonthlySeries out;
  std::vector<CellId> cells;
  for (size_t i = 0; i < days.size();) {
    MonthKey m = month_key(days[i].day);
    cells.clear();
    size_t j = i;
    while (j < days.size() && month_key(days[j].day) == m) cells.push_back(days[j++].cell);
    if (static_cast<int32_t>(cells.size()) >= min_month_days)
      out.push_back({m, mode_cell(cells), static_cast<int32_t>(cells.size())});
    i = j;
  }
  return out;
}

}  // namespace cdrmig
