#include "cdrmig/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "cdrmig/textio.hpp"

namespace cdrmig {

std::optional<CdrRecord> parse_cdr_line(std::string_view line, const LocationNetwork &network,
                                        ParseCounters &counters) {
  ++counters.lines;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  size_t c1 = line.find(',');
  size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
  if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos ||
      c1 == 0 || c2 + 1 >= line.size()) {
    ++counters.malformed;
    return std::nullopt;
  }
  std::string_view ts = line.substr(c1 + 1, c2 - c1 - 1);
  int64_t t = 0;
  auto r = std::from_chars(ts.data(), ts.data() + ts.size(), t);
  if (r.ec != std::errc{} || r.ptr != ts.data() + ts.size()) {
    ++counters.malformed;
    return std::nullopt;
  }
  CellId cell = network.cell_of(line.substr(c2 + 1));
  if (cell == kNoCell) {
    ++counters.unknown_tower;
    return std::nullopt;
  }
  ++counters.accepted;
  return CdrRecord{std::string(line.substr(0, c1)), t, cell};
}

std::vector<CdrRecord> parse_cdr_file(const std::filesystem::path &path,
                                      const LocationNetwork &network, ParseCounters &counters) {
  LineReader in(path);
  std::vector<CdrRecord> out;
  std::string line;
  bool first = true;
  while (in.next(line)) {
    if (first && line.rfind("user_id,", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    if (auto rec = parse_cdr_line(line, network, counters)) out.push_back(std::move(*rec));
  }
  return out;
}

std::vector<Trajectory> group_trajectories(std::vector<CdrRecord> records) {
  std::map<std::string, std::vector<CdrEvent>> by_user;
  for (auto &r : records) by_user[std::move(r.user)].push_back({r.timestamp, r.cell});
  std::vector<Trajectory> out;
  out.reserve(by_user.size());
  for (auto &[user, events] : by_user) {
    std::sort(events.begin(), events.end());
    out.push_back({user, std::move(events)});
  }
  return out;
}

ObservationProfile profile_days(std::vector<Day> days) {
  std::sort(days.begin(), days.end());
  days.erase(std::unique(days.begin(), days.end()), days.end());
  ObservationProfile p;
  if (days.empty()) return p;
  p.first_day = days.front();
  p.last_day = days.back();
  p.span_days = span_days(p.first_day, p.last_day);
  p.days_observed = static_cast<int32_t>(days.size());
  p.frac_observed = static_cast<double>(p.days_observed) / p.span_days;
  for (size_t i = 1; i < days.size(); ++i)
    p.max_gap_days = std::max(p.max_gap_days, days[i] - days[i - 1] - 1);
  return p;
}

ObservationProfile profile(const Trajectory &trajectory, int32_t utc_offset_seconds) {
  std::vector<Day> days;
  days.reserve(trajectory.events.size());
  for (const auto &e : trajectory.events)
    days.push_back(to_day_hour(e.timestamp, utc_offset_seconds).day);
  return profile_days(std::move(days));
}

bool is_bot(int64_t records, const ObservationProfile &p, double max_avg) {
  if (p.span_days <= 0) return false;
  return static_cast<double>(records) > max_avg * p.span_days;
}

BotFilterResult filter_bots(std::vector<Trajectory> trajectories, double max_avg,
                            int32_t utc_offset_seconds) {
  BotFilterResult out;
  for (auto &t : trajectories) {
    auto p = profile(t, utc_offset_seconds);
    auto n = static_cast<int64_t>(t.events.size());
    if (is_bot(n, p, max_avg)) {
      ++out.removed_users;
      out.removed_records += n;
    } else {
      out.kept.push_back(std::move(t));
    }
  }
  return out;
}

void FilterConstraints::validate() const {
  if (min_span_days < 1) throw ConfigError("min_span_days must be >= 1");
  if (!(min_frac_observed > 0 && min_frac_observed <= 1))
    throw ConfigError("min_frac_observed must lie in (0, 1]");
  if (max_gap_days < 0) throw ConfigError("max_gap_days must be >= 0");
}

bool satisfies(const ObservationProfile &p, const FilterConstraints &c) {
  // Fraction compared on counts so 264/330 against 0.8 is not lost to rounding.
  return p.span_days >= c.min_span_days &&
         static_cast<double>(p.days_observed) + 1e-9 >= c.min_frac_observed * p.span_days &&
         p.max_gap_days <= c.max_gap_days;
}

}  // namespace cdrmig
