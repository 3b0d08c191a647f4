#pragma once

// CDR ingestion: parsing, per-user trajectories, bot removal, observation
// profiles and subset selection.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdrmig/dates.hpp"
#include "cdrmig/network.hpp"

namespace cdrmig {

struct CdrRecord {
  std::string user;
  int64_t timestamp = 0;
  CellId cell = kNoCell;
};

struct CdrEvent {
  int64_t timestamp = 0;
  CellId cell = kNoCell;
  friend bool operator==(const CdrEvent &, const CdrEvent &) = default;
  friend auto operator<=>(const CdrEvent &, const CdrEvent &) = default;
};

struct Trajectory {
  std::string user;
  std::vector<CdrEvent> events;  // ascending (timestamp, cell)
};

struct ParseCounters {
  int64_t lines = 0;
  int64_t malformed = 0;
  int64_t unknown_tower = 0;
  int64_t accepted = 0;
};

/// Parses one `user_id,timestamp,tower_id` line. Malformed lines and unknown
/// towers are counted and yield nothing.
std::optional<CdrRecord> parse_cdr_line(std::string_view line, const LocationNetwork &network,
                                        ParseCounters &counters);

/// Reads a whole CDR file (plain or gzip). A leading `user_id,...` header is
/// skipped. For small inputs and tests; large corpora go through ingest().
std::vector<CdrRecord> parse_cdr_file(const std::filesystem::path &path,
                                      const LocationNetwork &network, ParseCounters &counters);

/// Groups records into time-sorted trajectories, ordered by user id.
std::vector<Trajectory> group_trajectories(std::vector<CdrRecord> records);

struct ObservationProfile {
  Day first_day;
  Day last_day;
  int32_t span_days = 0;
  int32_t days_observed = 0;
  double frac_observed = 0;
  int32_t max_gap_days = 0;
};

/// Profile from a set of distinct observed days (any order, duplicates ok).
ObservationProfile profile_days(std::vector<Day> days);
ObservationProfile profile(const Trajectory &trajectory, int32_t utc_offset_seconds = 0);

inline constexpr double kBotMaxAvgRecordsPerDay = 100.0;

/// True when the user averages strictly more than `max_avg` records per day
/// of their own observation span.
bool is_bot(int64_t records, const ObservationProfile &p, double max_avg = kBotMaxAvgRecordsPerDay);

struct BotFilterResult {
  std::vector<Trajectory> kept;
  int64_t removed_users = 0;
  int64_t removed_records = 0;
};
BotFilterResult filter_bots(std::vector<Trajectory> trajectories,
                            double max_avg = kBotMaxAvgRecordsPerDay,
                            int32_t utc_offset_seconds = 0);

struct FilterConstraints {
  int32_t min_span_days = 1;
  double min_frac_observed = 0.0;
  int32_t max_gap_days = 0;

  static FilterConstraints subset_a() { return {330, 0.80, 15}; }
  static FilterConstraints subset_b() { return {250, 0.50, 25}; }
  void validate() const;
};

bool satisfies(const ObservationProfile &p, const FilterConstraints &c);

}  // namespace cdrmig
