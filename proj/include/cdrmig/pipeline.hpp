#pragma once

// Streaming ingestion, stage file formats and the end-to-end run.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdrmig/aggregation.hpp"
#include "cdrmig/ingest.hpp"
#include "cdrmig/location.hpp"
#include "cdrmig/segmentation.hpp"
#include "cdrmig/weighting.hpp"

namespace cdrmig {

/// Per-user summary kept after ingestion; its size grows with observed days,
/// not with records.
struct UserDays {
  std::string user;
  int64_t records = 0;
  ObservationProfile profile;
  DailySeries daily;
};

struct IngestStats {
  int64_t lines = 0;
  int64_t malformed = 0;
  int64_t unknown_tower = 0;
  int64_t accepted = 0;
  int64_t users = 0;  // before bot removal
  int64_t bots = 0;
  int64_t bot_records = 0;
  int partitions = 0;
};

struct IngestOptions {
  int workers = 1;
  int32_t utc_offset_seconds = 0;
  double bot_max_avg = kBotMaxAvgRecordsPerDay;
  std::filesystem::path spill_dir;  // empty: $CDRMIG_TMPDIR or the system temp dir
  int64_t partition_bytes = int64_t{32} << 20;  // input text per spill partition
};

struct IngestResult {
  IngestStats stats;
  std::vector<UserDays> users;  // bots removed, ordered by user id
};

/// Two passes: records are hash-partitioned by user into binary spill files,
/// then each partition is grouped and reduced to daily locations.
IngestResult ingest(const std::vector<std::filesystem::path> &cdr_files, const LocationNetwork &network,
                    const IngestOptions &options);

std::filesystem::path default_spill_dir();

// Stage files. Daily series: `user_id,day,cell_id`.
void write_daily(const std::vector<UserDays> &users, const std::filesystem::path &path);
std::vector<UserDays> read_daily(const std::filesystem::path &path);

// Profiles: `user_id,records,first_day,last_day,span_days,days_observed,frac_observed,max_gap_days`.
void write_profiles(const std::vector<UserDays> &users, const std::filesystem::path &path);
/// Fills records and profile of matching users; throws if a user is missing.
void read_profiles(const std::filesystem::path &path, std::vector<UserDays> &users);

// Segment dump: `user_id,kind,cell_id,start,end,min_dur,max_dur,macro_cell`.
void write_segments(const std::vector<UserHistory> &histories, const std::filesystem::path &path);
std::vector<UserHistory> read_segments(const std::filesystem::path &path);

std::vector<UserHistory> detect_all(const std::vector<UserDays> &users, const DetectionParams &params,
                                    int workers);

/// "auto" (one window over the data), "reference" (2013 and 2014-2015), or a
/// list `from:to[:tail_cap],...` of ISO dates.
std::vector<CorpusWindow> resolve_windows(const std::string &spec, const std::vector<UserHistory> &histories);

/// Computes outcomes for every half-month of the windows, in user order, and
/// hands them to `sink` one user at a time.
void for_each_outcome(const std::vector<UserHistory> &histories, const std::vector<CorpusWindow> &windows,
                      const AggregationParams &params, int workers,
                      const std::function<void(const UserOutcomes &)> &sink);

std::string dataset_name(bool weighted, const std::string &subset, int32_t tau);

struct RunConfig {
  std::vector<std::filesystem::path> cdr;
  std::filesystem::path towers;
  std::filesystem::path polygons;  // optional
  std::filesystem::path regions;   // optional
  double merge_radius = 2000;
  std::filesystem::path cell_population;  // weighting input, or
  std::filesystem::path strata;           // prepared strata file
  std::optional<double> rural_median;
  std::map<std::string, FilterConstraints> subsets{{"A", FilterConstraints::subset_a()},
                                                   {"B", FilterConstraints::subset_b()}};
  DetectionParams detection;
  AggregationParams aggregation;
  std::vector<int32_t> taus{20, 30, 60};
  bool weighting = true;
  std::string windows = "auto";
  int workers = 1;
  int32_t utc_offset_seconds = 0;
  std::filesystem::path spill_dir;
  std::filesystem::path out;

  void validate() const;
};

/// Writes the datasets and `run_report.txt` into config.out. On failure the
/// files written so far are removed and the error is rethrown.
std::vector<std::filesystem::path> run(const RunConfig &config);

/// Loads towers/polygons/regions into a network.
LocationNetwork load_network(const std::filesystem::path &towers, const std::filesystem::path &polygons,
                             const std::filesystem::path &regions, double merge_radius);

}  // namespace cdrmig
