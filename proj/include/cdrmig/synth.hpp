#pragma once

// Synthetic agents with planted temporary migrations, their CDR streams, and
// the observation thinning used in accuracy experiments.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cdrmig/ingest.hpp"
#include "cdrmig/weighting.hpp"

namespace cdrmig {

struct ScenarioConfig {
  uint64_t seed = 42;
  int32_t agents = 1000;
  int32_t cells = 50;
  Day start = make_day(2013, 1, 1);
  int32_t days = 730;

  double events_per_agent = 3.0;  // Poisson mean
  int32_t event_min_days = 20;
  int32_t event_max_days = 180;  // durations log-uniform in [min, max]
  int32_t event_cap_days = 0;    // > 0 clips sampled durations
  int32_t event_edge_margin_days = 30;
  int32_t event_spacing_days = 8;  // home days between consecutive events
  double max_event_share = 0.4;    // of the span spent away, per agent
  bool distinct_destinations = false;  // no destination repeats within an agent

  double records_per_day = 3.0;  // mean of 1 + Poisson(mean - 1)
  double micro_trip_rate = 0.01;  // per home day
  int32_t micro_trip_max_days = 3;
  int32_t micro_trip_margin_days = 8;  // from any planted event

  double day_dropout = 0.0;  // chance an individual day has no record
  double gap_rate = 0.0;     // chance per day of starting a multi-day gap
  double gap_mean_days = 10.0;

  double tower_spacing = 5000.0;  // metres between synthetic towers

  void validate() const;
  /// Plain-text `key=value` lines; `#` starts a comment. Unknown keys throw.
  static ScenarioConfig parse(const std::string &text);
  static ScenarioConfig load(const std::filesystem::path &path);
  std::string to_text() const;
};

struct PlantedEvent {
  CellId destination = kNoCell;
  Day start;
  int32_t duration = 0;
  Day end() const { return start + (duration - 1); }
};

struct AgentTruth {
  std::string user;
  CellId home = kNoCell;
  std::vector<PlantedEvent> events;  // sorted, non-overlapping
  std::vector<PlantedEvent> micro_trips;
};

struct GroundTruth {
  Day first_day;
  Day last_day;
  std::vector<AgentTruth> agents;
};

struct SyntheticCorpus {
  GroundTruth truth;
  std::vector<Tower> towers;        // tower i serves cell i
  std::vector<Trajectory> trajectories;  // ordered by user id
};

/// Synthetic cell ids coincide with tower order: tower "T0000" is cell 0.
std::string synthetic_tower_id(CellId c);
std::string synthetic_user_id(int32_t i);

SyntheticCorpus generate(const ScenarioConfig &config);

/// Over-15 population and density per synthetic cell, seeded from the config.
std::map<CellId, CellPopulation> synthetic_population(const ScenarioConfig &config);

/// True location of an agent on a day (home, event destination or micro-trip).
CellId true_location(const AgentTruth &agent, Day d);

void write_truth(const GroundTruth &truth, const std::filesystem::path &path);
GroundTruth read_truth(const std::filesystem::path &path);
void write_cdr(const std::vector<Trajectory> &trajectories, const std::filesystem::path &path);
void write_towers(const std::vector<Tower> &towers, const std::filesystem::path &path);

struct ThinningSpec {
  int32_t delta_days = 360;
  double omega = 1.0;
  uint64_t seed = 1;
};

/// Keeps a random window of exactly `delta_days` (both ends observed) and
/// exactly ceil(omega * delta_days) observed days inside it, with all their
/// records. Returns false when the trajectory cannot satisfy the spec.
bool thin(const Trajectory &in, const ThinningSpec &spec, Trajectory &out);

}  // namespace cdrmig
