#pragma once

// Accuracy experiments on synthetic corpora (home location under thinning,
// migration recall) and selection-bias surfaces over filter constraints.

#include <array>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "cdrmig/segmentation.hpp"
#include "cdrmig/synth.hpp"
#include "cdrmig/weighting.hpp"

namespace cdrmig {

/// Spearman rank correlation with average ranks for ties. NaN when either
/// side is constant.
double spearman(const std::vector<double> &x, const std::vector<double> &y);

/// Location inference and segmentation for one trajectory.
UserHistory detect_trajectory(const Trajectory &t, const DetectionParams &params);

struct AccuracyCell {
  int32_t delta_days = 0;
  double omega = 0;
  int64_t users = 0;
  int64_t correct = 0;
  int64_t skipped = 0;  // trajectories that could not be thinned to the spec
  double accuracy() const { return users ? static_cast<double>(correct) / users : 0.0; }
};

std::vector<AccuracyCell> home_accuracy(const SyntheticCorpus &corpus, const std::vector<int32_t> &deltas,
                                        const std::vector<double> &omegas, uint64_t seed,
                                        const DetectionParams &params, int workers = 1);

struct RecallPoint {
  double omega = 0;
  int64_t events = 0;
  int64_t detected = 0;
  int64_t skipped = 0;
  double recall() const { return events ? static_cast<double>(detected) / events : 0.0; }
};

/// A planted event counts as detected when a non-home stay at its destination
/// with observed duration >= tau_min overlaps at least half of its days.
bool event_detected(const PlantedEvent &e, const UserHistory &h, int32_t tau_min);

std::vector<RecallPoint> migration_recall(const SyntheticCorpus &corpus, const std::vector<double> &omegas,
                                          int32_t delta_days, uint64_t seed,
                                          const DetectionParams &params, int workers = 1);

struct BiasInput {
  std::vector<ObservationProfile> profiles;  // one per user
  std::vector<CellId> homes;                 // parallel to profiles
  std::map<CellId, CellPopulation> population;
  std::set<CellId> capital;
};

struct BiasPoint {
  FilterConstraints constraints;
  int64_t users = 0;
  double capital_bias = 0;  // user share in the capital over population share
  std::array<double, 10> density_bins{};  // user shares over population deciles
};

/// Decile of each cell when cells are ranked by density and cut into ten
/// groups of equal population.
std::map<CellId, int> density_deciles(const std::map<CellId, CellPopulation> &population);

std::vector<BiasPoint> bias_surfaces(const BiasInput &input, const std::vector<FilterConstraints> &grid);

void write_accuracy_csv(const std::vector<AccuracyCell> &cells, const std::filesystem::path &path);
void write_recall_csv(const std::vector<RecallPoint> &points, const std::filesystem::path &path);
void write_bias_csv(const std::vector<BiasPoint> &points, const std::filesystem::path &path);

}  // namespace cdrmig
