#pragma once

// Macro-segments (usual residence), meso-segments (stays) and their
// classification into temporary migration events.

#include <string>
#include <vector>

#include "cdrmig/location.hpp"

namespace cdrmig {

struct DetectionParams {
  int32_t tau_min_days = 20;   // shortest temporary migration
  int32_t tau_max_days = 180;  // longest temporary migration / shortest residence
  int32_t eps_gap_macro_months = 6;
  int32_t eps_gap_meso_days = 7;
  double phi = 0.5;  // minimum share of days at a stay's own cell

  void validate() const;
};

struct MacroSegment {
  CellId cell = kNoCell;
  Day start;
  Day end;
  friend bool operator==(const MacroSegment &, const MacroSegment &) = default;
};

struct MesoSegment {
  CellId cell = kNoCell;
  Day start;  // observed bounds, inclusive
  Day end;
  int32_t min_duration = 0;
  int32_t max_duration = 0;
  CellId macro_cell = kNoCell;
  double frac_days_at_location = 1.0;
  friend bool operator==(const MesoSegment &, const MesoSegment &) = default;
};

enum class SegmentClass {
  home,       // at the macro-location
  migration,  // elsewhere, observed duration >= tau_min
  ambiguous,  // elsewhere, observed < tau_min <= maximum duration
  short_stay  // elsewhere, maximum duration < tau_min
};
const char *class_name(SegmentClass c);

SegmentClass classify_segment(const MesoSegment &s, int32_t tau_min);

struct MigrationEvent {
  MesoSegment segment;
  CellId origin = kNoCell;
  CellId destination = kNoCell;
};

/// Mode of the daily series with the smallest-id tie rule.
CellId preliminary_home(const DailySeries &days);

std::vector<MacroSegment> detect_macro(const MonthlySeries &months, const DailySeries &days,
                                       const DetectionParams &params);

/// Unannotated stays: cell, observed bounds and share of days at the cell.
std::vector<MesoSegment> detect_meso(const DailySeries &days, const DetectionParams &params);

/// Fills min/max durations and the home context of each stay.
std::vector<MesoSegment> annotate(std::vector<MesoSegment> meso, const DailySeries &days,
                                  const std::vector<MacroSegment> &macros);

/// High-confidence migration events.
std::vector<MigrationEvent> classify(const std::vector<MesoSegment> &meso, int32_t tau_min);

/// Everything the aggregation stage needs to know about one user.
struct UserHistory {
  std::string user;
  Day first_day;
  Day last_day;
  std::vector<MacroSegment> macros;
  std::vector<MesoSegment> meso;  // annotated, sorted, disjoint
};

UserHistory detect_user(std::string user, const DailySeries &days, const DetectionParams &params);

/// Macro cell active on a given day: covering macro, else largest overlap
/// with [from, to], else nearest.
CellId macro_cell_for(const std::vector<MacroSegment> &macros, Day from, Day to);

}  // namespace cdrmig
