#pragma once

// Per-unit rules turning one user's segment history into departures,
// returns, migration status and observation status for a half-month.
// Every rule carries the id of the diagram it implements, e.g.
// "depart_low_3" or "obs_stock_14".

#include <string_view>
#include <vector>

#include "cdrmig/segmentation.hpp"

namespace cdrmig {

enum class Confidence { high, low };  // low = high plus ambiguous segments
const char *confidence_name(Confidence c);
Confidence parse_confidence(std::string_view s);

struct RuleParams {
  int32_t tau_min_days = 20;
  int32_t eps_gap_meso_days = 7;
  int32_t eps_tol_days = 7;
  int32_t sigma_days = 8;
};

/// A meso-segment with its admissible extent: the earliest start `lo` and
/// latest end `hi` consistent with its neighbours.
struct TimelineSegment {
  CellId cell = kNoCell;
  CellId macro_cell = kNoCell;
  Day start, end;
  Day lo, hi;
  bool entry = false;  // no earlier segment
  bool exit = false;   // no later segment
  int32_t min_duration = 0;

  bool non_home() const { return cell != macro_cell; }
};

inline constexpr Day kMinusInfinity{-(1 << 28)};
inline constexpr Day kPlusInfinity{1 << 28};

/// Unobserved stretch between segments; `prev`/`next` are -1 at the sample
/// edges, where the gap is unbounded.
struct TimelineGap {
  Day start, end;
  int prev = -1;
  int next = -1;
};

struct Timeline {
  std::vector<MacroSegment> macros;
  std::vector<TimelineSegment> segments;
  std::vector<TimelineGap> gaps;
};

Timeline build_timeline(const UserHistory &history, const RuleParams &params);

struct RuleHit {
  CellId destination = kNoCell;
  const char *case_id = "";
};

std::vector<RuleHit> departures(const Timeline &tl, HalfMonth t, const RuleParams &p, Confidence c);
std::vector<RuleHit> returns(const Timeline &tl, HalfMonth t, const RuleParams &p, Confidence c);
/// At most one destination: the qualifying stay with the largest overlap,
/// high-confidence stays first.
std::vector<RuleHit> stock(const Timeline &tl, HalfMonth t, const RuleParams &p, Confidence c);

/// Observation-status case that makes the user unobserved for the measure,
/// or nullptr when the user counts as observed.
const char *departure_unobserved(const Timeline &tl, HalfMonth t, const RuleParams &p);
const char *return_unobserved(const Timeline &tl, HalfMonth t, const RuleParams &p);
const char *stock_unobserved(const Timeline &tl, HalfMonth t, const RuleParams &p);

/// All diagram ids the rule engine can emit.
const std::vector<std::string_view> &diagram_ids();

}  // namespace cdrmig
