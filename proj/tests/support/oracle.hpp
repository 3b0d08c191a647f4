#pragma once

// Brute-force references for the tests. Nothing here touches the segment
// machinery: the table comes straight from planted truth, and observation
// status from enumerating every completion consistent with the observed days.

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "cdrmig/aggregation.hpp"
#include "cdrmig/synth.hpp"

namespace oracle {

using cdrmig::CellId;
using cdrmig::Day;
using cdrmig::HalfMonth;

struct Table {
  std::map<std::tuple<std::string, std::string, int32_t>, std::array<double, 3>> counts;
  std::map<std::pair<std::string, int32_t>, std::array<double, 3>> observed;
};

struct TruthParams {
  int32_t tau = 20;
  int32_t sigma = 8;
  int32_t edge_units = 1;  // dropped at each end of [first, last]
};

/// Day-level truth: every run of >= tau days away from home is a migration.
/// Every agent is observed in every unit.
Table truth_table(const cdrmig::GroundTruth &truth, const cdrmig::LocationNetwork &network,
                  const TruthParams &params);

Table from_pipeline(const cdrmig::MigrationTable &table, const Table &reference_keys);

/// Human-readable differences, empty when equal.
std::vector<std::string> diff(const Table &expected, const Table &actual);

struct Verdict {
  bool possible = false;  // some consistent completion has the event in t
  bool certain = false;   // every consistent completion has it
};

struct EnumParams {
  int32_t tau = 20;
  int32_t eps_gap = 7;
  int32_t eps_tol = 7;
  int32_t sigma = 8;
  int32_t horizon = 400;  // how far entry and exit stays may extend
};

/// Observed days of one user with a known home cell.
Verdict enumerate(const cdrmig::DailySeries &days, CellId home, HalfMonth t, cdrmig::Measure m,
                  const EnumParams &params);

}  // namespace oracle
