#pragma once

// Half-month outcomes per user and their reduction into origin-destination
// tables of departures, returns and migrant stocks.

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "cdrmig/network.hpp"
#include "cdrmig/rules.hpp"
#include "cdrmig/textio.hpp"

namespace cdrmig {

struct AggregationParams {
  int32_t tau_min_days = 20;
  int32_t eps_gap_meso_days = 7;
  int32_t eps_tol_days = 7;
  int32_t sigma_days = 8;
  Confidence confidence = Confidence::high;

  void validate() const;
  RuleParams rules() const { return {tau_min_days, eps_gap_meso_days, eps_tol_days, sigma_days}; }
};

enum class Measure { depart = 0, ret = 1, stock = 2 };
inline constexpr std::array<Measure, 3> kMeasures{Measure::depart, Measure::ret, Measure::stock};
const char *measure_name(Measure m);
Measure parse_measure(std::string_view s);

enum class Status { no_event, event, unobserved };
const char *status_name(Status s);
Status parse_status(std::string_view s);

struct MeasureOutcome {
  Status status = Status::no_event;
  std::vector<CellId> destinations;  // sorted, only for events
  const char *case_id = "";          // diagram behind the verdict, "" if none
};

struct PeriodOutcome {
  HalfMonth t;
  CellId origin = kNoCell;  // home cell active during t
  std::array<MeasureOutcome, 3> measures;
  const MeasureOutcome &operator[](Measure m) const { return measures[static_cast<int>(m)]; }
  MeasureOutcome &operator[](Measure m) { return measures[static_cast<int>(m)]; }
};

struct UserOutcomes {
  std::string user;
  std::vector<PeriodOutcome> periods;
};

/// Outcomes for every half-month in [first, last].
UserOutcomes compute_outcomes(const UserHistory &history, HalfMonth first, HalfMonth last,
                              const AggregationParams &params);

/// Weight of a user contribution; nullopt excludes it.
using WeightFn = std::function<std::optional<double>(CellId origin, HalfMonth t, Measure m)>;

/// Contributions tallied per distinct weight, so totals do not depend on the
/// order users arrive in and a shared weight cancels exactly in rates.
class WeightedCount {
 public:
  void add(double weight, int64_t n = 1);
  void merge(const WeightedCount &other);
  double total() const;
  /// Sum with every weight divided by `scale`.
  double scaled(double scale) const;
  double max_weight() const { return parts_.empty() ? 0.0 : parts_.back().first; }
  bool empty() const { return parts_.empty(); }

 private:
  std::vector<std::pair<double, int64_t>> parts_;  // ascending weight
};

struct TableRow {
  std::string origin;
  std::string destination;
  HalfMonth t;
  std::array<double, 3> count{};     // depart, return, stock
  std::array<double, 3> observed{};  // users observed at origin, per measure
  std::array<std::optional<double>, 3> ratio{};  // count over observed; empty without observed users
  std::optional<double> rate(Measure m) const { return ratio[static_cast<int>(m)]; }
};

class MigrationTable {
 public:
  /// Adds one user's outcomes. Each user counts at most once per row.
  void add(const UserOutcomes &outcomes, const LocationNetwork &network,
           const WeightFn &weight = nullptr);
  void merge(const MigrationTable &other);
  /// Drops every row and denominator falling in one of the given units.
  void erase_units(const std::vector<HalfMonth> &units);

  /// Rows with at least one nonzero count, ordered by (origin, destination, t).
  std::vector<TableRow> rows() const;
  double observed(const std::string &origin, HalfMonth t, Measure m) const;
  int64_t excluded_contributions() const { return excluded_; }

 private:
  std::map<std::tuple<std::string, std::string, int32_t>, std::array<WeightedCount, 3>> counts_;
  std::map<std::pair<std::string, int32_t>, std::array<WeightedCount, 3>> observed_;
  int64_t excluded_ = 0;
};

void write_table(const MigrationTable &table, const std::filesystem::path &path, bool weighted);

/// Per-user outcome dump: one line per (user, unit, measure).
void write_outcomes_header(TextWriter &out);
void write_outcomes(TextWriter &out, const UserOutcomes &outcomes);
/// Reads a dump back, one callback per user (users must be contiguous).
void read_outcomes(const std::filesystem::path &path,
                   const std::function<void(UserOutcomes &&)> &sink);

/// A contiguous data-collection period. Estimates at its edges are dropped;
/// `tail_cap` > 0 limits how many trailing units go.
struct CorpusWindow {
  HalfMonth first;
  HalfMonth last;
  int32_t tail_cap = 0;
};

/// The two collection periods of the reference data: 2013, and 2014-2015
/// whose trailing exclusion never exceeds two half-months.
std::vector<CorpusWindow> reference_windows();

/// Half-months excluded at each window edge for a given minimum duration.
int32_t edge_units(int32_t tau_min_days);
std::vector<HalfMonth> excluded_units(int32_t tau_min_days, const std::vector<CorpusWindow> &windows);

}  // namespace cdrmig
