#pragma once

// Post-stratification: users are weighted by the population over 15 of their
// home stratum divided by the number of that stratum's users observed at t.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "cdrmig/aggregation.hpp"

namespace cdrmig {

enum class StratumZone { urban, rural_low_density, rural_high_density };
const char *stratum_zone_name(StratumZone z);
StratumZone parse_stratum_zone(std::string_view s);

struct Stratum {
  std::string id;
  StratumZone zone = StratumZone::urban;
  std::vector<CellId> cells;
  double pop = 0;  // persons over 15
};

struct CellPopulation {
  double pop_over_15 = 0;
  double density = 0;
};

/// One stratum per city; rural cells of each district split into densities
/// strictly below `rural_median` and the rest. Empty strata are omitted.
/// Without a median, the median of rural cell densities is used.
std::vector<Stratum> build_strata(const LocationNetwork &network,
                                  const std::map<CellId, CellPopulation> &cells,
                                  std::optional<double> rural_median = std::nullopt);

double median(std::vector<double> v);

/// Cell table input: `cell_id,pop_over_15,density`.
std::map<CellId, CellPopulation> read_cell_population(const std::filesystem::path &path);
void write_cell_population(const std::map<CellId, CellPopulation> &cells, const std::filesystem::path &path);

/// Strata file: `stratum_id,cell_id,zone,pop_over_15,density`, one line per
/// cell; a stratum's population is the sum over its cells.
void write_strata(const std::vector<Stratum> &strata, const std::map<CellId, CellPopulation> &cells,
                  const std::filesystem::path &path);
std::vector<Stratum> read_strata(const std::filesystem::path &path);

class WeightTable {
 public:
  WeightTable(std::vector<Stratum> strata);

  /// Counts one user's observed (unit, measure) pairs under their home stratum.
  void observe(const UserOutcomes &outcomes);
  void merge(const WeightTable &other);

  std::optional<double> weight(CellId origin, HalfMonth t, Measure m) const;
  WeightFn fn() const;

  double observed_users(size_t stratum, HalfMonth t, Measure m) const;
  const std::vector<Stratum> &strata() const { return strata_; }
  std::optional<size_t> stratum_of(CellId cell) const;

  /// Summed population of strata with at least one observed user.
  double covered_pop(HalfMonth t, Measure m) const;
  double total_pop() const;
  std::vector<HalfMonth> units() const;
  int64_t unmapped_users() const { return unmapped_; }

  void write(const std::filesystem::path &path) const;

 private:
  std::vector<Stratum> strata_;
  std::unordered_map<CellId, size_t> cell_stratum_;
  std::map<std::tuple<size_t, int32_t, int>, double> observed_;
  int64_t unmapped_ = 0;
};

}  // namespace cdrmig
