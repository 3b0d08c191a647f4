#pragma once

// Spatial partition of the study area: towers grouped into cells, cells
// labelled urban/rural and mapped to aggregation regions.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace cdrmig {

using CellId = int32_t;
inline constexpr CellId kNoCell = -1;

enum class Zone { urban, rural };
const char *zone_name(Zone z);
Zone parse_zone(std::string_view s);

struct Tower {
  std::string id;
  double x = 0;  // projected metres
  double y = 0;
};

struct Point {
  double x = 0;
  double y = 0;
};

struct CityPolygon {
  std::string id;
  std::vector<Point> ring;  // closed ring; closing vertex optional
};

struct Cell {
  CellId id = 0;
  std::vector<std::string> towers;  // sorted
  Zone zone = Zone::rural;
  std::string region;
};

class LocationNetwork {
 public:
  LocationNetwork() = default;
  explicit LocationNetwork(std::vector<Cell> cells);

  const std::vector<Cell> &cells() const { return cells_; }
  const Cell &cell(CellId id) const { return cells_.at(static_cast<size_t>(id)); }
  size_t size() const { return cells_.size(); }
  size_t tower_count() const { return tower_to_cell_.size(); }

  /// Cell of a tower, or kNoCell if the tower is unknown.
  CellId cell_of(std::string_view tower_id) const;

  /// Region identifier per cell id.
  const std::string &region_of(CellId id) const { return cell(id).region; }

  size_t urban_count() const;
  size_t region_count() const;

 private:
  std::vector<Cell> cells_;
  std::unordered_map<std::string, CellId> tower_to_cell_;
};

/// Groups towers into cells. Towers inside a city polygon form one urban
/// cell per polygon; remaining towers are single-linkage clustered at
/// distance strictly below merge_radius, clusters of two or more becoming
/// urban cells and singletons rural cells. Cell ids follow the ascending
/// order of each cell's smallest tower id. Each cell starts as its own region.
LocationNetwork build_network(const std::vector<Tower> &towers,
                              const std::vector<CityPolygon> &cities, double merge_radius);

struct RegionAssignment {
  std::string region;
  Zone zone = Zone::rural;
};

/// Applies a prepared cell -> region table. Urban cells must keep a region of
/// their own; rural cells may share a district-level region.
LocationNetwork assign_regions(const LocationNetwork &network,
                               const std::map<CellId, RegionAssignment> &table);

bool point_in_polygon(Point p, const std::vector<Point> &ring);

std::vector<Tower> read_towers(const std::filesystem::path &path);
std::vector<CityPolygon> read_city_polygons(const std::filesystem::path &path);
std::map<CellId, RegionAssignment> read_region_table(const std::filesystem::path &path);

/// `tower_id,cell_id,zone`, rows ordered by cell then tower.
void write_network(const LocationNetwork &network, const std::filesystem::path &path);
LocationNetwork read_network(const std::filesystem::path &path);
void write_region_table(const LocationNetwork &network, const std::filesystem::path &path);

}  // namespace cdrmig
