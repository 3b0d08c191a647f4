#include "cdrmig/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cdrmig/textio.hpp"

namespace cdrmig {

const char *zone_name(Zone z) { return z == Zone::urban ? "urban" : "rural"; }

Zone parse_zone(std::string_view s) {
  if (s == "urban") return Zone::urban;
  if (s == "rural") return Zone::rural;
  throw DataError("unknown zone '" + std::string(s) + "'");
}

LocationNetwork::LocationNetwork(std::vector<Cell> cells) : cells_(std::move(cells)) {
  for (const auto &c : cells_)
    for (const auto &t : c.towers) tower_to_cell_.emplace(t, c.id);
}

CellId LocationNetwork::cell_of(std::string_view tower_id) const {
  auto it = tower_to_cell_.find(std::string(tower_id));
  return it == tower_to_cell_.end() ? kNoCell : it->second;
}

size_t LocationNetwork::urban_count() const {
  return static_cast<size_t>(std::count_if(cells_.begin(), cells_.end(),
                                           [](const Cell &c) { return c.zone == Zone::urban; }));
}

size_t LocationNetwork::region_count() const {
  std::set<std::string> regions;
  for (const auto &c : cells_) regions.insert(c.region);
  return regions.size();
}

bool point_in_polygon(Point p, const std::vector<Point> &ring) {
  bool inside = false;
  size_t n = ring.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point &a = ring[i];
    const Point &b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xcross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < xcross) inside = !inside;
    }
  }
  return inside;
}

namespace {

struct DisjointSet {
  std::vector<size_t> parent;
  explicit DisjointSet(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  size_t find(size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(size_t a, size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

LocationNetwork build_network(const std::vector<Tower> &towers,
                              const std::vector<CityPolygon> &cities, double merge_radius) {
  if (towers.empty()) throw DataError("tower list is empty");
  if (!(merge_radius >= 0)) throw ConfigError("merge radius must be non-negative");

  // Canonical order makes the result independent of input order.
  std::vector<Tower> sorted = towers;
  std::sort(sorted.begin(), sorted.end(),
            [](const Tower &a, const Tower &b) { return a.id < b.id; });
  std::set<std::pair<double, double>> coords;
  for (size_t i = 0; i < sorted.size(); ++i) {
    const auto &t = sorted[i];
    if (!std::isfinite(t.x) || !std::isfinite(t.y))
      throw DataError("tower " + t.id + " has non-finite coordinates");
    if (i > 0 && sorted[i - 1].id == t.id) throw DataError("duplicate tower id " + t.id);
    if (!coords.emplace(t.x, t.y).second)
      throw DataError("tower " + t.id + " duplicates the coordinates of another tower");
  }

  // Polygon membership; a tower inside several polygons goes to the first one
  // in polygon-id order.
  std::vector<const CityPolygon *> polys;
  for (const auto &c : cities) polys.push_back(&c);
  std::sort(polys.begin(), polys.end(),
            [](const CityPolygon *a, const CityPolygon *b) { return a->id < b->id; });

  const size_t n = sorted.size();
  std::vector<int> city_of(n, -1);
  for (size_t i = 0; i < n; ++i) {
    for (size_t p = 0; p < polys.size(); ++p) {
      if (point_in_polygon({sorted[i].x, sorted[i].y}, polys[p]->ring)) {
        city_of[i] = static_cast<int>(p);
        break;
      }
    }
  }

  DisjointSet sets(n);
  std::vector<size_t> first_in_city(polys.size(), n);
  for (size_t i = 0; i < n; ++i) {
    if (city_of[i] < 0) continue;
    auto &f = first_in_city[static_cast<size_t>(city_of[i])];
    if (f == n) f = i;
    else sets.unite(f, i);
  }

  // Single linkage among the towers outside every city polygon, bucketed on
  // a grid of merge_radius so only neighbouring buckets are compared.
  std::vector<size_t> free_towers;
  for (size_t i = 0; i < n; ++i)
    if (city_of[i] < 0) free_towers.push_back(i);
  if (merge_radius > 0 && free_towers.size() > 1) {
    std::map<std::pair<int64_t, int64_t>, std::vector<size_t>> grid;
    auto key = [&](const Tower &t) {
      return std::pair<int64_t, int64_t>{static_cast<int64_t>(std::floor(t.x / merge_radius)),
                                         static_cast<int64_t>(std::floor(t.y / merge_radius))};
    };
    for (size_t i : free_towers) grid[key(sorted[i])].push_back(i);
    const double r2 = merge_radius * merge_radius;
    for (size_t i : free_towers) {
      auto [gx, gy] = key(sorted[i]);
      for (int64_t dx = -1; dx <= 1; ++dx)
        for (int64_t dy = -1; dy <= 1; ++dy) {
          auto it = grid.find({gx + dx, gy + dy});
          if (it == grid.end()) continue;
          for (size_t j : it->second) {
            if (j <= i) continue;
            double ddx = sorted[i].x - sorted[j].x, ddy = sorted[i].y - sorted[j].y;
            if (ddx * ddx + ddy * ddy < r2) sets.unite(i, j);
          }
        }
    }
  }

  // Roots are the smallest index in each set, i.e. the smallest tower id, so
  // iterating roots in index order yields the required id order.
  std::map<size_t, std::vector<size_t>> members;
  for (size_t i = 0; i < n; ++i) members[sets.find(i)].push_back(i);

  std::vector<Cell> cells;
  cells.reserve(members.size());
  for (const auto &[root, idx] : members) {
    Cell c;
    c.id = static_cast<CellId>(cells.size());
    for (size_t i : idx) c.towers.push_back(sorted[i].id);
    c.zone = (city_of[root] >= 0 || idx.size() >= 2) ? Zone::urban : Zone::rural;
    c.region = "cell" + std::to_string(c.id);
    cells.push_back(std::move(c));
  }
  return LocationNetwork(std::move(cells));
}

LocationNetwork assign_regions(const LocationNetwork &network,
                               const std::map<CellId, RegionAssignment> &table) {
  std::vector<Cell> cells = network.cells();
  std::map<std::string, int> region_users;
  for (auto &c : cells) {
    auto it = table.find(c.id);
    if (it == table.end())
      throw DataError("region table has no entry for cell " + std::to_string(c.id));
    if (it->second.zone != c.zone)
      throw DataError("region table zone for cell " + std::to_string(c.id) +
                      " disagrees with the network");
    c.region = it->second.region;
    ++region_users[c.region];
  }
  for (const auto &c : cells)
    if (c.zone == Zone::urban && region_users[c.region] > 1)
      throw DataError("urban cell " + std::to_string(c.id) + " shares region '" + c.region + "'");
  return LocationNetwork(std::move(cells));
}

std::vector<Tower> read_towers(const std::filesystem::path &path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw DataError(path.string() + ": empty tower file");
  expect_header(line, {"tower_id", "x", "y"}, path);
  std::vector<Tower> out;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 3) throw DataError(path.string() + ": malformed row '" + line + "'");
    out.push_back({std::string(f[0]), parse_double(f[1]), parse_double(f[2])});
  }
  return out;
}

std::vector<CityPolygon> read_city_polygons(const std::filesystem::path &path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) return {};
  expect_header(line, {"polygon_id", "vertex_index", "x", "y"}, path);
  std::map<std::string, std::map<int64_t, Point>> rings;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 4) throw DataError(path.string() + ": malformed row '" + line + "'");
    rings[std::string(f[0])][parse_int(f[1])] = {parse_double(f[2]), parse_double(f[3])};
  }
  std::vector<CityPolygon> out;
  for (auto &[id, verts] : rings) {
    CityPolygon p{id, {}};
    for (auto &[_, v] : verts) p.ring.push_back(v);
    if (p.ring.size() > 1 && p.ring.front().x == p.ring.back().x &&
        p.ring.front().y == p.ring.back().y)
      p.ring.pop_back();
    if (p.ring.size() < 3) throw DataError("polygon " + id + " has fewer than 3 vertices");
    out.push_back(std::move(p));
  }
  return out;
}

std::map<CellId, RegionAssignment> read_region_table(const std::filesystem::path &path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw DataError(path.string() + ": empty region table");
  expect_header(line, {"cell_id", "region_id", "zone"}, path);
  std::map<CellId, RegionAssignment> out;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 3) throw DataError(path.string() + ": malformed row '" + line + "'");
    out[static_cast<CellId>(parse_int(f[0]))] = {std::string(f[1]), parse_zone(f[2])};
  }
  return out;
}

void write_network(const LocationNetwork &network, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("tower_id,cell_id,zone");
  for (const auto &c : network.cells())
    for (const auto &t : c.towers)
      out.line(t + "," + std::to_string(c.id) + "," + zone_name(c.zone));
  out.close();
}

LocationNetwork read_network(const std::filesystem::path &path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw DataError(path.string() + ": empty network file");
  expect_header(line, {"tower_id", "cell_id", "zone"}, path);
  std::map<CellId, Cell> cells;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 3) throw DataError(path.string() + ": malformed row '" + line + "'");
    auto id = static_cast<CellId>(parse_int(f[1]));
    auto &c = cells[id];
    c.id = id;
    c.zone = parse_zone(f[2]);
    c.towers.emplace_back(f[0]);
  }
  std::vector<Cell> out;
  for (auto &[id, c] : cells) {
    if (id != static_cast<CellId>(out.size()))
      throw DataError(path.string() + ": cell ids are not contiguous from 0");
    std::sort(c.towers.begin(), c.towers.end());
    c.region = "cell" + std::to_string(id);
    out.push_back(std::move(c));
  }
  return LocationNetwork(std::move(out));
}

void write_region_table(const LocationNetwork &network, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("cell_id,region_id,zone");
  for (const auto &c : network.cells())
    out.line(std::to_string(c.id) + "," + c.region + "," + zone_name(c.zone));
  out.close();
}

}  // namespace cdrmig
