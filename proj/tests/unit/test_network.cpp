#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "cdrmig/network.hpp"
#include "cdrmig/textio.hpp"
#include "tmpdir.hpp"

using namespace cdrmig;

namespace {

// Single-linkage reference: union-find over all pairs below the radius.
std::vector<int> components(const std::vector<Tower> &towers, double radius) {
  std::vector<int> parent(towers.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (size_t i = 0; i < towers.size(); ++i)
    for (size_t j = i + 1; j < towers.size(); ++j)
      if (std::hypot(towers[i].x - towers[j].x, towers[i].y - towers[j].y) < radius)
        parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
  std::vector<int> out(towers.size());
  for (size_t i = 0; i < towers.size(); ++i) out[i] = find(static_cast<int>(i));
  return out;
}

}  // namespace

TEST_CASE("distant towers stay rural singletons") {
  auto net = build_network({{"T1", 0, 0}, {"T2", 10000, 0}, {"T3", 5000, 10000}}, {}, 2000);
  CHECK(net.size() == 3);
  CHECK(net.urban_count() == 0);
  CHECK(net.region_count() == 3);
}

TEST_CASE("towers within the merge radius form one urban cell") {
  auto net = build_network({{"T1", 0, 0}, {"T2", 1500, 0}}, {}, 2000);
  REQUIRE(net.size() == 1);
  CHECK(net.cell(0).zone == Zone::urban);
  CHECK(net.cell(0).towers == std::vector<std::string>{"T1", "T2"});
  CHECK(net.cell_of("T2") == 0);
  CHECK(net.cell_of("T9") == kNoCell);
}

TEST_CASE("merge distance is strict") {
  auto net = build_network({{"T1", 0, 0}, {"T2", 2000, 0}}, {}, 2000);
  CHECK(net.size() == 2);
}

TEST_CASE("polygon towers join their city cell") {
  CityPolygon city{"C", {{-100, -100}, {100, -100}, {100, 100}, {-100, 100}}};
  auto net = build_network({{"T1", 0, 0}, {"T2", 50, 50}, {"T3", 50000, 0}}, {city}, 10);
  REQUIRE(net.size() == 2);
  CHECK(net.cell(net.cell_of("T1")).zone == Zone::urban);
  CHECK(net.cell_of("T1") == net.cell_of("T2"));
  CHECK(net.cell(net.cell_of("T3")).zone == Zone::rural);
}

TEST_CASE("point in polygon") {
  std::vector<Point> tri{{0, 0}, {10, 0}, {0, 10}};
  CHECK(point_in_polygon({1, 1}, tri));
  CHECK_FALSE(point_in_polygon({9, 9}, tri));
}

TEST_CASE("rejected tower inputs") {
  CHECK_THROWS_AS(build_network({}, {}, 2000), DataError);
  CHECK_THROWS_AS(build_network({{"T1", 0, 0}, {"T2", 0, 0}}, {}, 2000), DataError);
}

TEST_CASE("cell ids do not depend on input order") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 20000);
  std::vector<Tower> towers;
  for (int i = 0; i < 60; ++i) towers.push_back({"T" + std::to_string(100 + i), u(rng), u(rng)});
  auto a = build_network(towers, {}, 2000);
  std::shuffle(towers.begin(), towers.end(), rng);
  auto b = build_network(towers, {}, 2000);
  for (const auto &t : towers) CHECK(a.cell_of(t.id) == b.cell_of(t.id));
}

TEST_CASE("clustering matches a pairwise single-linkage reference") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 15000);
  for (int round = 0; round < 20; ++round) {
    std::vector<Tower> towers;
    for (int i = 0; i < 40; ++i) towers.push_back({"T" + std::to_string(1000 + i), u(rng), u(rng)});
    auto net = build_network(towers, {}, 2000);
    auto comp = components(towers, 2000);
    for (size_t i = 0; i < towers.size(); ++i)
      for (size_t j = i + 1; j < towers.size(); ++j)
        CHECK((comp[i] == comp[j]) == (net.cell_of(towers[i].id) == net.cell_of(towers[j].id)));
    for (size_t i = 0; i < towers.size(); ++i) {
      auto size = std::count(comp.begin(), comp.end(), comp[i]);
      CHECK((net.cell(net.cell_of(towers[i].id)).zone == Zone::urban) == (size > 1));
    }
  }
}

TEST_CASE("region assignment") {
  auto net = build_network({{"U1", 0, 0}, {"U2", 100, 0}, {"V1", 50000, 0}, {"V2", 50100, 0},
                            {"R1", 100000, 0}, {"R2", 200000, 0}, {"R3", 300000, 0}},
                           {}, 2000);
  REQUIRE(net.size() == 5);
  std::map<CellId, RegionAssignment> table;
  for (const auto &c : net.cells())
    table[c.id] = c.zone == Zone::urban ? RegionAssignment{"city" + std::to_string(c.id), Zone::urban}
                                        : RegionAssignment{"D", Zone::rural};
  CHECK(assign_regions(net, table).region_count() == 3);

  auto rural = build_network({{"A", 0, 0}, {"B", 1e5, 0}, {"C", 2e5, 0}, {"D", 3e5, 0}, {"E", 4e5, 0}}, {}, 2000);
  std::map<CellId, RegionAssignment> identity;
  for (const auto &c : rural.cells()) identity[c.id] = {"r" + std::to_string(c.id), Zone::rural};
  CHECK(assign_regions(rural, identity).region_count() == 5);

  identity.erase(0);
  CHECK_THROWS_AS(assign_regions(rural, identity), DataError);

  std::vector<CellId> urban;
  for (const auto &c : net.cells())
    if (c.zone == Zone::urban) urban.push_back(c.id);
  REQUIRE(urban.size() == 2);
  table[urban[0]].region = table[urban[1]].region;
  CHECK_THROWS_AS(assign_regions(net, table), DataError);
}

TEST_CASE("network file round trip") {
  testutil::TempDir dir;
  auto net = build_network({{"T1", 0, 0}, {"T2", 1500, 0}, {"T3", 9000, 0}}, {}, 2000);
  write_network(net, dir / "network.csv");
  auto back = read_network(dir / "network.csv");
  REQUIRE(back.size() == net.size());
  for (const auto &c : net.cells()) {
    CHECK(back.cell(c.id).towers == c.towers);
    CHECK(back.cell(c.id).zone == c.zone);
  }
}

TEST_CASE("tower file parsing") {
  testutil::TempDir dir;
  testutil::write_file(dir / "t.csv", "tower_id,x,y\nT1,0,0\nT2,1500,0\n");
  auto towers = read_towers(dir / "t.csv");
  REQUIRE(towers.size() == 2);
  CHECK(towers[1].x == 1500);
  testutil::write_file(dir / "bad.csv", "tower_id,x,y\nT1,0\n");
  CHECK_THROWS_AS(read_towers(dir / "bad.csv"), DataError);
}
