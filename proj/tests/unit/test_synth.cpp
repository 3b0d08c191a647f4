#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "cdrmig/location.hpp"
#include "cdrmig/textio.hpp"
#include "cdrmig/validate.hpp"
#include "tmpdir.hpp"

using namespace cdrmig;

namespace {

std::set<Day> observed_days(const Trajectory &t) {
  std::set<Day> out;
  for (const auto &e : t.events) out.insert(to_day_hour(e.timestamp).day);
  return out;
}

// Textbook Spearman: Pearson correlation of average ranks.
double reference_spearman(const std::vector<double> &x, const std::vector<double> &y) {
  auto ranks = [](const std::vector<double> &v) {
    std::vector<double> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) less += w < v[i], equal += w == v[i];
      r[i] = less + (equal + 1) / 2;
    }
    return r;
  };
  auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

ScenarioConfig quiet(int32_t agents) {
  ScenarioConfig cfg;
  cfg.agents = agents;
  cfg.days = 400;
  cfg.events_per_agent = 0;
  cfg.micro_trip_rate = 0;
  return cfg;
}

}  // namespace

TEST_CASE("the generator is deterministic in its seed") {
  testutil::TempDir dir;
  ScenarioConfig cfg;
  cfg.agents = 40;
  cfg.day_dropout = 0.1;
  cfg.gap_rate = 0.01;
  auto a = generate(cfg), b = generate(cfg);
  write_cdr(a.trajectories, dir / "a.csv");
  write_cdr(b.trajectories, dir / "b.csv");
  write_truth(a.truth, dir / "ta.csv");
  write_truth(b.truth, dir / "tb.csv");
  CHECK(testutil::read_file(dir / "a.csv") == testutil::read_file(dir / "b.csv"));
  CHECK(testutil::read_file(dir / "ta.csv") == testutil::read_file(dir / "tb.csv"));

  cfg.seed = 43;
  write_cdr(generate(cfg).trajectories, dir / "c.csv");
  CHECK(testutil::read_file(dir / "a.csv") != testutil::read_file(dir / "c.csv"));
}

TEST_CASE("agents without events stay home every day") {
  auto corpus = generate(quiet(5));
  REQUIRE(corpus.trajectories.size() == 5);
  for (size_t i = 0; i < 5; ++i) {
    const auto &agent = corpus.truth.agents[i];
    CHECK(agent.events.empty());
    for (const auto &e : corpus.trajectories[i].events) CHECK(e.cell == agent.home);
    CHECK(observed_days(corpus.trajectories[i]).size() == 400);
  }
}

TEST_CASE("records follow the true location") {
  ScenarioConfig cfg;
  cfg.agents = 60;
  cfg.days = 500;
  auto corpus = generate(cfg);
  int64_t away = 0;
  for (size_t i = 0; i < corpus.trajectories.size(); ++i) {
    const auto &agent = corpus.truth.agents[i];
    for (const auto &e : corpus.trajectories[i].events) {
      Day d = to_day_hour(e.timestamp).day;
      CHECK(e.cell == true_location(agent, d));
      away += e.cell != agent.home;
    }
    for (size_t k = 0; k < agent.events.size(); ++k) {
      const auto &ev = agent.events[k];
      CHECK(ev.duration >= cfg.event_min_days);
      CHECK(ev.duration <= cfg.event_max_days);
      CHECK(ev.destination != agent.home);
      CHECK(ev.start - corpus.truth.first_day >= cfg.event_edge_margin_days);
      if (k > 0) CHECK(ev.start - agent.events[k - 1].end() - 1 >= cfg.event_spacing_days);
    }
  }
  CHECK(away > 0);
}

TEST_CASE("truth and config files round trip") {
  testutil::TempDir dir;
  ScenarioConfig cfg;
  cfg.agents = 10;
  auto corpus = generate(cfg);
  write_truth(corpus.truth, dir / "truth.csv");
  auto back = read_truth(dir / "truth.csv");
  REQUIRE(back.agents.size() == corpus.truth.agents.size());
  for (size_t i = 0; i < back.agents.size(); ++i) {
    CHECK(back.agents[i].home == corpus.truth.agents[i].home);
    CHECK(back.agents[i].events.size() == corpus.truth.agents[i].events.size());
  }
  auto parsed = ScenarioConfig::parse(cfg.to_text());
  CHECK(parsed.to_text() == cfg.to_text());
  CHECK_THROWS_AS(ScenarioConfig::parse("agents=5\nbogus=1\n"), ConfigError);
  CHECK_THROWS_AS(ScenarioConfig::parse("agents=-5\n"), ConfigError);
}

TEST_CASE("thinning keeps an exact window and day count") {
  auto corpus = generate(quiet(1));
  const auto &full = corpus.trajectories[0];

  Trajectory out;
  REQUIRE(thin(full, {360, 1.0, 5}, out));
  auto kept = observed_days(out);
  CHECK(kept.size() == 360);
  CHECK(*kept.rbegin() - *kept.begin() == 359);
  for (const auto &e : full.events)
    if (kept.count(to_day_hour(e.timestamp).day))
      CHECK(std::find(out.events.begin(), out.events.end(), e) != out.events.end());

  REQUIRE(thin(full, {360, 0.5, 5}, out));
  kept = observed_days(out);
  CHECK(kept.size() == 180);
  CHECK(*kept.rbegin() - *kept.begin() == 359);

  std::mt19937_64 rng(9);
  for (int round = 0; round < 50; ++round) {
    int32_t delta = 30 + static_cast<int32_t>(rng() % 360);
    double omega = 0.05 + 0.95 * static_cast<double>(rng() % 1000) / 1000;
    REQUIRE(thin(full, {delta, omega, rng()}, out));
    kept = observed_days(out);
    CHECK(kept.size() == static_cast<size_t>(std::ceil(omega * delta - 1e-9)));
    CHECK(*kept.rbegin() - *kept.begin() == delta - 1);
  }

  CHECK_FALSE(thin(full, {401, 1.0, 1}, out));
  CHECK_FALSE(thin(full, {100, 0.0, 1}, out));
}

TEST_CASE("spearman matches the rank definition") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(std::isnan(spearman({1, 1, 1}, {1, 2, 3})));
  std::mt19937_64 rng(4);
  for (int round = 0; round < 100; ++round) {
    size_t n = 3 + rng() % 20;
    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) x[i] = static_cast<double>(rng() % 6), y[i] = static_cast<double>(rng() % 6);
    double ref = reference_spearman(x, y);
    if (std::isnan(ref)) continue;
    CHECK(spearman(x, y) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("planted event detection") {
  const Day d0 = make_day(2013, 1, 1);
  PlantedEvent e{2, d0 + 100, 30};
  UserHistory h;
  MesoSegment s;
  s.cell = 2;
  s.macro_cell = 1;
  s.start = d0 + 110;
  s.end = d0 + 140;
  s.min_duration = 25;
  s.max_duration = 31;
  h.meso = {s};
  CHECK(event_detected(e, h, 20));
  CHECK_FALSE(event_detected(e, h, 26));
  h.meso[0].start = d0 + 116;
  CHECK_FALSE(event_detected(e, h, 20));
  h.meso[0].start = d0 + 100;
  h.meso[0].cell = 3;
  CHECK_FALSE(event_detected(e, h, 20));
  h.meso[0].cell = 2;
  h.meso[0].macro_cell = 2;
  CHECK_FALSE(event_detected(e, h, 20));
}

TEST_CASE("density deciles cut equal populations") {
  std::map<CellId, CellPopulation> pop;
  for (CellId c = 0; c < 20; ++c) pop[c] = {100, static_cast<double>(100 - c)};
  auto dec = density_deciles(pop);
  for (CellId c = 0; c < 20; ++c) CHECK(dec.at(c) == (19 - c) / 2);
}
