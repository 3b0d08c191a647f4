#include <doctest.h>

#include "cdrmig/pipeline.hpp"
#include "cdrmig/synth.hpp"
#include "oracle.hpp"

using namespace cdrmig;

namespace {

std::vector<UserHistory> histories_of(const SyntheticCorpus &corpus) {
  std::vector<UserHistory> out;
  for (const auto &t : corpus.trajectories) out.push_back(detect_user(t.user, daily(hourly(t)), {}));
  return out;
}

}  // namespace

TEST_CASE("gap-free corpus matches the truth table") {
  ScenarioConfig cfg;
  cfg.agents = 200;
  cfg.event_cap_days = 120;
  cfg.distinct_destinations = true;
  auto corpus = generate(cfg);
  auto net = build_network(corpus.towers, {}, 2000);
  auto histories = histories_of(corpus);
  for (int32_t tau : {20, 30, 60}) {
    AggregationParams ap;
    ap.tau_min_days = tau;
    auto windows = resolve_windows("auto", histories);
    MigrationTable table;
    for_each_outcome(histories, windows, ap, 1, [&](const UserOutcomes &o) { table.add(o, net); });
    table.erase_units(excluded_units(tau, windows));
    auto expected = oracle::truth_table(corpus.truth, net, {tau, ap.sigma_days, edge_units(tau)});
    auto d = oracle::diff(expected, oracle::from_pipeline(table, expected));
    CAPTURE(tau);
    MESSAGE(d.size() << " differing rows");
    for (size_t i = 0; i < std::min<size_t>(d.size(), 10); ++i) MESSAGE(d[i]);
    CHECK(d.empty());
  }
}
