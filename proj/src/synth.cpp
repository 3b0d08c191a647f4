#include "cdrmig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "cdrmig/textio.hpp"

namespace cdrmig {

void ScenarioConfig::validate() const {
  if (agents < 1) throw ConfigError("agents must be >= 1");
  if (cells < 2) throw ConfigError("cells must be >= 2");
  if (days < 1) throw ConfigError("days must be >= 1");
  if (events_per_agent < 0) throw ConfigError("events_per_agent must be >= 0");
  if (event_min_days < 1 || event_min_days > event_max_days)
    throw ConfigError("need 1 <= event_min_days <= event_max_days");
  if (event_max_days + 2 * event_edge_margin_days > days && events_per_agent > 0)
    throw ConfigError("event_max_days does not fit in the horizon");
  if (event_cap_days < 0 || event_spacing_days < 0 || event_edge_margin_days < 0)
    throw ConfigError("negative day count in config");
  if (!(max_event_share > 0 && max_event_share <= 1)) throw ConfigError("max_event_share must lie in (0, 1]");
  if (records_per_day < 1) throw ConfigError("records_per_day must be >= 1");
  if (micro_trip_rate < 0 || micro_trip_rate > 1) throw ConfigError("micro_trip_rate must lie in [0, 1]");
  if (micro_trip_max_days < 1) throw ConfigError("micro_trip_max_days must be >= 1");
  if (day_dropout < 0 || day_dropout >= 1) throw ConfigError("day_dropout must lie in [0, 1)");
  if (gap_rate < 0 || gap_rate > 1) throw ConfigError("gap_rate must lie in [0, 1]");
  if (gap_mean_days < 1) throw ConfigError("gap_mean_days must be >= 1");
  if (!(tower_spacing > 0)) throw ConfigError("tower_spacing must be > 0");
}

namespace {

template <class T>
void set_num(T &field, const std::string &key, const std::string &value) {
  try {
    if constexpr (std::is_floating_point_v<T>) field = static_cast<T>(parse_double(value));
    else field = static_cast<T>(parse_int(value));
  } catch (const std::exception &) {
    throw ConfigError("bad value for " + key + ": '" + value + "'");
  }
}

std::string trim(std::string s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

}  // namespace

ScenarioConfig ScenarioConfig::parse(const std::string &text) {
  ScenarioConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + line + "'");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (k == "seed") set_num(c.seed, k, v);
    else if (k == "agents") set_num(c.agents, k, v);
    else if (k == "cells") set_num(c.cells, k, v);
    else if (k == "start") {
      try {
        c.start = parse_day(v);
      } catch (const std::exception &) {
        throw ConfigError("bad value for start: '" + v + "'");
      }
    } else if (k == "days") set_num(c.days, k, v);
    else if (k == "events_per_agent") set_num(c.events_per_agent, k, v);
    else if (k == "event_min_days") set_num(c.event_min_days, k, v);
    else if (k == "event_max_days") set_num(c.event_max_days, k, v);
    else if (k == "event_cap_days") set_num(c.event_cap_days, k, v);
    else if (k == "event_edge_margin_days") set_num(c.event_edge_margin_days, k, v);
    else if (k == "event_spacing_days") set_num(c.event_spacing_days, k, v);
    else if (k == "max_event_share") set_num(c.max_event_share, k, v);
    else if (k == "distinct_destinations") {
      int b = 0;
      set_num(b, k, v);
      if (b != 0 && b != 1) throw ConfigError("distinct_destinations must be 0 or 1");
      c.distinct_destinations = b == 1;
    }
    else if (k == "records_per_day") set_num(c.records_per_day, k, v);
    else if (k == "micro_trip_rate") set_num(c.micro_trip_rate, k, v);
    else if (k == "micro_trip_max_days") set_num(c.micro_trip_max_days, k, v);
    else if (k == "micro_trip_margin_days") set_num(c.micro_trip_margin_days, k, v);
    else if (k == "day_dropout") set_num(c.day_dropout, k, v);
    else if (k == "gap_rate") set_num(c.gap_rate, k, v);
    else if (k == "gap_mean_days") set_num(c.gap_mean_days, k, v);
    else if (k == "tower_spacing") set_num(c.tower_spacing, k, v);
    else throw ConfigError("unknown scenario key '" + k + "'");
  }
  c.validate();
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path &path) {
  LineReader in(path);
  std::string text, line;
  while (in.next(line)) text += line + "\n";
  return parse(text);
}

std::string ScenarioConfig::to_text() const {
  std::ostringstream o;
  o << "seed=" << seed << "\nagents=" << agents << "\ncells=" << cells << "\nstart=" << format_day(start)
    << "\ndays=" << days << "\nevents_per_agent=" << format_double(events_per_agent)
    << "\nevent_min_days=" << event_min_days << "\nevent_max_days=" << event_max_days
    << "\nevent_cap_days=" << event_cap_days << "\nevent_edge_margin_days=" << event_edge_margin_days
    << "\nevent_spacing_days=" << event_spacing_days
    << "\nmax_event_share=" << format_double(max_event_share)
    << "\ndistinct_destinations=" << (distinct_destinations ? 1 : 0)
    << "\nrecords_per_day=" << format_double(records_per_day)
    << "\nmicro_trip_rate=" << format_double(micro_trip_rate)
    << "\nmicro_trip_max_days=" << micro_trip_max_days
    << "\nmicro_trip_margin_days=" << micro_trip_margin_days
    << "\nday_dropout=" << format_double(day_dropout) << "\ngap_rate=" << format_double(gap_rate)
    << "\ngap_mean_days=" << format_double(gap_mean_days)
    << "\ntower_spacing=" << format_double(tower_spacing) << "\n";
  return o.str();
}

std::string synthetic_tower_id(CellId c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%04d", c);
  return buf;
}

std::string synthetic_user_id(int32_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "u%07d", i);
  return buf;
}

namespace {

CellId other_cell(std::mt19937_64 &rng, int32_t cells, CellId not_this) {
  std::uniform_int_distribution<CellId> pick(0, cells - 2);
  CellId c = pick(rng);
  return c >= not_this ? c + 1 : c;
}

std::vector<PlantedEvent> plant_events(std::mt19937_64 &rng, const ScenarioConfig &cfg, CellId home,
                                       Day first) {
  std::poisson_distribution<int> count(cfg.events_per_agent);
  int n = cfg.events_per_agent > 0 ? count(rng) : 0;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double lmin = std::log(cfg.event_min_days), lmax = std::log(cfg.event_max_days + 1.0);
  std::vector<int32_t> dur;
  for (int i = 0; i < n; ++i) {
    auto d = static_cast<int32_t>(std::floor(std::exp(lmin + (lmax - lmin) * u01(rng))));
    d = std::clamp(d, cfg.event_min_days, cfg.event_max_days);
    if (cfg.event_cap_days > 0) d = std::min(d, cfg.event_cap_days);
    dur.push_back(d);
  }
  const int32_t room = cfg.days - 2 * cfg.event_edge_margin_days;
  auto total = [&] {
    int64_t s = 0;
    for (auto d : dur) s += d;
    return s;
  };
  auto free_days = [&] {
    return room - total() - int64_t{cfg.event_spacing_days} * std::max<int64_t>(0, std::ssize(dur) - 1);
  };
  while (!dur.empty() && (total() > cfg.max_event_share * cfg.days || free_days() < 0)) dur.pop_back();
  if (dur.empty()) return {};
  // Sorted uniform offsets spread the slack between and around the events.
  std::uniform_int_distribution<int64_t> slack(0, free_days());
  std::vector<int64_t> off;
  for (size_t i = 0; i < dur.size(); ++i) off.push_back(slack(rng));
  std::sort(off.begin(), off.end());
  std::vector<PlantedEvent> out;
  Day cursor = first + cfg.event_edge_margin_days;
  int64_t used = 0;
  for (size_t i = 0; i < dur.size(); ++i) {
    cursor = cursor + static_cast<int32_t>(off[i] - used);
    used = off[i];
    PlantedEvent e;
    e.destination = other_cell(rng, cfg.cells, home);
    // Repeated stays at one place can add up to a change of residence.
    if (cfg.distinct_destinations && static_cast<int32_t>(i) + 1 < cfg.cells)
      while (std::any_of(out.begin(), out.end(), [&](const PlantedEvent &p) { return p.destination == e.destination; }))
        e.destination = other_cell(rng, cfg.cells, home);
    e.start = cursor;
    e.duration = dur[i];
    out.push_back(e);
    cursor = e.end() + 1 + cfg.event_spacing_days;
  }
  return out;
}

std::vector<PlantedEvent> plant_micro_trips(std::mt19937_64 &rng, const ScenarioConfig &cfg,
                                            const AgentTruth &a, Day first, Day last) {
  std::vector<PlantedEvent> out;
  if (cfg.micro_trip_rate <= 0) return out;
  std::bernoulli_distribution start(cfg.micro_trip_rate);
  std::uniform_int_distribution<int32_t> len(1, cfg.micro_trip_max_days);
  const int32_t m = cfg.micro_trip_margin_days;
  for (Day d = first + m; d <= last - m;) {
    if (!start(rng)) {
      ++d;
      continue;
    }
    PlantedEvent t;
    t.start = d;
    t.duration = len(rng);
    t.destination = other_cell(rng, cfg.cells, a.home);
    bool clear = t.end() <= last - m;
    for (const auto &e : a.events)
      if (overlap_days(t.start - m, t.end() + m, e.start, e.end()) > 0) clear = false;
    if (clear) {
      out.push_back(t);
      d = t.end() + 1 + m;  // home days between trips keep them inside the home stay
    } else {
      ++d;
    }
  }
  return out;
}

}  // namespace

CellId true_location(const AgentTruth &a, Day d) {
  for (const auto &e : a.events)
    if (e.start <= d && d <= e.end()) return e.destination;
  for (const auto &e : a.micro_trips)
    if (e.start <= d && d <= e.end()) return e.destination;
  return a.home;
}

std::map<CellId, CellPopulation> synthetic_population(const ScenarioConfig &cfg) {
  cfg.validate();
  std::seed_seq seq{static_cast<uint32_t>(cfg.seed), static_cast<uint32_t>(cfg.seed >> 32), 0xC311u};
  std::mt19937_64 rng(seq);
  std::lognormal_distribution<double> pop(9.0, 1.0), area(3.0, 0.8);
  std::map<CellId, CellPopulation> out;
  for (CellId c = 0; c < cfg.cells; ++c) {
    double p = std::round(pop(rng));
    out[c] = {p, p / area(rng)};
  }
  return out;
}

SyntheticCorpus generate(const ScenarioConfig &cfg) {
  cfg.validate();
  SyntheticCorpus out;
  const Day first = cfg.start, last = cfg.start + (cfg.days - 1);
  out.truth.first_day = first;
  out.truth.last_day = last;
  const auto side = static_cast<int32_t>(std::ceil(std::sqrt(static_cast<double>(cfg.cells))));
  for (CellId c = 0; c < cfg.cells; ++c)
    out.towers.push_back({synthetic_tower_id(c), (c % side) * cfg.tower_spacing, (c / side) * cfg.tower_spacing});

  for (int32_t i = 0; i < cfg.agents; ++i) {
    // One stream per agent keeps agents independent of each other's draws.
    std::seed_seq seq{static_cast<uint32_t>(cfg.seed), static_cast<uint32_t>(cfg.seed >> 32),
                      static_cast<uint32_t>(i)};
    std::mt19937_64 rng(seq);
    AgentTruth a;
    a.user = synthetic_user_id(i);
    a.home = std::uniform_int_distribution<CellId>(0, cfg.cells - 1)(rng);
    a.events = plant_events(rng, cfg, a.home, first);
    a.micro_trips = plant_micro_trips(rng, cfg, a, first, last);

    Trajectory traj;
    traj.user = a.user;
    std::bernoulli_distribution drop(cfg.day_dropout), gap_start(cfg.gap_rate);
    std::geometric_distribution<int32_t> gap_len(1.0 / cfg.gap_mean_days);
    std::poisson_distribution<int32_t> extra(cfg.records_per_day - 1.0);
    std::uniform_int_distribution<int64_t> second_of_slot(8 * 3600, 24 * 3600 - 1);
    Day gap_until = first - 1;
    std::vector<int64_t> stamps;
    for (Day d = first; d <= last; ++d) {
      if (d <= gap_until) continue;
      if (cfg.gap_rate > 0 && gap_start(rng)) {
        gap_until = d + gap_len(rng);
        continue;
      }
      if (cfg.day_dropout > 0 && drop(rng)) continue;
      int32_t n = 1 + (cfg.records_per_day > 1 ? extra(rng) : 0);
      CellId cell = true_location(a, d);
      stamps.clear();
      for (int32_t k = 0; k < n; ++k) stamps.push_back(int64_t{d.value} * 86400 + second_of_slot(rng));
      std::sort(stamps.begin(), stamps.end());
      for (auto s : stamps) traj.events.push_back({s, cell});
    }
    out.truth.agents.push_back(std::move(a));
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

void write_truth(const GroundTruth &truth, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("user_id,kind,cell_id,start,duration");
  const int32_t span = span_days(truth.first_day, truth.last_day);
  for (const auto &a : truth.agents) {
    out.line(a.user + ",home," + std::to_string(a.home) + ',' + format_day(truth.first_day) + ',' +
             std::to_string(span));
    for (const auto &e : a.events)
      out.line(a.user + ",event," + std::to_string(e.destination) + ',' + format_day(e.start) + ',' +
               std::to_string(e.duration));
    for (const auto &e : a.micro_trips)
      out.line(a.user + ",micro," + std::to_string(e.destination) + ',' + format_day(e.start) + ',' +
               std::to_string(e.duration));
  }
  out.close();
}

GroundTruth read_truth(const std::filesystem::path &path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw DataError(path.string() + ": empty file");
  expect_header(line, {"user_id", "kind", "cell_id", "start", "duration"}, path);
  GroundTruth g;
  bool bounds = false;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 5) throw DataError(path.string() + ": bad line: " + line);
    PlantedEvent e;
    e.destination = static_cast<CellId>(parse_int(f[2]));
    try {
      e.start = parse_day(f[3]);
    } catch (const std::exception &) {
      throw DataError(path.string() + ": bad date: " + line);
    }
    e.duration = static_cast<int32_t>(parse_int(f[4]));
    if (f[1] == "home") {
      g.agents.push_back({std::string(f[0]), e.destination, {}, {}});
      if (!bounds) {
        g.first_day = e.start;
        g.last_day = e.end();
        bounds = true;
      }
      continue;
    }
    if (g.agents.empty() || g.agents.back().user != f[0])
      throw DataError(path.string() + ": " + std::string(f[1]) + " line before home line: " + line);
    if (f[1] == "event") g.agents.back().events.push_back(e);
    else if (f[1] == "micro") g.agents.back().micro_trips.push_back(e);
    else throw DataError(path.string() + ": unknown kind: " + line);
  }
  return g;
}

void write_cdr(const std::vector<Trajectory> &trajectories, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("user_id,timestamp,tower_id");
  std::string line;
  for (const auto &t : trajectories)
    for (const auto &e : t.events) {
      line = t.user;
      line += ',';
      line += std::to_string(e.timestamp);
      line += ',';
      line += synthetic_tower_id(e.cell);
      out.line(line);
    }
  out.close();
}

void write_towers(const std::vector<Tower> &towers, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("tower_id,x,y");
  for (const auto &t : towers) out.line(t.id + ',' + format_double(t.x) + ',' + format_double(t.y));
  out.close();
}

bool thin(const Trajectory &in, const ThinningSpec &spec, Trajectory &out) {
  out.user = in.user;
  out.events.clear();
  if (in.events.empty() || spec.delta_days < 1 || !(spec.omega > 0 && spec.omega <= 1)) return false;
  std::vector<Day> days;
  for (const auto &e : in.events) {
    Day d = to_day_hour(e.timestamp).day;
    if (days.empty() || days.back() != d) days.push_back(d);
  }
  days.erase(std::unique(days.begin(), days.end()), days.end());
  const auto want = static_cast<int32_t>(std::ceil(spec.omega * spec.delta_days - 1e-9));
  // Candidate windows: both ends observed and enough observed days inside.
  std::vector<size_t> starts;
  for (size_t i = 0; i < days.size(); ++i) {
    Day end = days[i] + (spec.delta_days - 1);
    auto j = std::lower_bound(days.begin() + static_cast<std::ptrdiff_t>(i), days.end(), end);
    if (j == days.end() || *j != end) continue;
    if (j - (days.begin() + static_cast<std::ptrdiff_t>(i)) + 1 >= want) starts.push_back(i);
  }
  if (starts.empty()) return false;
  std::mt19937_64 rng(spec.seed);
  size_t i0 = starts[std::uniform_int_distribution<size_t>(0, starts.size() - 1)(rng)];
  Day w0 = days[i0], w1 = days[i0] + (spec.delta_days - 1);
  std::vector<Day> inner;
  for (size_t i = i0 + 1; i < days.size() && days[i] < w1; ++i) inner.push_back(days[i]);
  std::set<Day> keep{w0, w1};
  const int32_t more = want - static_cast<int32_t>(keep.size());
  if (more > 0) {
    std::vector<Day> picked;
    std::sample(inner.begin(), inner.end(), std::back_inserter(picked), more, rng);
    keep.insert(picked.begin(), picked.end());
  }
  for (const auto &e : in.events)
    if (keep.count(to_day_hour(e.timestamp).day)) out.events.push_back(e);
  return true;
}

}  // namespace cdrmig
