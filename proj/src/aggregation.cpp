#include "cdrmig/aggregation.hpp"

#include <algorithm>
#include <set>

namespace cdrmig {

void AggregationParams::validate() const {
  if (tau_min_days <= 0) throw ConfigError("tau_min_days must be > 0");
  if (eps_gap_meso_days < 0 || eps_tol_days < 0) throw ConfigError("gap tolerances must be >= 0");
  // Sigma may not exceed the shortest half-month (13 days, second half of February).
  if (sigma_days <= 0 || sigma_days > 13) throw ConfigError("sigma_days must lie in [1, 13]");
}

const char *measure_name(Measure m) {
  switch (m) {
    case Measure::depart: return "depart";
    case Measure::ret: return "return";
    case Measure::stock: return "stock";
  }
  return "?";
}

Measure parse_measure(std::string_view s) {
  for (auto m : kMeasures)
    if (s == measure_name(m)) return m;
  throw DataError("unknown measure '" + std::string(s) + "'");
}

const char *status_name(Status s) {
  switch (s) {
    case Status::no_event: return "no_event";
    case Status::event: return "event";
    case Status::unobserved: return "unobserved";
  }
  return "?";
}

Status parse_status(std::string_view s) {
  for (auto st : {Status::no_event, Status::event, Status::unobserved})
    if (s == status_name(st)) return st;
  throw DataError("unknown status '" + std::string(s) + "'");
}

namespace {

MeasureOutcome settle(std::vector<RuleHit> hits, const char *unobserved_case) {
  MeasureOutcome o;
  if (!hits.empty()) {
    o.status = Status::event;
    o.case_id = hits.front().case_id;
    for (const auto &h : hits) o.destinations.push_back(h.destination);
    std::sort(o.destinations.begin(), o.destinations.end());
  } else if (unobserved_case) {
    o.status = Status::unobserved;
    o.case_id = unobserved_case;
  }
  return o;
}

}  // namespace

UserOutcomes compute_outcomes(const UserHistory &history, HalfMonth first, HalfMonth last,
                              const AggregationParams &params) {
  UserOutcomes out;
  out.user = history.user;
  if (history.meso.empty() || history.macros.empty()) return out;
  const RuleParams rp = params.rules();
  const Timeline tl = build_timeline(history, rp);
  const Confidence c = params.confidence;
  for (HalfMonth t = first; t <= last; t = t.next()) {
    PeriodOutcome p;
    p.t = t;
    p.origin = macro_cell_for(tl.macros, t.start(), t.end());
    // Observation status is only consulted when no event was found.
    auto d = departures(tl, t, rp, c);
    p[Measure::depart] = settle(d, d.empty() ? departure_unobserved(tl, t, rp) : nullptr);
    auto r = returns(tl, t, rp, c);
    p[Measure::ret] = settle(r, r.empty() ? return_unobserved(tl, t, rp) : nullptr);
    auto s = stock(tl, t, rp, c);
    p[Measure::stock] = settle(s, s.empty() ? stock_unobserved(tl, t, rp) : nullptr);
    out.periods.push_back(std::move(p));
  }
  return out;
}

void WeightedCount::add(double weight, int64_t n) {
  auto it = std::lower_bound(parts_.begin(), parts_.end(), weight,
                             [](const auto &p, double w) { return p.first < w; });
  if (it != parts_.end() && it->first == weight) it->second += n;
  else parts_.insert(it, {weight, n});
}

void WeightedCount::merge(const WeightedCount &other) {
  for (const auto &[w, n] : other.parts_) add(w, n);
}

double WeightedCount::total() const {
  double s = 0;
  for (const auto &[w, n] : parts_) s += w * static_cast<double>(n);
  return s;
}

double WeightedCount::scaled(double scale) const {
  double s = 0;
  for (const auto &[w, n] : parts_) s += (w / scale) * static_cast<double>(n);
  return s;
}

void MigrationTable::add(const UserOutcomes &outcomes, const LocationNetwork &network,
                         const WeightFn &weight) {
  std::set<std::string> dest_regions;
  for (const auto &p : outcomes.periods) {
    const std::string &origin = network.region_of(p.origin);
    for (auto m : kMeasures) {
      const auto &o = p[m];
      if (o.status == Status::unobserved) continue;
      double w = 1.0;
      if (weight) {
        auto ow = weight(p.origin, p.t, m);
        if (!ow) {
          ++excluded_;
          continue;
        }
        w = *ow;
      }
      const int i = static_cast<int>(m);
      observed_[{origin, p.t.index}][i].add(w);
      if (o.status != Status::event) continue;
      dest_regions.clear();
      for (CellId d : o.destinations) dest_regions.insert(network.region_of(d));
      for (const auto &dest : dest_regions) counts_[{origin, dest, p.t.index}][i].add(w);
    }
  }
}

void MigrationTable::merge(const MigrationTable &other) {
  for (const auto &[k, v] : other.counts_) {
    auto &mine = counts_[k];
    for (int i = 0; i < 3; ++i) mine[i].merge(v[i]);
  }
  for (const auto &[k, v] : other.observed_) {
    auto &mine = observed_[k];
    for (int i = 0; i < 3; ++i) mine[i].merge(v[i]);
  }
  excluded_ += other.excluded_;
}

void MigrationTable::erase_units(const std::vector<HalfMonth> &units) {
  std::set<int32_t> drop;
  for (auto u : units) drop.insert(u.index);
  std::erase_if(counts_, [&](const auto &kv) { return drop.count(std::get<2>(kv.first)) > 0; });
  std::erase_if(observed_, [&](const auto &kv) { return drop.count(kv.first.second) > 0; });
}

std::vector<TableRow> MigrationTable::rows() const {
  std::vector<TableRow> out;
  for (const auto &[key, c] : counts_) {
    TableRow r;
    r.origin = std::get<0>(key);
    r.destination = std::get<1>(key);
    r.t = HalfMonth{std::get<2>(key)};
    for (int i = 0; i < 3; ++i) r.count[i] = c[i].total();
    if (r.count[0] == 0 && r.count[1] == 0 && r.count[2] == 0) continue;
    auto it = observed_.find({r.origin, r.t.index});
    if (it != observed_.end())
      for (int i = 0; i < 3; ++i) {
        const auto &o = it->second[i];
        r.observed[i] = o.total();
        if (r.observed[i] == 0) continue;
        // Scaling by the largest weight lets a weight shared by every
        // contribution cancel exactly.
        const double scale = o.max_weight();
        r.ratio[i] = c[i].scaled(scale) / o.scaled(scale);
      }
    out.push_back(std::move(r));
  }
  return out;
}

double MigrationTable::observed(const std::string &origin, HalfMonth t, Measure m) const {
  auto it = observed_.find({origin, t.index});
  return it == observed_.end() ? 0.0 : it->second[static_cast<int>(m)].total();
}

void write_table(const MigrationTable &table, const std::filesystem::path &path, bool weighted) {
  const std::string sfx = weighted ? "_adj" : "";
  TextWriter out(path);
  std::string header = "origin,destination,year,month,half";
  for (const char *c : {"N_depart", "N_return", "N_migrants", "N_users_observed_depart",
                        "N_users_observed_return", "N_users_observed_stock", "rate_depart",
                        "rate_return", "rate_migrants"})
    header += std::string(",") + c + sfx;
  out.line(header);
  std::string line;
  for (const auto &r : table.rows()) {
    line = r.origin + ',' + r.destination + ',' + std::to_string(r.t.year()) + ',' +
           std::to_string(r.t.month()) + ',' + std::to_string(r.t.half());
    for (double v : r.count) line += ',' + format_double(v);
    for (double v : r.observed) line += ',' + format_double(v);
    for (auto m : kMeasures) {
      line += ',';
      if (auto rate = r.rate(m)) line += format_double(*rate);
    }
    out.line(line);
  }
  out.close();
}

namespace {

const std::vector<std::string_view> kOutcomeColumns{
    "user_id", "year", "month", "half", "origin_cell", "measure", "status", "destinations", "case"};

const char *intern_case(std::string_view s, const std::filesystem::path &source) {
  if (s.empty()) return "";
  for (auto id : diagram_ids())
    if (id == s) return id.data();
  throw DataError(source.string() + ": unknown case id '" + std::string(s) + "'");
}

}  // namespace

void write_outcomes_header(TextWriter &out) {
  std::string h;
  for (auto c : kOutcomeColumns) h += (h.empty() ? "" : ",") + std::string(c);
  out.line(h);
}

void write_outcomes(TextWriter &out, const UserOutcomes &outcomes) {
  std::string line;
  for (const auto &p : outcomes.periods) {
    for (auto m : kMeasures) {
      const auto &o = p[m];
      line = outcomes.user + ',' + std::to_string(p.t.year()) + ',' + std::to_string(p.t.month()) +
             ',' + std::to_string(p.t.half()) + ',' + std::to_string(p.origin) + ',' +
             measure_name(m) + ',' + status_name(o.status) + ',';
      for (size_t i = 0; i < o.destinations.size(); ++i) {
        if (i) line += ';';
        line += std::to_string(o.destinations[i]);
      }
      line += ',';
      line += o.case_id;
      out.line(line);
    }
  }
}

void read_outcomes(const std::filesystem::path &path,
                   const std::function<void(UserOutcomes &&)> &sink) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw DataError(path.string() + ": empty outcome file");
  expect_header(line, kOutcomeColumns, path);
  UserOutcomes cur;
  bool have = false;
  std::set<std::string> seen;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != kOutcomeColumns.size()) throw DataError(path.string() + ": bad line: " + line);
    std::string user(f[0]);
    if (!have || user != cur.user) {
      if (have) sink(std::move(cur));
      if (!seen.insert(user).second)
        throw DataError(path.string() + ": outcomes of user " + user + " are not contiguous");
      cur = UserOutcomes{user, {}};
      have = true;
    }
    HalfMonth t = HalfMonth::of(static_cast<int>(parse_int(f[1])), static_cast<unsigned>(parse_int(f[2])),
                                static_cast<int>(parse_int(f[3])));
    if (cur.periods.empty() || cur.periods.back().t != t) {
      PeriodOutcome p;
      p.t = t;
      p.origin = static_cast<CellId>(parse_int(f[4]));
      cur.periods.push_back(std::move(p));
    }
    auto &o = cur.periods.back()[parse_measure(f[5])];
    o.status = parse_status(f[6]);
    std::string_view d = f[7];
    while (!d.empty()) {
      size_t k = d.find(';');
      o.destinations.push_back(static_cast<CellId>(parse_int(d.substr(0, k))));
      d = k == std::string_view::npos ? std::string_view{} : d.substr(k + 1);
    }
    o.case_id = intern_case(f[8], path);
  }
  if (have) sink(std::move(cur));
}

std::vector<CorpusWindow> reference_windows() {
  return {{HalfMonth::of(2013, 1, 1), HalfMonth::of(2013, 12, 2), 0},
          {HalfMonth::of(2014, 1, 1), HalfMonth::of(2015, 12, 2), 2}};
}

int32_t edge_units(int32_t tau_min_days) { return std::max(1, tau_min_days / 15); }

std::vector<HalfMonth> excluded_units(int32_t tau_min_days, const std::vector<CorpusWindow> &windows) {
  std::set<int32_t> out;
  const int32_t n = edge_units(tau_min_days);
  for (const auto &w : windows) {
    const int32_t tail = w.tail_cap > 0 ? std::min(n, w.tail_cap) : n;
    for (int32_t i = 0; i < n && w.first.index + i <= w.last.index; ++i) out.insert(w.first.index + i);
    for (int32_t i = 0; i < tail && w.last.index - i >= w.first.index; ++i) out.insert(w.last.index - i);
  }
  std::vector<HalfMonth> v;
  for (int32_t i : out) v.push_back(HalfMonth{i});
  return v;
}

}  // namespace cdrmig
