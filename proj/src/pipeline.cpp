#include "cdrmig/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <set>
#include <sstream>

#include "cdrmig/parallel.hpp"
#include "cdrmig/textio.hpp"

namespace cdrmig {

std::filesystem::path default_spill_dir() {
  if (const char *env = std::getenv("CDRMIG_TMPDIR"); env && *env) return env;
  return std::filesystem::temp_directory_path();
}

namespace {

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct FileCloser {
  void operator()(std::FILE *f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Spill files live in a private directory removed on scope exit.
class SpillDir {
 public:
  explicit SpillDir(const std::filesystem::path &base) {
    std::filesystem::create_directories(base);
    for (int i = 0;; ++i) {
      path_ = base / ("cdrmig-spill-" + std::to_string(fnv1a(std::to_string(reinterpret_cast<uintptr_t>(this)))) +
                      "-" + std::to_string(i));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~SpillDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path file(int k) const { return path_ / ("part-" + std::to_string(k) + ".bin"); }

 private:
  std::filesystem::path path_;
};

int partition_count(const std::vector<std::filesystem::path> &files, int64_t bytes_per_partition) {
  int64_t total = 0;
  for (const auto &f : files) {
    std::error_code ec;
    auto size = static_cast<int64_t>(std::filesystem::file_size(f, ec));
    if (ec) throw DataError("cannot read " + f.string() + ": " + ec.message());
    // gzip text typically compresses four- to six-fold
    total += f.extension() == ".gz" ? size * 5 : size;
  }
  int64_t n = (total + bytes_per_partition - 1) / std::max<int64_t>(1, bytes_per_partition);
  return static_cast<int>(std::clamp<int64_t>(n, 1, 512));
}

struct SpillRecord {
  std::string_view user;
  int64_t timestamp;
  CellId cell;
};

std::vector<UserDays> reduce_partition(const std::filesystem::path &file, const IngestOptions &opt,
                                       IngestStats &stats) {
  std::vector<char> buf;
  {
    FilePtr f(std::fopen(file.c_str(), "rb"));
    if (!f) throw DataError("cannot reopen spill file " + file.string());
    std::fseek(f.get(), 0, SEEK_END);
    long size = std::ftell(f.get());
    std::fseek(f.get(), 0, SEEK_SET);
    buf.resize(static_cast<size_t>(size));
    if (size > 0 && std::fread(buf.data(), 1, buf.size(), f.get()) != buf.size())
      throw DataError("short read on spill file " + file.string());
  }
  std::vector<SpillRecord> recs;
  for (size_t pos = 0; pos < buf.size();) {
    uint16_t len;
    std::memcpy(&len, buf.data() + pos, sizeof len);
    pos += sizeof len;
    SpillRecord r{std::string_view(buf.data() + pos, len), 0, 0};
    pos += len;
    std::memcpy(&r.timestamp, buf.data() + pos, sizeof r.timestamp);
    pos += sizeof r.timestamp;
    std::memcpy(&r.cell, buf.data() + pos, sizeof r.cell);
    pos += sizeof r.cell;
    recs.push_back(r);
  }
  std::sort(recs.begin(), recs.end(), [](const SpillRecord &a, const SpillRecord &b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.cell < b.cell;
  });
  std::vector<UserDays> out;
  std::vector<CdrEvent> events;
  std::vector<Day> days;
  for (size_t i = 0; i < recs.size();) {
    size_t j = i;
    events.clear();
    days.clear();
    while (j < recs.size() && recs[j].user == recs[i].user) {
      events.push_back({recs[j].timestamp, recs[j].cell});
      days.push_back(to_day_hour(recs[j].timestamp, opt.utc_offset_seconds).day);
      ++j;
    }
    ++stats.users;
    UserDays u;
    u.user = std::string(recs[i].user);
    u.records = static_cast<int64_t>(events.size());
    u.profile = profile_days(days);
    if (is_bot(u.records, u.profile, opt.bot_max_avg)) {
      ++stats.bots;
      stats.bot_records += u.records;
    } else {
      auto h = hourly(std::span<const CdrEvent>(events), opt.utc_offset_seconds);
      u.daily = daily(h);
      out.push_back(std::move(u));
    }
    i = j;
  }
  return out;
}

}  // namespace

IngestResult ingest(const std::vector<std::filesystem::path> &cdr_files, const LocationNetwork &network,
                    const IngestOptions &opt) {
  IngestResult result;
  auto &stats = result.stats;
  const int parts = partition_count(cdr_files, opt.partition_bytes);
  stats.partitions = parts;
  SpillDir spill(opt.spill_dir.empty() ? default_spill_dir() : opt.spill_dir);

  {
    std::vector<FilePtr> outs;
    std::vector<std::vector<char>> bufs(static_cast<size_t>(parts));
    for (int k = 0; k < parts; ++k) {
      outs.emplace_back(std::fopen(spill.file(k).c_str(), "wb"));
      if (!outs.back()) throw DataError("cannot create spill file " + spill.file(k).string());
      bufs[static_cast<size_t>(k)].resize(1 << 16);
      std::setvbuf(outs.back().get(), bufs[static_cast<size_t>(k)].data(), _IOFBF, 1 << 16);
    }
    ParseCounters counters;
    std::string line;
    for (const auto &path : cdr_files) {
      LineReader in(path);
      bool first = true;
      while (in.next(line)) {
        if (first) {
          first = false;
          if (line.rfind("user_id,", 0) == 0) continue;
        }
        if (line.empty()) continue;
        auto rec = parse_cdr_line(line, network, counters);
        if (!rec) continue;
        if (rec->user.size() > 0xFFFF) {
          ++counters.malformed;
          --counters.accepted;
          continue;
        }
        std::FILE *f = outs[fnv1a(rec->user) % static_cast<uint64_t>(parts)].get();
        auto len = static_cast<uint16_t>(rec->user.size());
        std::fwrite(&len, sizeof len, 1, f);
        std::fwrite(rec->user.data(), 1, len, f);
        std::fwrite(&rec->timestamp, sizeof rec->timestamp, 1, f);
        std::fwrite(&rec->cell, sizeof rec->cell, 1, f);
      }
    }
    for (auto &f : outs)
      if (std::fflush(f.get()) != 0) throw DataError("write error on spill file (disk full?)");
    stats.lines = counters.lines;
    stats.malformed = counters.malformed;
    stats.unknown_tower = counters.unknown_tower;
    stats.accepted = counters.accepted;
  }

  std::vector<std::vector<UserDays>> per_part(static_cast<size_t>(parts));
  std::vector<IngestStats> part_stats(static_cast<size_t>(parts));
  parallel_for(static_cast<size_t>(parts), opt.workers, [&](size_t k) {
    per_part[k] = reduce_partition(spill.file(static_cast<int>(k)), opt, part_stats[k]);
    std::filesystem::remove(spill.file(static_cast<int>(k)));
  });
  for (size_t k = 0; k < per_part.size(); ++k) {
    stats.users += part_stats[k].users;
    stats.bots += part_stats[k].bots;
    stats.bot_records += part_stats[k].bot_records;
    for (auto &u : per_part[k]) result.users.push_back(std::move(u));
    per_part[k].clear();
    per_part[k].shrink_to_fit();
  }
  std::sort(result.users.begin(), result.users.end(),
            [](const UserDays &a, const UserDays &b) { return a.user < b.user; });
  return result;
}

void write_daily(const std::vector<UserDays> &users, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("user_id,day,cell_id");
  std::string line;
  for (const auto &u : users)
    for (const auto &d : u.daily) {
      line = u.user;
      line += ',';
      line += format_day(d.day);
      line += ',';
      line += std::to_string(d.cell);
      out.line(line);
    }
  out.close();
}

namespace {

Day parse_day_field(std::string_view s, const std::filesystem::path &path) {
  try {
    return parse_day(s);
  } catch (const std::exception &) {
    throw DataError(path.string() + ": bad date '" + std::string(s) + "'");
  }
}

}  // namespace

std::vector<UserDays> read_daily(const std::filesystem::path &path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw DataError(path.string() + ": empty file");
  expect_header(line, {"user_id", "day", "cell_id"}, path);
  std::vector<UserDays> out;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 3) throw DataError(path.string() + ": bad line: " + line);
    if (out.empty() || out.back().user != f[0]) {
      if (!out.empty() && out.back().user > f[0])
        throw DataError(path.string() + ": users not sorted at " + std::string(f[0]));
      out.push_back({std::string(f[0]), 0, {}, {}});
    }
    DailyLocation d{parse_day_field(f[1], path), static_cast<CellId>(parse_int(f[2]))};
    auto &series = out.back().daily;
    if (!series.empty() && series.back().day >= d.day)
      throw DataError(path.string() + ": days not increasing for " + out.back().user);
    series.push_back(d);
  }
  return out;
}

void write_profiles(const std::vector<UserDays> &users, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("user_id,records,first_day,last_day,span_days,days_observed,frac_observed,max_gap_days");
  for (const auto &u : users) {
    const auto &p = u.profile;
    out.line(u.user + ',' + std::to_string(u.records) + ',' + format_day(p.first_day) + ',' +
             format_day(p.last_day) + ',' + std::to_string(p.span_days) + ',' +
             std::to_string(p.days_observed) + ',' + format_double(p.frac_observed) + ',' +
             std::to_string(p.max_gap_days));
  }
  out.close();
}

void read_profiles(const std::filesystem::path &path, std::vector<UserDays> &users) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw DataError(path.string() + ": empty file");
  expect_header(line, {"user_id", "records", "first_day", "last_day", "span_days", "days_observed",
                       "frac_observed", "max_gap_days"},
                path);
  std::map<std::string, std::pair<int64_t, ObservationProfile>> by_user;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 8) throw DataError(path.string() + ": bad line: " + line);
    ObservationProfile p;
    p.first_day = parse_day_field(f[2], path);
    p.last_day = parse_day_field(f[3], path);
    p.span_days = static_cast<int32_t>(parse_int(f[4]));
    p.days_observed = static_cast<int32_t>(parse_int(f[5]));
    p.frac_observed = parse_double(f[6]);
    p.max_gap_days = static_cast<int32_t>(parse_int(f[7]));
    by_user[std::string(f[0])] = {parse_int(f[1]), p};
  }
  for (auto &u : users) {
    auto it = by_user.find(u.user);
    if (it == by_user.end()) throw DataError(path.string() + ": no profile for user " + u.user);
    u.records = it->second.first;
    u.profile = it->second.second;
  }
}

void write_segments(const std::vector<UserHistory> &histories, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("user_id,kind,cell_id,start,end,min_dur,max_dur,macro_cell");
  for (const auto &h : histories) {
    out.line(h.user + ",span,-1," + format_day(h.first_day) + ',' + format_day(h.last_day) + ",,,");
    for (const auto &m : h.macros)
      out.line(h.user + ",macro," + std::to_string(m.cell) + ',' + format_day(m.start) + ',' +
               format_day(m.end) + ",,,");
    for (const auto &s : h.meso)
      out.line(h.user + ",meso," + std::to_string(s.cell) + ',' + format_day(s.start) + ',' +
               format_day(s.end) + ',' + std::to_string(s.min_duration) + ',' +
               std::to_string(s.max_duration) + ',' + std::to_string(s.macro_cell));
  }
  out.close();
}

std::vector<UserHistory> read_segments(const std::filesystem::path &path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw DataError(path.string() + ": empty file");
  expect_header(line, {"user_id", "kind", "cell_id", "start", "end", "min_dur", "max_dur", "macro_cell"},
                path);
  std::vector<UserHistory> out;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 8) throw DataError(path.string() + ": bad line: " + line);
    Day a = parse_day_field(f[3], path), b = parse_day_field(f[4], path);
    if (f[1] == "span") {
      UserHistory h;
      h.user = std::string(f[0]);
      h.first_day = a;
      h.last_day = b;
      out.push_back(std::move(h));
      continue;
    }
    if (out.empty() || out.back().user != f[0])
      throw DataError(path.string() + ": segment before span line: " + line);
    auto cell = static_cast<CellId>(parse_int(f[2]));
    if (f[1] == "macro") {
      out.back().macros.push_back({cell, a, b});
    } else if (f[1] == "meso") {
      MesoSegment s;
      s.cell = cell;
      s.start = a;
      s.end = b;
      s.min_duration = static_cast<int32_t>(parse_int(f[5]));
      s.max_duration = static_cast<int32_t>(parse_int(f[6]));
      s.macro_cell = static_cast<CellId>(parse_int(f[7]));
      out.back().meso.push_back(s);
    } else {
      throw DataError(path.string() + ": unknown segment kind: " + line);
    }
  }
  return out;
}

std::vector<UserHistory> detect_all(const std::vector<UserDays> &users, const DetectionParams &params,
                                    int workers) {
  params.validate();
  std::vector<UserHistory> out(users.size());
  parallel_for(users.size(), workers,
               [&](size_t i) { out[i] = detect_user(users[i].user, users[i].daily, params); });
  return out;
}

std::vector<CorpusWindow> resolve_windows(const std::string &spec, const std::vector<UserHistory> &histories) {
  if (spec == "reference") return reference_windows();
  if (spec == "auto") {
    std::optional<Day> lo, hi;
    for (const auto &h : histories) {
      if (h.meso.empty()) continue;
      if (!lo || h.first_day < *lo) lo = h.first_day;
      if (!hi || h.last_day > *hi) hi = h.last_day;
    }
    if (!lo) return {};
    return {{half_month_of(*lo), half_month_of(*hi), 0}};
  }
  std::vector<CorpusWindow> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::vector<std::string> parts;
    std::stringstream is(item);
    std::string p;
    while (std::getline(is, p, ':')) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError("bad window '" + item + "'");
    try {
      CorpusWindow w{half_month_of(parse_day(parts[0])), half_month_of(parse_day(parts[1])), 0};
      if (parts.size() == 3) w.tail_cap = static_cast<int32_t>(parse_int(parts[2]));
      if (w.last < w.first || w.tail_cap < 0) throw ConfigError("bad window '" + item + "'");
      out.push_back(w);
    } catch (const ConfigError &) {
      throw;
    } catch (const std::exception &) {
      throw ConfigError("bad window '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("no windows in '" + spec + "'");
  return out;
}

void for_each_outcome(const std::vector<UserHistory> &histories, const std::vector<CorpusWindow> &windows,
                      const AggregationParams &params, int workers,
                      const std::function<void(const UserOutcomes &)> &sink) {
  constexpr size_t kBlock = 512;
  std::vector<UserOutcomes> block;
  for (size_t b = 0; b < histories.size(); b += kBlock) {
    const size_t n = std::min(kBlock, histories.size() - b);
    block.assign(n, {});
    parallel_for(n, workers, [&](size_t i) {
      const auto &h = histories[b + i];
      UserOutcomes &o = block[i];
      o.user = h.user;
      for (const auto &w : windows) {
        auto part = compute_outcomes(h, w.first, w.last, params);
        for (auto &p : part.periods) o.periods.push_back(std::move(p));
      }
    });
    for (const auto &o : block) sink(o);
  }
}

std::string dataset_name(bool weighted, const std::string &subset, int32_t tau) {
  return std::string(weighted ? "weighted_" : "unweighted_") + subset + "_" + std::to_string(tau) +
         "days.csv.gz";
}

void RunConfig::validate() const {
  if (cdr.empty()) throw ConfigError("no CDR input given");
  if (towers.empty()) throw ConfigError("no tower file given");
  if (merge_radius < 0) throw ConfigError("merge radius must be >= 0");
  if (subsets.empty()) throw ConfigError("no subsets configured");
  for (const auto &[name, c] : subsets) {
    if (name.empty() || name.find_first_of("/_ ") != std::string::npos)
      throw ConfigError("bad subset name '" + name + "'");
    c.validate();
  }
  detection.validate();
  aggregation.validate();
  if (taus.empty()) throw ConfigError("no tau values configured");
  for (int32_t t : taus)
    if (t <= 0) throw ConfigError("tau values must be > 0");
  if (weighting && cell_population.empty() && strata.empty())
    throw ConfigError("weighting needs a cell population table or a strata file");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (out.empty()) throw ConfigError("no output directory given");
}

LocationNetwork load_network(const std::filesystem::path &towers, const std::filesystem::path &polygons,
                             const std::filesystem::path &regions, double merge_radius) {
  std::vector<CityPolygon> cities;
  if (!polygons.empty()) cities = read_city_polygons(polygons);
  auto net = build_network(read_towers(towers), cities, merge_radius);
  if (!regions.empty()) net = assign_regions(net, read_region_table(regions));
  return net;
}

std::vector<std::filesystem::path> run(const RunConfig &cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out);
  std::vector<std::filesystem::path> written;
  try {
    std::ostringstream report;
    auto net = load_network(cfg.towers, cfg.polygons, cfg.regions, cfg.merge_radius);
    report << "towers=" << net.tower_count() << "\ncells=" << net.size()
           << "\nurban_cells=" << net.urban_count() << "\nregions=" << net.region_count() << "\n";

    std::optional<std::vector<Stratum>> strata;
    if (cfg.weighting) {
      if (!cfg.strata.empty()) strata = read_strata(cfg.strata);
      else strata = build_strata(net, read_cell_population(cfg.cell_population), cfg.rural_median);
      report << "strata=" << strata->size() << "\n";
    }

    IngestOptions io;
    io.workers = cfg.workers;
    io.utc_offset_seconds = cfg.utc_offset_seconds;
    io.spill_dir = cfg.spill_dir;
    auto ing = ingest(cfg.cdr, net, io);
    const auto &st = ing.stats;
    report << "lines=" << st.lines << "\nmalformed_lines=" << st.malformed
           << "\nunknown_tower_records=" << st.unknown_tower << "\naccepted_records=" << st.accepted
           << "\nusers_in=" << st.users << "\nbots=" << st.bots << "\nbot_records=" << st.bot_records
           << "\nspill_partitions=" << st.partitions << "\n";

    for (const auto &[name, constraints] : cfg.subsets) {
      std::vector<UserDays> kept;
      for (const auto &u : ing.users)
        if (satisfies(u.profile, constraints)) kept.push_back(u);
      const auto filtered = static_cast<int64_t>(ing.users.size() - kept.size());
      report << "subset_" << name << "_users_kept=" << kept.size() << "\nsubset_" << name
             << "_users_filtered=" << filtered << "\n";
      auto histories = detect_all(kept, cfg.detection, cfg.workers);
      kept.clear();
      auto windows = resolve_windows(cfg.windows, histories);

      for (int32_t tau : cfg.taus) {
        AggregationParams ap = cfg.aggregation;
        ap.tau_min_days = tau;
        const auto excluded = excluded_units(tau, windows);
        MigrationTable table;
        std::optional<WeightTable> weights;
        if (strata) weights.emplace(*strata);
        for_each_outcome(histories, windows, ap, cfg.workers, [&](const UserOutcomes &o) {
          table.add(o, net);
          if (weights) weights->observe(o);
        });
        table.erase_units(excluded);
        auto path = cfg.out / dataset_name(false, name, tau);
        written.push_back(path);
        write_table(table, path, false);
        const std::string key = "subset_" + name + "_tau" + std::to_string(tau);
        report << key << "_rows=" << table.rows().size() << "\n" << key << "_excluded_units=" << excluded.size()
               << "\n";
        if (!weights) continue;
        MigrationTable adj;
        const WeightFn fn = weights->fn();
        for_each_outcome(histories, windows, ap, cfg.workers, [&](const UserOutcomes &o) { adj.add(o, net, fn); });
        adj.erase_units(excluded);
        path = cfg.out / dataset_name(true, name, tau);
        written.push_back(path);
        write_table(adj, path, true);
        // Coverage shortfall: target population lacking any observed user.
        double worst = 1.0;
        for (auto t : weights->units())
          for (auto m : kMeasures)
            if (weights->total_pop() > 0) worst = std::min(worst, weights->covered_pop(t, m) / weights->total_pop());
        report << key << "_weighted_rows=" << adj.rows().size() << "\n"
               << key << "_min_population_coverage=" << format_double(worst) << "\n"
               << key << "_unweighted_contributions=" << adj.excluded_contributions() << "\n"
               << key << "_users_without_stratum=" << weights->unmapped_users() << "\n";
      }
    }
    auto rp = cfg.out / "run_report.txt";
    written.push_back(rp);
    TextWriter w(rp);
    w.write(report.str());
    w.close();
  } catch (...) {
    for (const auto &p : written) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
    throw;
  }
  return written;
}

}  // namespace cdrmig
