// Command-line front end: one subcommand per stage plus `run`.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <sstream>

#include "cdrmig/pipeline.hpp"
#include "cdrmig/synth.hpp"
#include "cdrmig/textio.hpp"
#include "cdrmig/validate.hpp"

using namespace cdrmig;
namespace fs = std::filesystem;

namespace {

struct NetworkFiles {
  fs::path network;
  fs::path regions;

  void add(CLI::App *app) {
    app->add_option("--network", network, "network.csv from the network stage")->required();
    app->add_option("--regions", regions, "regions.csv from the network stage")->required();
  }
  LocationNetwork load() const { return assign_regions(read_network(network), read_region_table(regions)); }
};

void add_detection(CLI::App *app, DetectionParams &p) {
  app->add_option("--tau-min", p.tau_min_days, "shortest temporary stay, days");
  app->add_option("--tau-max", p.tau_max_days, "shortest residence, days");
  app->add_option("--eps-gap-macro", p.eps_gap_macro_months, "months of undefined location bridged");
  app->add_option("--eps-gap-meso", p.eps_gap_meso_days, "days of gap bridged inside a stay");
  app->add_option("--phi", p.phi, "minimum share of days at a stay's cell");
}

void add_aggregation(CLI::App *app, AggregationParams &p, std::string &confidence) {
  app->add_option("--eps-tol", p.eps_tol_days, "unobserved days tolerated at a unit boundary");
  app->add_option("--sigma", p.sigma_days, "minimum overlap for stock, days");
  app->add_option("--agg-eps-gap-meso", p.eps_gap_meso_days, "gap bridged when bounding stays, days");
  app->add_option("--confidence", confidence, "high or low")->check(CLI::IsMember({"high", "low", "high+low"}));
}

FilterConstraints parse_subset(const std::string &s) {
  if (s == "A") return FilterConstraints::subset_a();
  if (s == "B") return FilterConstraints::subset_b();
  FilterConstraints c;
  char sep1 = 0, sep2 = 0;
  std::istringstream in(s);
  if (!(in >> c.min_span_days >> sep1 >> c.min_frac_observed >> sep2 >> c.max_gap_days) || sep1 != ',' ||
      sep2 != ',' || !in.eof())
    throw ConfigError("bad constraints '" + s + "', expected A, B or span,frac,gap");
  c.validate();
  return c;
}

template <class T>
std::vector<T> parse_list(const std::string &s) {
  std::vector<T> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream is(item);
    T v;
    if (!(is >> v) || !is.eof()) throw ConfigError("bad list value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

// Validation grid: `key=value` lines, lists comma separated.
struct Grid {
  uint64_t seed = 1;
  std::vector<int32_t> deltas{30, 60, 90, 120, 180, 240, 290, 360};
  std::vector<double> omegas{0.1, 0.3, 0.5, 0.7, 0.9};
  int32_t recall_delta = 360;
  std::vector<double> recall_omegas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<int32_t> bias_min_span;
  std::vector<double> bias_min_frac;
  std::vector<int32_t> bias_max_gap;

  static Grid load(const fs::path &path) {
    Grid g;
    LineReader in(path);
    std::string line;
    while (in.next(line)) {
      if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
      auto eq = line.find('=');
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (eq == std::string::npos) throw ConfigError(path.string() + ": expected key=value: " + line);
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
      };
      std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      if (key == "seed") g.seed = std::stoull(value);
      else if (key == "deltas") g.deltas = parse_list<int32_t>(value);
      else if (key == "omegas") g.omegas = parse_list<double>(value);
      else if (key == "recall_delta") g.recall_delta = std::stoi(value);
      else if (key == "recall_omegas") g.recall_omegas = parse_list<double>(value);
      else if (key == "bias_min_span") g.bias_min_span = parse_list<int32_t>(value);
      else if (key == "bias_min_frac") g.bias_min_frac = parse_list<double>(value);
      else if (key == "bias_max_gap") g.bias_max_gap = parse_list<int32_t>(value);
      else throw ConfigError(path.string() + ": unknown key '" + key + "'");
    }
    for (double o : g.omegas)
      if (!(o > 0 && o <= 1)) throw ConfigError("omega must lie in (0, 1]");
    for (double o : g.recall_omegas)
      if (!(o > 0 && o <= 1)) throw ConfigError("omega must lie in (0, 1]");
    for (int32_t d : g.deltas)
      if (d < 2) throw ConfigError("delta must be >= 2 days");
    return g;
  }
};

void write_text(const fs::path &path, const std::string &text) {
  TextWriter w(path);
  w.write(text);
  w.close();
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Temporary migration statistics from call detail records"};
  app.require_subcommand(1);
  int workers = 1;
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  // network
  auto *net_cmd = app.add_subcommand("network", "build the cell network");
  fs::path towers, polygons, regions_in, out_dir;
  double merge_radius = 2000;
  net_cmd->add_option("--towers", towers, "tower_id,x,y")->required();
  net_cmd->add_option("--polygons", polygons, "city polygons");
  net_cmd->add_option("--regions", regions_in, "prepared cell_id,region_id,zone table");
  net_cmd->add_option("--merge-radius", merge_radius, "metres");
  net_cmd->add_option("--out-dir", out_dir)->required();

  // ingest
  auto *ing_cmd = app.add_subcommand("ingest", "parse CDR files into daily locations");
  fs::path network_path;
  std::vector<fs::path> cdr;
  int32_t utc_offset = 0;
  fs::path spill_dir;
  ing_cmd->add_option("--network", network_path)->required();
  ing_cmd->add_option("--cdr", cdr, "CDR csv or csv.gz files")->required();
  ing_cmd->add_option("--utc-offset", utc_offset, "seconds added to timestamps before bucketing");
  ing_cmd->add_option("--spill-dir", spill_dir, "overrides CDRMIG_TMPDIR");
  ing_cmd->add_option("--out-dir", out_dir)->required();

  // filter
  auto *fil_cmd = app.add_subcommand("filter", "keep users meeting observation constraints");
  fs::path daily_path, profiles_path, out_path;
  std::string subset = "A";
  fil_cmd->add_option("--daily", daily_path)->required();
  fil_cmd->add_option("--profiles", profiles_path)->required();
  fil_cmd->add_option("--subset", subset, "A, B or min_span,min_frac,max_gap");
  fil_cmd->add_option("--out", out_path)->required();

  // detect
  auto *det_cmd = app.add_subcommand("detect", "segment daily series into stays");
  DetectionParams detection;
  det_cmd->add_option("--daily", daily_path)->required();
  add_detection(det_cmd, detection);
  det_cmd->add_option("--out", out_path)->required();

  // aggregate
  auto *agg_cmd = app.add_subcommand("aggregate", "compute per-user outcomes and the unweighted table");
  NetworkFiles agg_net;
  fs::path segments_path, outcomes_path;
  AggregationParams aggregation;
  std::string confidence = "high", windows = "auto";
  agg_net.add(agg_cmd);
  agg_cmd->add_option("--segments", segments_path)->required();
  agg_cmd->add_option("--tau", aggregation.tau_min_days, "minimum stay for a migration, days");
  add_aggregation(agg_cmd, aggregation, confidence);
  agg_cmd->add_option("--windows", windows, "auto, reference, or from:to[:tail_cap],...");
  agg_cmd->add_option("--outcomes", outcomes_path, "per-user outcome dump (reported units only)")->required();
  agg_cmd->add_option("--out", out_path, "unweighted table")->required();

  // weight
  auto *wei_cmd = app.add_subcommand("weight", "post-stratify an outcome dump");
  NetworkFiles wei_net;
  fs::path strata_path, cell_pop_path, weights_out, strata_out;
  std::optional<double> rural_median;
  wei_net.add(wei_cmd);
  wei_cmd->add_option("--outcomes", outcomes_path)->required();
  auto *strata_opt = wei_cmd->add_option("--strata", strata_path, "prepared strata file");
  auto *pop_opt = wei_cmd->add_option("--cell-population", cell_pop_path, "cell_id,pop_over_15,density");
  strata_opt->excludes(pop_opt);
  wei_cmd->add_option("--rural-median", rural_median, "density cut between rural strata");
  wei_cmd->add_option("--weights-out", weights_out, "per-stratum weight dump");
  wei_cmd->add_option("--strata-out", strata_out, "strata used");
  wei_cmd->add_option("--out", out_path, "weighted table")->required();

  // synth
  auto *syn_cmd = app.add_subcommand("synth", "generate a synthetic corpus with ground truth");
  fs::path scenario_path;
  std::vector<std::string> overrides;
  syn_cmd->add_option("--config", scenario_path, "key=value scenario file");
  syn_cmd->add_option("--set", overrides, "key=value overriding the scenario file");
  syn_cmd->add_option("--out-dir", out_dir)->required();

  // validate
  auto *val_cmd = app.add_subcommand("validate", "accuracy experiments on a synthetic corpus");
  fs::path grid_path;
  val_cmd->add_option("--config", scenario_path, "key=value scenario file");
  val_cmd->add_option("--set", overrides, "key=value overriding the scenario file");
  val_cmd->add_option("--grid", grid_path, "key=value experiment grid");
  add_detection(val_cmd, detection);
  val_cmd->add_option("--out-dir", out_dir)->required();

  // run
  auto *run_cmd = app.add_subcommand("run", "end-to-end run producing all datasets");
  RunConfig rc;
  std::vector<std::string> subsets;
  std::string taus = "20,30,60";
  bool no_weighting = false;
  run_cmd->add_option("--cdr", rc.cdr)->required();
  run_cmd->add_option("--towers", rc.towers)->required();
  run_cmd->add_option("--polygons", rc.polygons);
  run_cmd->add_option("--regions", rc.regions);
  run_cmd->add_option("--merge-radius", rc.merge_radius, "metres");
  run_cmd->add_option("--cell-population", rc.cell_population);
  run_cmd->add_option("--strata", rc.strata);
  run_cmd->add_option("--rural-median", rc.rural_median);
  run_cmd->add_option("--subset", subsets, "NAME=A|B|min_span,min_frac,max_gap; replaces the defaults");
  run_cmd->add_option("--taus", taus, "comma-separated minimum durations");
  run_cmd->add_flag("--no-weighting", no_weighting);
  run_cmd->add_option("--windows", rc.windows, "auto, reference, or from:to[:tail_cap],...");
  run_cmd->add_option("--utc-offset", rc.utc_offset_seconds);
  run_cmd->add_option("--spill-dir", rc.spill_dir, "overrides CDRMIG_TMPDIR");
  add_detection(run_cmd, rc.detection);
  add_aggregation(run_cmd, rc.aggregation, confidence);
  run_cmd->add_option("--out-dir", rc.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (net_cmd->parsed()) {
      auto net = load_network(towers, polygons, regions_in, merge_radius);
      fs::create_directories(out_dir);
      write_network(net, out_dir / "network.csv");
      write_region_table(net, out_dir / "regions.csv");
      std::cout << "towers=" << net.tower_count() << " cells=" << net.size() << " urban=" << net.urban_count()
                << " regions=" << net.region_count() << "\n";
    } else if (ing_cmd->parsed()) {
      IngestOptions io;
      io.workers = workers;
      io.utc_offset_seconds = utc_offset;
      io.spill_dir = spill_dir;
      auto res = ingest(cdr, read_network(network_path), io);
      fs::create_directories(out_dir);
      write_daily(res.users, out_dir / "daily.csv.gz");
      write_profiles(res.users, out_dir / "profiles.csv");
      const auto &s = res.stats;
      std::ostringstream r;
      r << "lines=" << s.lines << "\nmalformed_lines=" << s.malformed << "\nunknown_tower_records=" << s.unknown_tower
        << "\naccepted_records=" << s.accepted << "\nusers_in=" << s.users << "\nbots=" << s.bots
        << "\nbot_records=" << s.bot_records << "\nspill_partitions=" << s.partitions << "\n";
      write_text(out_dir / "ingest_report.txt", r.str());
      std::cout << r.str();
    } else if (fil_cmd->parsed()) {
      auto c = parse_subset(subset);
      auto users = read_daily(daily_path);
      read_profiles(profiles_path, users);
      std::vector<UserDays> kept;
      for (auto &u : users)
        if (satisfies(u.profile, c)) kept.push_back(std::move(u));
      write_daily(kept, out_path);
      std::cout << "users_kept=" << kept.size() << " users_filtered=" << users.size() - kept.size() << "\n";
    } else if (det_cmd->parsed()) {
      write_segments(detect_all(read_daily(daily_path), detection, workers), out_path);
    } else if (agg_cmd->parsed()) {
      aggregation.confidence = parse_confidence(confidence);
      aggregation.validate();
      auto net = agg_net.load();
      auto histories = read_segments(segments_path);
      auto wins = resolve_windows(windows, histories);
      auto excluded = excluded_units(aggregation.tau_min_days, wins);
      std::sort(excluded.begin(), excluded.end());
      MigrationTable table;
      TextWriter dump(outcomes_path);
      write_outcomes_header(dump);
      UserOutcomes kept;
      for_each_outcome(histories, wins, aggregation, workers, [&](const UserOutcomes &o) {
        kept.user = o.user;
        kept.periods.clear();
        for (const auto &p : o.periods)
          if (!std::binary_search(excluded.begin(), excluded.end(), p.t)) kept.periods.push_back(p);
        table.add(kept, net);
        write_outcomes(dump, kept);
      });
      dump.close();
      write_table(table, out_path, false);
      std::cout << "users=" << histories.size() << " rows=" << table.rows().size()
                << " excluded_units=" << excluded.size() << "\n";
    } else if (wei_cmd->parsed()) {
      auto net = wei_net.load();
      std::vector<Stratum> strata;
      if (!strata_path.empty()) {
        strata = read_strata(strata_path);
      } else if (!cell_pop_path.empty()) {
        auto cells = read_cell_population(cell_pop_path);
        strata = build_strata(net, cells, rural_median);
        if (!strata_out.empty()) write_strata(strata, cells, strata_out);
      } else {
        throw ConfigError("weight needs --strata or --cell-population");
      }
      WeightTable weights(strata);
      read_outcomes(outcomes_path, [&](UserOutcomes &&o) { weights.observe(o); });
      MigrationTable table;
      const WeightFn fn = weights.fn();
      read_outcomes(outcomes_path, [&](UserOutcomes &&o) { table.add(o, net, fn); });
      write_table(table, out_path, true);
      if (!weights_out.empty()) weights.write(weights_out);
      std::cout << "strata=" << strata.size() << " rows=" << table.rows().size()
                << " users_without_stratum=" << weights.unmapped_users() << "\n";
    } else if (syn_cmd->parsed() || val_cmd->parsed()) {
      std::string text;
      if (!scenario_path.empty()) text = ScenarioConfig::load(scenario_path).to_text();
      for (const auto &o : overrides) text += o + "\n";
      auto scenario = ScenarioConfig::parse(text);
      auto corpus = generate(scenario);
      fs::create_directories(out_dir);
      if (syn_cmd->parsed()) {
        write_towers(corpus.towers, out_dir / "towers.csv");
        write_cdr(corpus.trajectories, out_dir / "cdr.csv.gz");
        write_truth(corpus.truth, out_dir / "truth.csv");
        write_cell_population(synthetic_population(scenario), out_dir / "cells.csv");
        write_text(out_dir / "scenario.txt", scenario.to_text());
      } else {
        Grid g = grid_path.empty() ? Grid{} : Grid::load(grid_path);
        detection.validate();
        write_accuracy_csv(home_accuracy(corpus, g.deltas, g.omegas, g.seed, detection, workers),
                           out_dir / "accuracy.csv");
        write_recall_csv(migration_recall(corpus, g.recall_omegas, g.recall_delta, g.seed, detection, workers),
                         out_dir / "recall.csv");
        if (!g.bias_min_span.empty() || !g.bias_min_frac.empty() || !g.bias_max_gap.empty()) {
          BiasInput in;
          in.population = synthetic_population(scenario);
          CellId capital = 0;
          for (const auto &[c, p] : in.population)
            if (p.pop_over_15 > in.population.at(capital).pop_over_15) capital = c;
          in.capital = {capital};
          for (size_t i = 0; i < corpus.trajectories.size(); ++i) {
            in.profiles.push_back(profile(corpus.trajectories[i]));
            in.homes.push_back(corpus.truth.agents[i].home);
          }
          auto spans = g.bias_min_span.empty() ? std::vector<int32_t>{1} : g.bias_min_span;
          auto fracs = g.bias_min_frac.empty() ? std::vector<double>{0.0} : g.bias_min_frac;
          auto gaps = g.bias_max_gap.empty() ? std::vector<int32_t>{0} : g.bias_max_gap;
          std::vector<FilterConstraints> grid;
          for (auto s : spans)
            for (auto f : fracs)
              for (auto gp : gaps) grid.push_back({s, f, gp});
          write_bias_csv(bias_surfaces(in, grid), out_dir / "bias.csv");
        }
      }
    } else if (run_cmd->parsed()) {
      rc.workers = workers;
      rc.weighting = !no_weighting;
      rc.taus = parse_list<int32_t>(taus);
      rc.aggregation.confidence = parse_confidence(confidence);
      if (!subsets.empty()) {
        rc.subsets.clear();
        for (const auto &s : subsets) {
          auto eq = s.find('=');
          if (eq == std::string::npos) throw ConfigError("bad --subset '" + s + "', expected NAME=constraints");
          rc.subsets[s.substr(0, eq)] = parse_subset(s.substr(eq + 1));
        }
      }
      for (const auto &p : run(rc)) std::cout << p.string() << "\n";
    }
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
