#include "cdrmig/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cdrmig/location.hpp"
#include "cdrmig/parallel.hpp"
#include "cdrmig/textio.hpp"

namespace cdrmig {

namespace {

std::vector<double> ranks(const std::vector<double> &v) {
  std::vector<size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (size_t i = 0; i < idx.size();) {
    size_t j = i;
    while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (size_t k = i; k < j; ++k) r[idx[k]] = avg;
    i = j;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size() || x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

UserHistory detect_trajectory(const Trajectory &t, const DetectionParams &params) {
  auto h = hourly(t);
  return detect_user(t.user, daily(h), params);
}

namespace {

// Distinct seeds per (grid point, agent) so thinning draws do not correlate.
uint64_t mix(uint64_t a, uint64_t b) {
  uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<AccuracyCell> home_accuracy(const SyntheticCorpus &corpus, const std::vector<int32_t> &deltas,
                                        const std::vector<double> &omegas, uint64_t seed,
                                        const DetectionParams &params, int workers) {
  std::vector<AccuracyCell> out;
  const size_t n = corpus.trajectories.size();
  for (int32_t delta : deltas)
    for (double omega : omegas) {
      AccuracyCell cell;
      cell.delta_days = delta;
      cell.omega = omega;
      std::vector<int8_t> verdict(n, -1);
      const uint64_t point_seed = mix(seed, mix(static_cast<uint64_t>(delta), std::llround(omega * 1e6)));
      parallel_for(n, workers, [&](size_t i) {
        Trajectory thinned;
        if (!thin(corpus.trajectories[i], {delta, omega, mix(point_seed, i)}, thinned)) return;
        auto h = detect_trajectory(thinned, params);
        CellId home = macro_cell_for(h.macros, h.first_day, h.last_day);
        verdict[i] = home == corpus.truth.agents[i].home ? 1 : 0;
      });
      for (auto v : verdict) {
        if (v < 0) {
          ++cell.skipped;
          continue;
        }
        ++cell.users;
        cell.correct += v;
      }
      out.push_back(cell);
    }
  return out;
}

bool event_detected(const PlantedEvent &e, const UserHistory &h, int32_t tau_min) {
  for (const auto &s : h.meso) {
    if (s.cell != e.destination || s.cell == s.macro_cell || s.min_duration < tau_min) continue;
    if (2 * overlap_days(s.start, s.end, e.start, e.end()) >= e.duration) return true;
  }
  return false;
}

std::vector<RecallPoint> migration_recall(const SyntheticCorpus &corpus, const std::vector<double> &omegas,
                                          int32_t delta_days, uint64_t seed,
                                          const DetectionParams &params, int workers) {
  std::vector<RecallPoint> out;
  const size_t n = corpus.trajectories.size();
  for (double omega : omegas) {
    RecallPoint p;
    p.omega = omega;
    std::vector<std::pair<int32_t, int32_t>> per(n, {-1, 0});  // (events, detected)
    const uint64_t point_seed = mix(seed, std::llround(omega * 1e6));
    parallel_for(n, workers, [&](size_t i) {
      const auto &agent = corpus.truth.agents[i];
      if (agent.events.empty()) return;
      Trajectory thinned;
      if (!thin(corpus.trajectories[i], {delta_days, omega, mix(point_seed, i)}, thinned)) return;
      Day w0 = to_day_hour(thinned.events.front().timestamp).day;
      Day w1 = to_day_hour(thinned.events.back().timestamp).day;
      auto h = detect_trajectory(thinned, params);
      int32_t events = 0, found = 0;
      for (const auto &e : agent.events) {
        if (e.start < w0 || e.end() > w1) continue;
        ++events;
        if (event_detected(e, h, params.tau_min_days)) ++found;
      }
      per[i] = {events, found};
    });
    for (auto [ev, found] : per) {
      if (ev < 0) {
        ++p.skipped;
        continue;
      }
      p.events += ev;
      p.detected += found;
    }
    out.push_back(p);
  }
  return out;
}

std::map<CellId, int> density_deciles(const std::map<CellId, CellPopulation> &population) {
  std::vector<std::pair<double, CellId>> order;
  double total = 0;
  for (const auto &[c, p] : population) {
    order.push_back({p.density, c});
    total += p.pop_over_15;
  }
  std::sort(order.begin(), order.end());
  std::map<CellId, int> out;
  double before = 0;
  for (const auto &[d, c] : order) {
    double pop = population.at(c).pop_over_15;
    double mid = total > 0 ? (before + pop / 2) / total : 0;
    out[c] = std::min(9, static_cast<int>(mid * 10));
    before += pop;
  }
  return out;
}

std::vector<BiasPoint> bias_surfaces(const BiasInput &in, const std::vector<FilterConstraints> &grid) {
  if (in.profiles.size() != in.homes.size()) throw DataError("profiles and homes differ in length");
  const auto decile = density_deciles(in.population);
  double total_pop = 0, capital_pop = 0;
  for (const auto &[c, p] : in.population) {
    total_pop += p.pop_over_15;
    if (in.capital.count(c)) capital_pop += p.pop_over_15;
  }
  std::vector<BiasPoint> out;
  for (const auto &fc : grid) {
    BiasPoint b;
    b.constraints = fc;
    int64_t in_capital = 0;
    std::array<int64_t, 10> bins{};
    for (size_t i = 0; i < in.profiles.size(); ++i) {
      if (!satisfies(in.profiles[i], fc)) continue;
      ++b.users;
      if (in.capital.count(in.homes[i])) ++in_capital;
      if (auto it = decile.find(in.homes[i]); it != decile.end()) ++bins[it->second];
    }
    if (b.users > 0) {
      double user_share = static_cast<double>(in_capital) / b.users;
      double pop_share = total_pop > 0 ? capital_pop / total_pop : 0;
      b.capital_bias = pop_share > 0 ? user_share / pop_share : 0;
      for (int k = 0; k < 10; ++k) b.density_bins[k] = static_cast<double>(bins[k]) / b.users;
    }
    out.push_back(b);
  }
  return out;
}

void write_accuracy_csv(const std::vector<AccuracyCell> &cells, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("delta_days,omega,users,correct,skipped,accuracy");
  for (const auto &c : cells)
    out.line(std::to_string(c.delta_days) + ',' + format_double(c.omega) + ',' + std::to_string(c.users) +
             ',' + std::to_string(c.correct) + ',' + std::to_string(c.skipped) + ',' +
             format_double(c.accuracy()));
  out.close();
}

void write_recall_csv(const std::vector<RecallPoint> &points, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("omega,events,detected,skipped,recall");
  for (const auto &p : points)
    out.line(format_double(p.omega) + ',' + std::to_string(p.events) + ',' + std::to_string(p.detected) +
             ',' + std::to_string(p.skipped) + ',' + format_double(p.recall()));
  out.close();
}

void write_bias_csv(const std::vector<BiasPoint> &points, const std::filesystem::path &path) {
  TextWriter out(path);
  std::string h = "min_span_days,min_frac_observed,max_gap_days,users,capital_bias";
  for (int k = 1; k <= 10; ++k) h += ",bin" + std::to_string(k);
  out.line(h);
  for (const auto &p : points) {
    std::string l = std::to_string(p.constraints.min_span_days) + ',' +
                    format_double(p.constraints.min_frac_observed) + ',' +
                    std::to_string(p.constraints.max_gap_days) + ',' + std::to_string(p.users) + ',' +
                    format_double(p.capital_bias);
    for (double v : p.density_bins) l += ',' + format_double(v);
    out.line(l);
  }
  out.close();
}

}  // namespace cdrmig
