#include "cdrmig/weighting.hpp"

#include <algorithm>
#include <set>

namespace cdrmig {

const char *stratum_zone_name(StratumZone z) {
  switch (z) {
    case StratumZone::urban: return "urban";
    case StratumZone::rural_low_density: return "rural_low_density";
    case StratumZone::rural_high_density: return "rural_high_density";
  }
  return "?";
}

StratumZone parse_stratum_zone(std::string_view s) {
  for (auto z : {StratumZone::urban, StratumZone::rural_low_density, StratumZone::rural_high_density})
    if (s == stratum_zone_name(z)) return z;
  throw DataError("unknown stratum zone '" + std::string(s) + "'");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::vector<Stratum> build_strata(const LocationNetwork &network,
                                  const std::map<CellId, CellPopulation> &cells,
                                  std::optional<double> rural_median) {
  for (const auto &c : network.cells())
    if (!cells.count(c.id))
      throw DataError("no population/density for cell " + std::to_string(c.id));
  if (!rural_median) {
    std::vector<double> d;
    for (const auto &c : network.cells())
      if (c.zone == Zone::rural) d.push_back(cells.at(c.id).density);
    rural_median = median(d);
  }
  std::map<std::pair<std::string, StratumZone>, Stratum> by_key;
  for (const auto &c : network.cells()) {
    const auto &cp = cells.at(c.id);
    StratumZone z = StratumZone::urban;
    if (c.zone == Zone::rural)
      z = cp.density < *rural_median ? StratumZone::rural_low_density : StratumZone::rural_high_density;
    auto &s = by_key[{c.region, z}];
    if (s.cells.empty()) {
      s.zone = z;
      s.id = c.region;
      if (z == StratumZone::rural_low_density) s.id += ":low";
      if (z == StratumZone::rural_high_density) s.id += ":high";
    }
    s.cells.push_back(c.id);
    s.pop += cp.pop_over_15;
  }
  std::vector<Stratum> out;
  for (auto &[k, s] : by_key) out.push_back(std::move(s));
  return out;
}

std::map<CellId, CellPopulation> read_cell_population(const std::filesystem::path &path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw DataError(path.string() + ": empty file");
  expect_header(line, {"cell_id", "pop_over_15", "density"}, path);
  std::map<CellId, CellPopulation> out;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 3) throw DataError(path.string() + ": bad line: " + line);
    CellPopulation cp{parse_double(f[1]), parse_double(f[2])};
    if (cp.pop_over_15 < 0) throw DataError(path.string() + ": negative population: " + line);
    out[static_cast<CellId>(parse_int(f[0]))] = cp;
  }
  return out;
}

void write_cell_population(const std::map<CellId, CellPopulation> &cells, const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("cell_id,pop_over_15,density");
  for (const auto &[c, p] : cells)
    out.line(std::to_string(c) + ',' + format_double(p.pop_over_15) + ',' + format_double(p.density));
  out.close();
}

void write_strata(const std::vector<Stratum> &strata, const std::map<CellId, CellPopulation> &cells,
                  const std::filesystem::path &path) {
  TextWriter out(path);
  out.line("stratum_id,cell_id,zone,pop_over_15,density");
  for (const auto &s : strata)
    for (CellId c : s.cells) {
      const auto &cp = cells.at(c);
      out.line(s.id + ',' + std::to_string(c) + ',' + stratum_zone_name(s.zone) + ',' +
               format_double(cp.pop_over_15) + ',' + format_double(cp.density));
    }
  out.close();
}

std::vector<Stratum> read_strata(const std::filesystem::path &path) {
  LineReader in(path);
  std::string line;
  if (!in.next(line)) throw DataError(path.string() + ": empty file");
  expect_header(line, {"stratum_id", "cell_id", "zone", "pop_over_15", "density"}, path);
  std::map<std::string, Stratum> by_id;
  std::set<CellId> seen;
  while (in.next(line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 5) throw DataError(path.string() + ": bad line: " + line);
    auto &s = by_id[std::string(f[0])];
    StratumZone z = parse_stratum_zone(f[2]);
    if (!s.cells.empty() && s.zone != z)
      throw DataError(path.string() + ": stratum " + std::string(f[0]) + " mixes zones");
    CellId c = static_cast<CellId>(parse_int(f[1]));
    if (!seen.insert(c).second)
      throw DataError(path.string() + ": cell " + std::to_string(c) + " in two strata");
    double pop = parse_double(f[3]);
    if (pop < 0) throw DataError(path.string() + ": negative population: " + line);
    s.id = std::string(f[0]);
    s.zone = z;
    s.cells.push_back(c);
    s.pop += pop;
  }
  std::vector<Stratum> out;
  for (auto &[id, s] : by_id) out.push_back(std::move(s));
  return out;
}

WeightTable::WeightTable(std::vector<Stratum> strata) : strata_(std::move(strata)) {
  for (size_t i = 0; i < strata_.size(); ++i)
    for (CellId c : strata_[i].cells) cell_stratum_[c] = i;
}

std::optional<size_t> WeightTable::stratum_of(CellId cell) const {
  auto it = cell_stratum_.find(cell);
  if (it == cell_stratum_.end()) return std::nullopt;
  return it->second;
}

void WeightTable::observe(const UserOutcomes &outcomes) {
  bool unmapped = false;
  for (const auto &p : outcomes.periods) {
    auto s = stratum_of(p.origin);
    if (!s) {
      unmapped = true;
      continue;
    }
    for (auto m : kMeasures)
      if (p[m].status != Status::unobserved) observed_[{*s, p.t.index, static_cast<int>(m)}] += 1;
  }
  if (unmapped) ++unmapped_;
}

void WeightTable::merge(const WeightTable &other) {
  for (const auto &[k, v] : other.observed_) observed_[k] += v;
  unmapped_ += other.unmapped_;
}

double WeightTable::observed_users(size_t stratum, HalfMonth t, Measure m) const {
  auto it = observed_.find({stratum, t.index, static_cast<int>(m)});
  return it == observed_.end() ? 0.0 : it->second;
}

std::optional<double> WeightTable::weight(CellId origin, HalfMonth t, Measure m) const {
  auto s = stratum_of(origin);
  if (!s) return std::nullopt;
  double n = observed_users(*s, t, m);
  if (n == 0) return std::nullopt;
  return strata_[*s].pop / n;
}

WeightFn WeightTable::fn() const {
  return [this](CellId origin, HalfMonth t, Measure m) { return weight(origin, t, m); };
}

double WeightTable::covered_pop(HalfMonth t, Measure m) const {
  double sum = 0;
  for (size_t i = 0; i < strata_.size(); ++i)
    if (observed_users(i, t, m) > 0) sum += strata_[i].pop;
  return sum;
}

double WeightTable::total_pop() const {
  double sum = 0;
  for (const auto &s : strata_) sum += s.pop;
  return sum;
}

std::vector<HalfMonth> WeightTable::units() const {
  std::set<int32_t> u;
  for (const auto &[k, v] : observed_) u.insert(std::get<1>(k));
  std::vector<HalfMonth> out;
  for (int32_t i : u) out.push_back(HalfMonth{i});
  return out;
}

void WeightTable::write(const std::filesystem::path &path) const {
  TextWriter out(path);
  out.line("stratum_id,year,month,half,measure,n_users_observed,pop_over_15,weight");
  for (const auto &[k, n] : observed_) {
    auto [s, ti, mi] = k;
    HalfMonth t{ti};
    out.line(strata_[s].id + ',' + std::to_string(t.year()) + ',' + std::to_string(t.month()) + ',' +
             std::to_string(t.half()) + ',' + measure_name(static_cast<Measure>(mi)) + ',' +
             format_double(n) + ',' + format_double(strata_[s].pop) + ',' +
             format_double(strata_[s].pop / n));
  }
  out.close();
}

}  // namespace cdrmig
