#include "oracle.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace oracle {

using namespace cdrmig;

namespace {

struct Stay {
  CellId cell;
  Day start;
  Day end;
};

int32_t overlap(Day a0, Day a1, Day b0, Day b1) {
  Day lo = std::max(a0, b0), hi = std::min(a1, b1);
  return hi < lo ? 0 : (hi - lo) + 1;
}

}  // namespace

Table truth_table(const GroundTruth &truth, const LocationNetwork &network, const TruthParams &p) {
  Table out;
  const HalfMonth first{half_month_of(truth.first_day).index + p.edge_units};
  const HalfMonth last{half_month_of(truth.last_day).index - p.edge_units};
  const int32_t n = (truth.last_day - truth.first_day) + 1;
  std::vector<CellId> loc(static_cast<size_t>(n));
  for (const auto &a : truth.agents) {
    std::fill(loc.begin(), loc.end(), a.home);
    for (const auto *list : {&a.events, &a.micro_trips})
      for (const auto &e : *list)
        for (int32_t k = 0; k < e.duration; ++k) {
          int32_t i = (e.start - truth.first_day) + k;
          if (i >= 0 && i < n) loc[static_cast<size_t>(i)] = e.destination;
        }
    std::vector<Stay> away;
    for (int32_t i = 0; i < n;) {
      int32_t j = i;
      while (j < n && loc[static_cast<size_t>(j)] == loc[static_cast<size_t>(i)]) ++j;
      if (loc[static_cast<size_t>(i)] != a.home && j - i >= p.tau)
        away.push_back({loc[static_cast<size_t>(i)], truth.first_day + i, truth.first_day + (j - 1)});
      i = j;
    }
    const std::string &origin = network.region_of(a.home);
    for (HalfMonth t = first; t <= last; t = t.next()) {
      auto &obs = out.observed[{origin, t.index}];
      for (auto &v : obs) v += 1;
      std::set<std::string> dep, ret;
      const Stay *best = nullptr;
      int32_t best_ov = 0;
      for (const auto &s : away) {
        if (half_month_of(s.start) == t) dep.insert(network.region_of(s.cell));
        if (half_month_of(s.end) == t) ret.insert(network.region_of(s.cell));
        int32_t ov = overlap(s.start, s.end, t.start(), t.end());
        if (ov >= p.sigma && ov > best_ov) {
          best = &s;
          best_ov = ov;
        }
      }
      for (const auto &r : dep) out.counts[{origin, r, t.index}][0] += 1;
      for (const auto &r : ret) out.counts[{origin, r, t.index}][1] += 1;
      if (best) out.counts[{origin, network.region_of(best->cell), t.index}][2] += 1;
    }
  }
  return out;
}

Table from_pipeline(const MigrationTable &table, const Table &reference_keys) {
  Table out;
  for (const auto &r : table.rows()) {
    out.counts[{r.origin, r.destination, r.t.index}] = r.count;
    out.observed[{r.origin, r.t.index}] = r.observed;
  }
  for (const auto &[key, v] : reference_keys.observed) {
    auto &slot = out.observed[key];
    for (auto m : kMeasures) slot[static_cast<size_t>(m)] = table.observed(key.first, HalfMonth{key.second}, m);
  }
  return out;
}

std::vector<std::string> diff(const Table &expected, const Table &actual) {
  std::vector<std::string> out;
  auto show = [](const std::array<double, 3> &v) {
    std::ostringstream s;
    s << v[0] << '/' << v[1] << '/' << v[2];
    return s.str();
  };
  std::set<std::tuple<std::string, std::string, int32_t>> keys;
  for (const auto &[k, v] : expected.counts) keys.insert(k);
  for (const auto &[k, v] : actual.counts) keys.insert(k);
  const std::array<double, 3> zero{};
  for (const auto &k : keys) {
    auto e = expected.counts.count(k) ? expected.counts.at(k) : zero;
    auto a = actual.counts.count(k) ? actual.counts.at(k) : zero;
    if (e != a)
      out.push_back(std::get<0>(k) + "->" + std::get<1>(k) + " " + format_half_month(HalfMonth{std::get<2>(k)}) +
                    ": expected " + show(e) + " got " + show(a));
  }
  std::set<std::pair<std::string, int32_t>> okeys;
  for (const auto &[k, v] : expected.observed) okeys.insert(k);
  for (const auto &[k, v] : actual.observed) okeys.insert(k);
  for (const auto &k : okeys) {
    auto e = expected.observed.count(k) ? expected.observed.at(k) : zero;
    auto a = actual.observed.count(k) ? actual.observed.at(k) : zero;
    if (e != a)
      out.push_back("observed " + k.first + " " + format_half_month(HalfMonth{k.second}) + ": expected " + show(e) +
                    " got " + show(a));
  }
  return out;
}

namespace {

std::vector<Stay> runs(const DailySeries &days, int32_t eps_gap) {
  std::vector<Stay> out;
  for (const auto &d : days) {
    if (!out.empty() && out.back().cell == d.cell && (d.day - out.back().end) - 1 <= eps_gap) {
      out.back().end = d.day;
      continue;
    }
    out.push_back({d.cell, d.day, d.day});
  }
  return out;
}

bool in_unit(Day d, HalfMonth t) { return half_month_of(d) == t; }

}  // namespace

Verdict enumerate(const DailySeries &days, CellId home, HalfMonth t, Measure m, const EnumParams &p) {
  const auto segs = runs(days, p.eps_gap);
  const Day ts = t.start(), te = t.end();
  Verdict v;
  if (segs.empty()) {
    v.possible = true;
    return v;
  }

  // Hidden stays fill gaps; they may start or end anywhere inside one.
  auto gap_possible = [&](Day gs, Day ge) {
    if ((ge - gs) + 1 < p.tau) return false;
    switch (m) {
      case Measure::depart: return overlap(gs, ge - (p.tau - 1), ts, te) > 0;
      case Measure::ret: return overlap(gs + (p.tau - 1), ge, ts, te) > 0;
      case Measure::stock: return overlap(gs, ge, ts, te) >= p.sigma;
    }
    return false;
  };
  v.possible = gap_possible(segs.front().start - p.horizon, segs.front().start - 1) ||
               gap_possible(segs.back().end + 1, segs.back().end + p.horizon);
  for (size_t i = 0; i + 1 < segs.size(); ++i)
    if (segs[i + 1].start - segs[i].end > 1) v.possible |= gap_possible(segs[i].end + 1, segs[i + 1].start - 1);

  for (size_t i = 0; i < segs.size(); ++i) {
    const Stay &s = segs[i];
    if (s.cell == home) continue;
    Day lo = s.start - p.horizon, hi = s.end + p.horizon;
    if (i > 0) lo = segs[i - 1].cell == s.cell ? segs[i - 1].end + (p.eps_gap + 1) : segs[i - 1].end + 1;
    if (i + 1 < segs.size())
      hi = segs[i + 1].cell == s.cell ? segs[i + 1].start - (p.eps_gap + 1) : segs[i + 1].start - 1;
    const HalfMonth us = half_month_of(s.start), ue = half_month_of(s.end);
    const bool pin_start = us.start() - lo <= p.eps_tol;
    const bool pin_end = hi - ue.end() <= p.eps_tol;
    // Attribution goes to the observed unit while the tolerance holds; the
    // event is still possible in the unit of its true date.
    bool all = true, any = false;
    for (Day a = lo; a <= s.start; ++a)
      for (Day b = s.end; b <= hi; ++b) {
        bool attributed = false, loose = false;
        switch (m) {
          case Measure::depart:
            attributed = pin_start ? us == t && (b - std::max(a, ts)) + 1 >= p.tau
                                   : in_unit(a, t) && (b - a) + 1 >= p.tau;
            loose = in_unit(a, t) && (b - a) + 1 >= p.tau;
            break;
          case Measure::ret:
            attributed = pin_end ? ue == t && (std::min(b, te) - a) + 1 >= p.tau
                                 : in_unit(b, t) && (b - a) + 1 >= p.tau;
            loose = in_unit(b, t) && (b - a) + 1 >= p.tau;
            break;
          case Measure::stock:
            attributed = loose = (b - a) + 1 >= p.tau && overlap(a, b, ts, te) >= p.sigma;
            break;
        }
        any |= attributed || loose;
        all &= attributed;
      }
    v.possible |= any;
    v.certain |= all;
  }
  return v;
}

}  // namespace oracle
