#include "cdrmig/segmentation.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "cdrmig/textio.hpp"

namespace cdrmig {

void DetectionParams::validate() const {
  if (tau_min_days <= 0 || tau_min_days > tau_max_days)
    throw ConfigError("need 0 < tau_min_days <= tau_max_days");
  if (!(phi > 0 && phi <= 1)) throw ConfigError("phi must lie in (0, 1]");
  if (eps_gap_macro_months < 0 || eps_gap_meso_days < 0)
    throw ConfigError("gap tolerances must be >= 0");
}

const char *class_name(SegmentClass c) {
  switch (c) {
    case SegmentClass::home: return "home";
    case SegmentClass::migration: return "migration";
    case SegmentClass::ambiguous: return "ambiguous";
    case SegmentClass::short_stay: return "short";
  }
  return "?";
}

SegmentClass classify_segment(const MesoSegment &s, int32_t tau_min) {
  if (s.cell == s.macro_cell) return SegmentClass::home;
  if (s.min_duration >= tau_min) return SegmentClass::migration;
  if (s.max_duration >= tau_min) return SegmentClass::ambiguous;
  return SegmentClass::short_stay;
}

CellId preliminary_home(const DailySeries &days) {
  std::vector<CellId> cells;
  cells.reserve(days.size());
  for (const auto &d : days) cells.push_back(d.cell);
  return mode_cell(cells);
}

namespace {

struct MonthGroup {
  CellId cell;
  MonthKey first;
  MonthKey last;
  Day start() const { return first.first_day(); }
  Day end() const { return last.last_day(); }
  int32_t days() const { return span_days(start(), end()); }
};

std::vector<MonthGroup> group_months(const MonthlySeries &months, int32_t max_gap) {
  std::vector<MonthGroup> groups;
  for (const auto &m : months) {
    if (!groups.empty() && groups.back().cell == m.cell &&
        m.month.value - groups.back().last.value - 1 <= max_gap)
      groups.back().last = m.month;
    else
      groups.push_back({m.cell, m.month, m.month});
  }
  return groups;
}

// Same-cell groups with other groups between them are merged when those
// intervening groups are short in total. Groups that are adjacent in the list
// (only undefined months between) stay apart.
std::vector<MonthGroup> merge_interrupted(std::vector<MonthGroup> groups, int32_t tau_max) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < groups.size() && !changed; ++i) {
      int32_t between = 0;
      for (size_t j = i + 1; j < groups.size(); ++j) {
        if (groups[j].cell == groups[i].cell) {
          if (j > i + 1 && between < tau_max) {
            groups[i].last = std::max(groups[i].last, groups[j].last);
            groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                         groups.begin() + static_cast<std::ptrdiff_t>(j) + 1);
            changed = true;
          }
          break;
        }
        between += groups[j].days();
        if (between >= tau_max) break;
      }
    }
  }
  return groups;
}

std::vector<MonthGroup> resolve_month_overlaps(std::vector<MonthGroup> groups, int32_t tau_max) {
  auto too_short = [&](const MonthGroup &g) { return g.last < g.first || g.days() < tau_max; };
  std::erase_if(groups, too_short);
  for (;;) {
    std::stable_sort(groups.begin(), groups.end(), [](const MonthGroup &a, const MonthGroup &b) {
      return a.first < b.first;
    });
    size_t k = 0;
    while (k + 1 < groups.size() && groups[k].last < groups[k + 1].first) ++k;
    if (k + 1 >= groups.size()) break;
    MonthGroup &a = groups[k];
    MonthGroup &b = groups[k + 1];
    // Contested months go to the longer group; the earlier one wins ties.
    if (b.days() > a.days()) a.last = MonthKey{b.first.value - 1};
    else b.first = MonthKey{a.last.value + 1};
    std::erase_if(groups, too_short);
  }
  return groups;
}

}  // namespace

std::vector<MacroSegment> detect_macro(const MonthlySeries &months, const DailySeries &days,
                                       const DetectionParams &params) {
  if (days.empty()) return {};
  auto groups = group_months(months, params.eps_gap_macro_months);
  groups = merge_interrupted(std::move(groups), params.tau_max_days);
  groups = resolve_month_overlaps(std::move(groups), params.tau_max_days);
  if (groups.size() <= 1)
    return {MacroSegment{preliminary_home(days), days.front().day, days.back().day}};
  std::vector<MacroSegment> out;
  for (const auto &g : groups) out.push_back({g.cell, g.start(), g.end()});
  return out;
}

namespace {

// Observed days at `cell` and in total within [a, b]; `days` sorted.
std::pair<int32_t, int32_t> count_days(const DailySeries &days, CellId cell, Day a, Day b) {
  auto lo = std::lower_bound(days.begin(), days.end(), a,
                             [](const DailyLocation &d, Day x) { return d.day < x; });
  int32_t at = 0, total = 0;
  for (auto it = lo; it != days.end() && it->day <= b; ++it) {
    ++total;
    if (it->cell == cell) ++at;
  }
  return {at, total};
}

bool contained(const MesoSegment &inner, const MesoSegment &outer) {
  return outer.start <= inner.start && inner.end <= outer.end;
}

}  // namespace

std::vector<MesoSegment> detect_meso(const DailySeries &days, const DetectionParams &params) {
  const int32_t eps = params.eps_gap_meso_days;
  // (i) runs of observed days at one cell, tolerating unobserved gaps <= eps
  std::map<CellId, std::vector<std::pair<Day, Day>>> runs;
  for (size_t i = 0; i < days.size();) {
    size_t j = i + 1;
    while (j < days.size() && days[j].cell == days[i].cell &&
           days[j].day - days[j - 1].day - 1 <= eps)
      ++j;
    runs[days[i].cell].push_back({days[i].day, days[j - 1].day});
    i = j;
  }
  // (ii) merge same-cell runs strictly less than eps apart, then filter on phi
  std::vector<MesoSegment> segs;
  for (auto &[cell, list] : runs) {
    std::vector<std::pair<Day, Day>> merged;
    for (const auto &r : list) {
      if (!merged.empty() && r.first - merged.back().second - 1 < eps)
        merged.back().second = r.second;
      else
        merged.push_back(r);
    }
    for (const auto &[a, b] : merged) {
      auto [at, total] = count_days(days, cell, a, b);
      double frac = static_cast<double>(at) / total;
      if (frac < params.phi) continue;
      MesoSegment s;
      s.cell = cell;
      s.start = a;
      s.end = b;
      s.frac_days_at_location = frac;
      segs.push_back(s);
    }
  }
  // (iii) drop nested stays, split partial overlaps at their middle
  auto by_start = [](const MesoSegment &a, const MesoSegment &b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;
    return a.cell < b.cell;
  };
  for (;;) {
    std::sort(segs.begin(), segs.end(), by_start);
    std::vector<MesoSegment> kept;
    for (const auto &s : segs) {
      bool nested = false;
      for (const auto &k : kept)
        if (contained(s, k)) { nested = true; break; }
      if (!nested) kept.push_back(s);
    }
    segs = std::move(kept);
    size_t k = 0;
    while (k + 1 < segs.size() && segs[k].end < segs[k + 1].start) ++k;
    if (k + 1 >= segs.size()) break;
    MesoSegment &a = segs[k];
    MesoSegment &b = segs[k + 1];
    int32_t n = span_days(b.start, a.end);
    a.end = b.start + ((n + 1) / 2 - 1);
    b.start = a.end + 1;
  }
  return segs;
}

CellId macro_cell_for(const std::vector<MacroSegment> &macros, Day from, Day to) {
  CellId best = kNoCell;
  int32_t best_overlap = 0;
  for (const auto &m : macros) {
    int32_t o = overlap_days(m.start, m.end, from, to);
    if (o > best_overlap) {
      best_overlap = o;
      best = m.cell;
    }
  }
  if (best != kNoCell) return best;
  int32_t best_dist = 0;
  for (const auto &m : macros) {
    int32_t d = m.end < from ? from - m.end : m.start - to;
    if (best == kNoCell || d < best_dist) {
      best_dist = d;
      best = m.cell;
    }
  }
  return best;
}

std::vector<MesoSegment> annotate(std::vector<MesoSegment> meso, const DailySeries &days,
                                  const std::vector<MacroSegment> &macros) {
  auto before = [](const DailyLocation &d, Day x) { return d.day < x; };
  for (auto &s : meso) {
    s.min_duration = span_days(s.start, s.end);
    auto lo = std::lower_bound(days.begin(), days.end(), s.start, before);
    auto hi = std::lower_bound(days.begin(), days.end(), s.end + 1, before);
    Day first = lo == days.begin() ? s.start : std::prev(lo)->day + 1;
    Day last = hi == days.end() ? s.end : hi->day - 1;
    s.max_duration = span_days(first, last);
    s.macro_cell = macro_cell_for(macros, s.start, s.end);
  }
  return meso;
}

std::vector<MigrationEvent> classify(const std::vector<MesoSegment> &meso, int32_t tau_min) {
  std::vector<MigrationEvent> out;
  for (const auto &s : meso)
    if (classify_segment(s, tau_min) == SegmentClass::migration)
      out.push_back({s, s.macro_cell, s.cell});
  return out;
}

UserHistory detect_user(std::string user, const DailySeries &days, const DetectionParams &params) {
  UserHistory h;
  h.user = std::move(user);
  if (days.empty()) return h;
  h.first_day = days.front().day;
  h.last_day = days.back().day;
  h.macros = detect_macro(monthly(days), days, params);
  h.meso = annotate(detect_meso(days, params), days, h.macros);
  return h;
}

}  // namespace cdrmig
