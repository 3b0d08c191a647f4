#include "cdrmig/rules.hpp"

#include <algorithm>

#include "cdrmig/textio.hpp"

namespace cdrmig {

const char *confidence_name(Confidence c) { return c == Confidence::high ? "high" : "low"; }

Confidence parse_confidence(std::string_view s) {
  if (s == "high") return Confidence::high;
  if (s == "low" || s == "high+low") return Confidence::low;
  throw ConfigError("unknown confidence '" + std::string(s) + "' (expected high or low)");
}

Timeline build_timeline(const UserHistory &h, const RuleParams &p) {
  Timeline tl;
  tl.macros = h.macros;
  const int32_t eps = p.eps_gap_meso_days;
  const auto &m = h.meso;
  for (size_t k = 0; k < m.size(); ++k) {
    TimelineSegment s;
    s.cell = m[k].cell;
    s.macro_cell = m[k].macro_cell;
    s.start = m[k].start;
    s.end = m[k].end;
    s.min_duration = m[k].min_duration;
    s.entry = k == 0;
    s.exit = k + 1 == m.size();
    // A same-cell neighbour closer than eps+1 days would have been merged.
    if (s.entry) s.lo = s.start;
    else s.lo = m[k - 1].end + (m[k - 1].cell == s.cell ? eps + 1 : 1);
    if (s.exit) s.hi = s.end;
    else s.hi = m[k + 1].start - (m[k + 1].cell == s.cell ? eps + 1 : 1);
    tl.segments.push_back(s);
  }
  const int n = static_cast<int>(m.size());
  if (n == 0) return tl;
  tl.gaps.push_back({kMinusInfinity, m[0].start - 1, -1, 0});
  for (int k = 0; k + 1 < n; ++k)
    if (m[k + 1].start - m[k].end > 1) tl.gaps.push_back({m[k].end + 1, m[k + 1].start - 1, k, k + 1});
  tl.gaps.push_back({m[n - 1].end + 1, kPlusInfinity, n - 1, -1});
  return tl;
}

namespace {

bool in_unit(Day d, Day ts, Day te) { return ts <= d && d <= te; }

struct Unit {
  Day ts, te;
  explicit Unit(HalfMonth t) : ts(t.start()), te(t.end()) {}
};

void add_hit(std::vector<RuleHit> &hits, CellId dest, const char *id) {
  for (const auto &h : hits)
    if (h.destination == dest) return;  // one event per destination and unit
  hits.push_back({dest, id});
}

}  // namespace

std::vector<RuleHit> departures(const Timeline &tl, HalfMonth t, const RuleParams &p, Confidence c) {
  Unit u(t);
  std::vector<RuleHit> hits;
  for (size_t k = 0; k < tl.segments.size(); ++k) {
    const auto &s = tl.segments[k];
    if (!s.non_home() || s.entry || !in_unit(s.start, u.ts, u.te)) continue;
    if (u.ts - s.lo > p.eps_tol_days) continue;
    if (s.min_duration >= p.tau_min_days) {
      add_hit(hits, s.cell, s.exit ? "depart_high_2" : "depart_high_1");
    } else if (c == Confidence::low) {
      Day first = std::max(u.ts, s.lo);
      if (span_days(first, s.hi) < p.tau_min_days) continue;
      const bool same_prev = tl.segments[k - 1].cell == s.cell;
      int id = same_prev ? (s.lo >= u.ts ? 5 : 3) : 1;
      static const char *ids[] = {"", "depart_low_1", "depart_low_2", "depart_low_3",
                                  "depart_low_4", "depart_low_5", "depart_low_6"};
      add_hit(hits, s.cell, ids[id + (s.exit ? 1 : 0)]);
    }
  }
  return hits;
}

std::vector<RuleHit> returns(const Timeline &tl, HalfMonth t, const RuleParams &p, Confidence c) {
  Unit u(t);
  std::vector<RuleHit> hits;
  for (size_t k = 0; k < tl.segments.size(); ++k) {
    const auto &s = tl.segments[k];
    if (!s.non_home() || s.exit || !in_unit(s.end, u.ts, u.te)) continue;
    if (s.hi - u.te > p.eps_tol_days) continue;
    if (s.min_duration >= p.tau_min_days) {
      add_hit(hits, s.cell, s.entry ? "return_high_2" : "return_high_1");
    } else if (c == Confidence::low) {
      Day last = std::min(u.te, s.hi);
      if (span_days(s.lo, last) < p.tau_min_days) continue;
      const bool same_next = tl.segments[k + 1].cell == s.cell;
      int id = same_next ? (s.hi <= u.te ? 5 : 3) : 1;
      static const char *ids[] = {"", "return_low_1", "return_low_2", "return_low_3",
                                  "return_low_4", "return_low_5", "return_low_6"};
      add_hit(hits, s.cell, ids[id + (s.entry ? 1 : 0)]);
    }
  }
  return hits;
}

namespace {

const char *stock_high_case(const TimelineSegment &s, const Unit &u) {
  if (s.start <= u.ts && s.end >= u.te)
    return s.exit ? "stock_high_8" : s.entry ? "stock_high_9" : "stock_high_7";
  if (s.end > u.te) return s.exit ? "stock_high_2" : s.entry ? "stock_high_3" : "stock_high_1";
  return s.entry ? "stock_high_5" : s.exit ? "stock_high_6" : "stock_high_4";
}

const char *stock_low_case(const Timeline &tl, size_t k, const Unit &u) {
  const auto &s = tl.segments[k];
  const bool same_prev = !s.entry && tl.segments[k - 1].cell == s.cell;
  const bool same_next = !s.exit && tl.segments[k + 1].cell == s.cell;
  if (s.start >= u.ts) {  // stay on the right side of the unit
    if (same_prev) return s.exit ? "stock_low_5" : "stock_low_4";
    if (same_next) return s.entry ? "stock_low_7" : "stock_low_6";
    if (s.entry) return "stock_low_3";
    if (s.exit) return "stock_low_2";
    return "stock_low_1";
  }
  if (same_prev) return s.exit ? "stock_low_14" : "stock_low_13";
  if (same_next) return s.entry ? "stock_low_12" : "stock_low_11";
  if (s.entry) return "stock_low_9";
  if (s.exit) return "stock_low_10";
  return "stock_low_8";
}

}  // namespace

std::vector<RuleHit> stock(const Timeline &tl, HalfMonth t, const RuleParams &p, Confidence c) {
  Unit u(t);
  RuleHit best;
  int best_rank = -1;  // 1 = low-confidence stay, 2 = migration segment
  int32_t best_overlap = 0;
  for (size_t k = 0; k < tl.segments.size(); ++k) {
    const auto &s = tl.segments[k];
    if (!s.non_home()) continue;
    int rank = 0;
    int32_t ov = 0;
    const char *id = nullptr;
    if (s.min_duration >= p.tau_min_days) {
      ov = overlap_days(s.start, s.end, u.ts, u.te);
      if (ov < p.sigma_days) continue;
      rank = 2;
      id = stock_high_case(s, u);
    } else if (c == Confidence::low) {
      if (span_days(s.lo, s.hi) < p.tau_min_days) continue;
      ov = overlap_days(s.lo, s.hi, u.ts, u.te);
      if (ov < p.sigma_days) continue;
      rank = 1;
      id = stock_low_case(tl, k, u);
    } else {
      continue;
    }
    if (rank > best_rank || (rank == best_rank && ov > best_overlap)) {
      best = {s.cell, id};
      best_rank = rank;
      best_overlap = ov;
    }
  }
  if (best_rank < 0) return {};
  return {best};
}

namespace {

enum class Shape { left, right, full, inside };

Shape shape_of(const TimelineGap &g, const Unit &u) {
  if (g.start <= u.ts) return g.end >= u.te ? Shape::full : Shape::left;
  return g.end >= u.te ? Shape::right : Shape::inside;
}

}  // namespace

const char *departure_unobserved(const Timeline &tl, HalfMonth t, const RuleParams &p) {
  Unit u(t);
  const int32_t tau = p.tau_min_days;
  const int32_t eps = p.eps_gap_meso_days;
  for (const auto &g : tl.gaps) {
    // A gap ending the day before the unit still hides the start of what follows.
    if (g.end < u.ts - 1 || g.start > u.te) continue;
    const TimelineSegment *P = g.prev >= 0 ? &tl.segments[g.prev] : nullptr;
    const TimelineSegment *F = g.next >= 0 ? &tl.segments[g.next] : nullptr;
    const bool same = P && F && P->cell == F->cell;
    switch (shape_of(g, u)) {
      case Shape::left:
        if (span_days(u.ts, g.end) >= tau) return "obs_depart_1";
        if (!F->non_home()) break;
        if (!P) {
          if (span_days(u.ts, F->hi) >= tau) return "obs_depart_5";
        } else if (same) {
          // Tolerance counts from the gap start. Once the earliest start lies
          // inside the unit the start cannot belong elsewhere, so case 4 has
          // no tolerance clause.
          if (F->lo < u.ts) {
            if (span_days(u.ts, F->hi) >= tau && u.ts - g.start > p.eps_tol_days) return "obs_depart_3";
          } else if (span_days(F->lo, F->hi) >= tau) {
            return "obs_depart_4";
          }
        } else if (span_days(u.ts, F->hi) >= tau && u.ts - g.start > p.eps_tol_days) {
          return "obs_depart_2";
        }
        break;
      case Shape::right:
        if (!F) return "obs_depart_9";
        if (span_days(g.start, g.end) >= tau) return "obs_depart_6";
        if (!F->non_home()) break;
        if (same) {
          Day s = P->end + (eps + 2);
          if (s <= u.te && span_days(s, F->hi) >= tau) return "obs_depart_8";
        } else if (span_days(g.start, F->hi) >= tau) {
          return "obs_depart_7";
        }
        break;
      case Shape::full:
        if (!F) return "obs_depart_16";
        if (!P) {
          if (span_days(u.ts, g.end) >= tau) return "obs_depart_14";
          if (F->non_home() && span_days(u.ts, F->hi) >= tau) return "obs_depart_15";
          break;
        }
        if (span_days(u.ts, g.end) >= tau) return "obs_depart_10";
        if (!F->non_home()) break;
        if (same) {
          Day s = P->end + (eps + 2);
          if (s > u.te) break;
          if (s >= u.ts) {
            if (span_days(s, F->hi) >= tau) return "obs_depart_12";
          } else if (span_days(u.ts, F->hi) >= tau) {
            return "obs_depart_13";
          }
        } else if (span_days(u.ts, F->hi) >= tau) {
          return "obs_depart_11";
        }
        break;
      case Shape::inside:
        break;
    }
  }
  return nullptr;
}

const char *return_unobserved(const Timeline &tl, HalfMonth t, const RuleParams &p) {
  Unit u(t);
  const int32_t tau = p.tau_min_days;
  const int32_t eps = p.eps_gap_meso_days;
  for (const auto &g : tl.gaps) {
    // A gap starting the day after the unit still hides the end of what precedes.
    if (g.end < u.ts || g.start > u.te + 1) continue;
    const TimelineSegment *P = g.prev >= 0 ? &tl.segments[g.prev] : nullptr;
    const TimelineSegment *F = g.next >= 0 ? &tl.segments[g.next] : nullptr;
    const bool same = P && F && P->cell == F->cell;
    switch (shape_of(g, u)) {
      case Shape::left:
        if (!P) return "obs_return_4";
        if (span_days(g.start, g.end) >= tau) return "obs_return_1";
        if (!P->non_home()) break;
        if (same) {
          Day e = F->start - (eps + 2);
          if (e >= u.ts && span_days(P->lo, e) >= tau) return "obs_return_3";
        } else if (span_days(P->lo, g.end) >= tau) {
          return "obs_return_2";
        }
        break;
      case Shape::right:
        if (span_days(g.start, u.te) >= tau) return "obs_return_5";
        if (!P->non_home()) break;
        if (!F) {
          if (span_days(P->lo, u.te) >= tau) return "obs_return_9";
        } else if (same) {
          Day e = F->start - (eps + 2);
          if (e > u.te) {
            if (span_days(P->lo, u.te) >= tau && g.end - u.te > p.eps_tol_days) return "obs_return_7";
          } else if (span_days(P->lo, e) >= tau) {
            return "obs_return_8";
          }
        } else if (span_days(P->lo, u.te) >= tau && g.end - u.te > p.eps_tol_days) {
          return "obs_return_6";
        }
        break;
      case Shape::full:
        if (!P) return "obs_return_14";
        if (!F) {
          if (span_days(g.start, u.te) >= tau) return "obs_return_15";
          if (P->non_home() && span_days(P->lo, u.te) >= tau) return "obs_return_16";
          break;
        }
        if (span_days(g.start, u.te) >= tau) return "obs_return_10";
        if (!P->non_home()) break;
        if (same) {
          Day e = F->start - (eps + 2);
          if (e < u.ts) break;
          if (e <= u.te) {
            if (span_days(P->lo, e) >= tau) return "obs_return_12";
          } else if (span_days(P->lo, u.te) >= tau) {
            return "obs_return_13";
          }
        } else if (span_days(P->lo, u.te) >= tau) {
          return "obs_return_11";
        }
        break;
      case Shape::inside:
        break;
    }
  }
  return nullptr;
}

const char *stock_unobserved(const Timeline &tl, HalfMonth t, const RuleParams &p) {
  Unit u(t);
  const int32_t tau = p.tau_min_days;
  const int32_t sigma = p.sigma_days;
  auto ov = [&](const TimelineSegment *s) {
    return s ? overlap_days(s->start, s->end, u.ts, u.te) : 0;
  };
  for (const auto &g : tl.gaps) {
    if (g.end < u.ts || g.start > u.te) continue;
    const TimelineSegment *P = g.prev >= 0 ? &tl.segments[g.prev] : nullptr;
    const TimelineSegment *F = g.next >= 0 ? &tl.segments[g.next] : nullptr;
    switch (shape_of(g, u)) {
      case Shape::left:
        if (ov(F) >= sigma) break;
        if (!P) return "obs_stock_4";
        if (span_days(g.start, g.end) >= tau) return "obs_stock_1";
        if (F->non_home() && span_days(std::max(u.ts, F->lo), F->hi) >= tau) return "obs_stock_2";
        if (P->non_home() && span_days(P->lo, P->hi) >= tau) return "obs_stock_3";
        break;
      case Shape::right:
        if (ov(P) >= sigma) break;
        if (!F) return "obs_stock_8";
        if (span_days(g.start, g.end) >= tau) return "obs_stock_5";
        if (P->non_home() && span_days(P->lo, std::min(u.te, P->hi)) >= tau) return "obs_stock_6";
        if (F->non_home() && span_days(F->lo, F->hi) >= tau) return "obs_stock_7";
        break;
      case Shape::full:
        if (!F) return "obs_stock_12";
        if (!P) return "obs_stock_13";
        if (span_days(g.start, g.end) >= tau) return "obs_stock_9";
        if (P->non_home() && span_days(P->lo, std::min(u.te, P->hi)) >= tau) return "obs_stock_10";
        if (F->non_home() && span_days(std::max(u.ts, F->lo), F->hi) >= tau) return "obs_stock_11";
        break;
      case Shape::inside:
        if (ov(P) >= sigma || ov(F) >= sigma) break;
        if (F->non_home() && span_days(F->lo, F->hi) >= tau)
          return F->exit ? "obs_stock_16" : "obs_stock_14";
        if (P->non_home() && span_days(P->lo, P->hi) >= tau)
          return P->entry ? "obs_stock_17" : "obs_stock_15";
        break;
    }
  }
  return nullptr;
}

const std::vector<std::string_view> &diagram_ids() {
  static const std::vector<std::string_view> ids = [] {
    static std::vector<std::string> names;
    auto add = [](const char *prefix, int n) {
      for (int i = 1; i <= n; ++i) names.push_back(std::string(prefix) + std::to_string(i));
    };
    add("depart_high_", 2);
    add("depart_low_", 6);
    add("return_high_", 2);
    add("return_low_", 6);
    add("stock_high_", 9);
    add("stock_low_", 14);
    add("obs_depart_", 16);
    add("obs_return_", 16);
    add("obs_stock_", 17);
    return std::vector<std::string_view>(names.begin(), names.end());
  }();
  return ids;
}

}  // namespace cdrmig
