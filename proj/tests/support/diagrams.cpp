#include "diagrams.hpp"

#include "cdrmig/segmentation.hpp"
#include "oracle.hpp"

namespace diagrams {

namespace {

constexpr int32_t B = -181, E = 183;
constexpr auto hi = Confidence::high, lo = Confidence::low;
constexpr auto D = Measure::depart, R = Measure::ret, S = Measure::stock;
constexpr auto EV = Status::event, UN = Status::unobserved;

MeasureOutcome outcome_at(const UserHistory &h, HalfMonth t, Measure m, Confidence c, int32_t tau) {
  AggregationParams ap;
  ap.tau_min_days = tau;
  ap.confidence = c;
  for (const auto &p : compute_outcomes(h, t, t, ap).periods)
    if (p.t == t) return p[m];
  return {};
}

}  // namespace

DailySeries days_of(const std::vector<Piece> &pieces) {
  DailySeries out;
  for (const auto &p : pieces)
    for (int32_t k = p.from; k <= p.to; ++k) out.push_back({kT0 + k, p.cell});
  return out;
}

const std::vector<Fixture> &fixtures() {
  static const std::vector<Fixture> all = {
      {"depart_high_1", D, hi, EV, {{H, B, 2}, {A, 3, 32}, {H, 33, E}}},
      {"depart_high_2", D, hi, EV, {{H, B, 2}, {A, 3, 40}}},
      {"depart_low_1", D, lo, EV, {{H, B, -5}, {A, 2, 11}, {H, 21, E}}},
      {"depart_low_2", D, lo, EV, {{H, B, -5}, {A, 5, 21}}},
      {"depart_low_3", D, lo, EV, {{H, B, -26}, {A, -25, -10}, {A, 3, 12}, {H, 23, E}}},
      {"depart_low_4", D, lo, EV, {{H, B, -26}, {A, -25, -10}, {A, 3, 21}}},
      {"depart_low_5", D, lo, EV, {{H, B, -16}, {A, -15, -5}, {A, 12, 20}, {H, 35, E}}},
      {"depart_low_6", D, lo, EV, {{H, B, -16}, {A, -15, -5}, {A, 12, 30}}},

      {"return_high_1", R, hi, EV, {{H, B, -21}, {A, -20, 5}, {H, 6, E}}},
      {"return_high_2", R, hi, EV, {{A, -25, 5}, {H, 6, E}}},
      {"return_low_1", R, lo, EV, {{H, B, -8}, {A, 3, 12}, {H, 19, E}}},
      {"return_low_2", R, lo, EV, {{A, -10, 8}, {H, 19, E}}},
      {"return_low_3", R, lo, EV, {{H, B, -10}, {A, 3, 12}, {A, 26, 40}, {H, 41, E}}},
      {"return_low_4", R, lo, EV, {{A, -8, 8}, {A, 26, 40}, {H, 41, E}}},
      {"return_low_5", R, lo, EV, {{H, B, -15}, {A, 2, 8}, {A, 20, 35}, {H, 36, E}}},
      {"return_low_6", R, lo, EV, {{A, -10, 8}, {A, 20, 35}, {H, 36, E}}},

      {"stock_high_1", S, hi, EV, {{H, B, 4}, {A, 5, 40}, {H, 41, E}}},
      {"stock_high_2", S, hi, EV, {{H, B, 4}, {A, 5, 60}}},
      {"stock_high_3", S, hi, EV, {{A, 5, 40}, {H, 41, E}}},
      {"stock_high_4", S, hi, EV, {{H, B, -31}, {A, -30, 10}, {H, 11, E}}},
      {"stock_high_5", S, hi, EV, {{A, -30, 10}, {H, 11, E}}},
      {"stock_high_6", S, hi, EV, {{H, B, -31}, {A, -30, 10}}},
      {"stock_high_7", S, hi, EV, {{H, B, -11}, {A, -10, 30}, {H, 31, E}}},
      {"stock_high_8", S, hi, EV, {{H, B, -11}, {A, -10, 40}}},
      {"stock_high_9", S, hi, EV, {{A, -30, 20}, {H, 21, E}}},

      {"stock_low_1", S, lo, EV, {{H, B, -3}, {A, 3, 12}, {H, 25, E}}},
      {"stock_low_2", S, lo, EV, {{H, B, -15}, {A, 3, 12}}},
      {"stock_low_3", S, lo, EV, {{A, 3, 12}, {H, 30, E}}},
      {"stock_low_4", S, lo, EV, {{H, B, -31}, {A, -30, -20}, {A, 3, 12}, {H, 25, E}}},
      {"stock_low_5", S, lo, EV, {{H, B, -31}, {A, -30, -20}, {A, 3, 12}}},
      {"stock_low_6", S, lo, EV, {{H, B, -3}, {A, 3, 12}, {A, 30, 40}, {H, 41, E}}},
      {"stock_low_7", S, lo, EV, {{A, 3, 12}, {A, 35, 45}, {H, 46, E}}},
      {"stock_low_8", S, lo, EV, {{H, B, -12}, {A, -5, 3}, {H, 15, E}}},
      {"stock_low_9", S, lo, EV, {{A, -5, 3}, {H, 21, E}}},
      {"stock_low_10", S, lo, EV, {{H, B, -20}, {A, -5, 9}}},
      {"stock_low_11", S, lo, EV, {{H, B, -20}, {A, -5, 3}, {A, 20, 30}, {H, 31, E}}},
      {"stock_low_12", S, lo, EV, {{A, -5, 3}, {A, 27, 37}, {H, 38, E}}},
      {"stock_low_13", S, lo, EV, {{H, B, -41}, {A, -40, -30}, {A, -5, 5}, {H, 20, E}}},
      {"stock_low_14", S, lo, EV, {{H, B, -41}, {A, -40, -30}, {A, -5, 9}}},

      {"obs_depart_1", D, hi, UN, {{H, B, -5}, {H, 11, E}}, 10},
      {"obs_depart_2", D, hi, UN, {{H, B, -10}, {A, 3, 8}, {H, 25, E}}},
      {"obs_depart_3", D, hi, UN, {{H, B, -31}, {A, -30, -16}, {A, 3, 8}, {H, 25, E}}},
      {"obs_depart_4", D, hi, UN, {{H, B, -30}, {A, -15, -3}, {A, 10, 14}, {H, 35, E}}},
      {"obs_depart_5", D, hi, UN, {{A, 3, 8}, {H, 25, E}}},
      {"obs_depart_6", D, hi, UN, {{H, B, 5}, {H, 31, E}}},
      {"obs_depart_7", D, hi, UN, {{H, B, 5}, {A, 16, 22}, {H, 30, E}}},
      {"obs_depart_8", D, hi, UN, {{H, B, -11}, {A, -10, 0}, {A, 16, 22}, {H, 35, E}}},
      {"obs_depart_9", D, hi, UN, {{H, B, 5}}},
      {"obs_depart_10", D, hi, UN, {{H, B, -3}, {H, 26, E}}},
      {"obs_depart_11", D, hi, UN, {{H, B, -3}, {A, 17, 22}, {H, 30, E}}},
      {"obs_depart_12", D, hi, UN, {{H, B, -16}, {A, -15, -5}, {A, 16, 20}, {H, 35, E}}},
      {"obs_depart_13", D, hi, UN, {{H, B, -26}, {A, -25, -15}, {A, 17, 22}, {H, 30, E}}},
      {"obs_depart_14", D, hi, UN, {{H, 25, E}}},
      {"obs_depart_15", D, hi, UN, {{A, 16, 20}, {H, 30, E}}},
      {"obs_depart_16", D, hi, UN, {{H, B, -3}}},

      {"obs_return_1", R, hi, UN, {{H, B, -20}, {H, 6, E}}},
      {"obs_return_2", R, hi, UN, {{H, B, -20}, {A, -12, -5}, {H, 9, E}}},
      {"obs_return_3", R, hi, UN, {{H, B, -25}, {A, -10, -2}, {A, 11, 13}, {H, 14, E}}},
      {"obs_return_4", R, hi, UN, {{H, 5, E}}},
      {"obs_return_5", R, hi, UN, {{H, B, 2}, {H, 21, E}}, 10},
      {"obs_return_6", R, hi, UN, {{H, B, -20}, {A, -2, 8}, {H, 26, E}}},
      {"obs_return_7", R, hi, UN, {{H, B, -20}, {A, -2, 8}, {A, 26, 30}, {H, 31, E}}},
      {"obs_return_8", R, hi, UN, {{H, B, -20}, {A, -2, 3}, {A, 20, 25}, {H, 26, E}}},
      {"obs_return_9", R, hi, UN, {{H, B, -20}, {A, -2, 5}}},
      {"obs_return_10", R, hi, UN, {{H, B, -10}, {H, 21, E}}},
      {"obs_return_11", R, hi, UN, {{H, B, -25}, {A, -15, -5}, {H, 21, E}}},
      {"obs_return_12", R, hi, UN, {{H, B, -30}, {A, -12, -3}, {A, 17, 22}, {H, 23, E}}},
      {"obs_return_13", R, hi, UN, {{H, B, -30}, {A, -12, -3}, {A, 26, 30}, {H, 31, E}}},
      {"obs_return_14", R, hi, UN, {{H, 20, E}}},
      {"obs_return_15", R, hi, UN, {{H, B, -10}}},
      {"obs_return_16", R, hi, UN, {{H, B, -20}, {A, -12, -3}}},

      {"obs_stock_1", S, hi, UN, {{H, B, -20}, {H, 9, E}}},
      {"obs_stock_2", S, hi, UN, {{H, B, -5}, {A, 9, 12}, {H, 30, E}}},
      {"obs_stock_3", S, hi, UN, {{H, B, -30}, {A, -15, -5}, {H, 8, E}}},
      {"obs_stock_4", S, hi, UN, {{H, 8, E}}},
      {"obs_stock_5", S, hi, UN, {{H, B, 5}, {H, 31, E}}},
      {"obs_stock_6", S, hi, UN, {{H, B, -20}, {A, 0, 5}, {H, 21, E}}},
      {"obs_stock_7", S, hi, UN, {{H, B, 5}, {A, 21, 25}, {H, 40, E}}},
      {"obs_stock_8", S, hi, UN, {{H, B, 5}}},
      {"obs_stock_9", S, hi, UN, {{H, B, -3}, {H, 21, E}}},
      {"obs_stock_10", S, hi, UN, {{H, B, -25}, {A, -10, -3}, {H, 17, E}}},
      {"obs_stock_11", S, hi, UN, {{H, B, -3}, {A, 17, 20}, {H, 35, E}}},
      {"obs_stock_12", S, hi, UN, {{H, B, -3}}},
      {"obs_stock_13", S, hi, UN, {{H, 20, E}}},
      {"obs_stock_14", S, hi, UN, {{H, B, 3}, {A, 9, 14}, {H, 30, E}}},
      {"obs_stock_15", S, hi, UN, {{H, B, -25}, {A, -10, 3}, {H, 9, E}}},
      {"obs_stock_16", S, hi, UN, {{H, B, 3}, {A, 9, 30}}},
      {"obs_stock_17", S, hi, UN, {{A, -20, 3}, {H, 9, E}}},
  };
  return all;
}

std::vector<std::string> check(const Fixture &f) {
  std::vector<std::string> bad;
  const HalfMonth t = half_month_of(kT0);
  auto days = days_of(f.pieces);
  DetectionParams dp;
  dp.tau_min_days = f.tau;
  auto h = detect_user("u", days, dp);
  if (macro_cell_for(h.macros, t.start(), t.end()) != H) return {"home is not H"};

  auto got = outcome_at(h, t, f.measure, f.mode, f.tau);
  if (got.case_id == nullptr || std::string(got.case_id) != f.id)
    bad.push_back("case " + std::string(got.case_id ? got.case_id : "none"));
  if (got.status != f.status) bad.push_back("status differs");

  oracle::EnumParams ep;
  ep.tau = f.tau;
  auto v = oracle::enumerate(days, H, t, f.measure, ep);
  auto high = outcome_at(h, t, f.measure, Confidence::high, f.tau);
  auto low = outcome_at(h, t, f.measure, Confidence::low, f.tau);
  if ((high.status == Status::event) != v.certain) bad.push_back("high event vs certain");
  if ((low.status != Status::no_event) != v.possible) bad.push_back("low status vs possible");
  if (high.status != Status::no_event && !v.possible) bad.push_back("high status without a possible event");
  return bad;
}

}  // namespace diagrams
