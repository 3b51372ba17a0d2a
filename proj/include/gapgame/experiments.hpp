#ifndef GAPGAME_EXPERIMENTS_HPP
#define GAPGAME_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gapgame/blocktime.hpp"
#include "gapgame/difficulty.hpp"
#include "gapgame/equilibrium.hpp"
#include "gapgame/model.hpp"
#include "gapgame/parallel.hpp"
#include "gapgame/utility.hpp"

namespace gapgame {

/// Expected active rig-time until the block over total owned rig-time:
/// E[exposure(X)] / (n E[X]).
inline double mining_power_utilization(const StartSchedule& schedule, const SystemParams& params,
                                       double rate) {
  (void)params;
  BlockTimeDistribution dist(schedule, rate);
  const ActiveProfile& prof = dist.profile();
  double active = 0;
  for (std::size_t k = 0; k < prof.intervals(); ++k)
    active += dist.linear_expectation_on(k, -prof.active_start_sum(k), prof.active_count(k));
  return active / (prof.total_rigs() * dist.mean());
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Equal-size sweeps

struct SweepSpec {
  std::vector<int> player_counts{2, 4, 8, 16, 32, 64, 128};
  std::vector<ExpenseSetting> settings{ExpenseSetting::preset(ExpenseKind::LowOpex),
                                       ExpenseSetting::preset(ExpenseKind::MidOC),
                                       ExpenseSetting::preset(ExpenseKind::HighOpex)};
  std::vector<double> r_values{0.1, 0.5, 1, 2, 4, 6, 8, 12.5};
  std::uint64_t seed = 42;
  int total_rigs = 128;
  EquilibriumOptions equilibrium;
  unsigned threads = 1;
  bool coalitions = true;  // also compare two merged players against two separate ones
};

struct SweepRow {
  int players = 0;
  ExpenseKind setting = ExpenseKind::MidOC;
  double r = 0;
  double tau_eq = 0;      // mean normalized equilibrium start
  double tau_spread = 0;  // max - min normalized start across players
  double util_norm_eq = 0;
  double util_norm_zero = 0;
  double util_gain = 0;
  double utilization = 0;
  bool converged = false;
  double epsilon = 0;
};

struct CoalitionRow {
  int players = 0;  // before merging
  ExpenseKind setting = ExpenseKind::MidOC;
  double r = 0;
  double util_norm_separate = 0;  // per-rig normalized utility of an unmerged player
  double util_norm_merged = 0;    // per-rig normalized utility of the merged pair
  double tau_merged = 0;
  bool converged = false;
};

struct SweepOutput {
  std::vector<SweepRow> rows;
  std::vector<CoalitionRow> coalitions;
};

struct EqualPlayersPoint {
  EquilibriumResult equilibrium;
  double tau_mean = 0;
  double tau_min = 0;
  double tau_max = 0;
};

inline EqualPlayersPoint solve_equal_players(int players, ExpenseSetting setting, double r,
                                             int total_rigs, const EquilibriumOptions& opt) {
  SystemParams params = standard_params(setting, r, total_rigs);
  StartSchedule initial = equal_players_schedule(players, total_rigs, 0.0);
  EqualPlayersPoint pt;
  pt.equilibrium = find_equilibrium(initial, params, opt);
  const double T = params.block_interval;
  double lo = INFINITY, hi = -INFINITY, sum = 0;
  int groups = 0;
  for (const auto& p : pt.equilibrium.schedule.players)
    for (const auto& g : p.groups) {
      lo = std::min(lo, g.start / T);
      hi = std::max(hi, g.start / T);
      sum += g.start / T;
      ++groups;
    }
  pt.tau_mean = sum / groups;
  pt.tau_min = lo;
  pt.tau_max = hi;
  return pt;
}

inline SweepOutput run_sweep(const SweepSpec& spec) {
  struct Point {
    int players;
    ExpenseSetting setting;
    double r;
  };
  std::vector<Point> points;
  for (int pc : spec.player_counts) {
    if (pc < 1 || spec.total_rigs % pc != 0)
      throw InvalidParams("player count " + std::to_string(pc) + " does not divide total rigs");
    for (const auto& s : spec.settings)
      for (double r : spec.r_values) points.push_back({pc, s, r});
  }

  SweepOutput out;
  out.rows.resize(points.size());
  std::vector<CoalitionRow> coalition(points.size());
  std::vector<char> has_coalition(points.size(), 0);

  parallel_for(points.size(), spec.threads, [&](std::size_t idx) {
    const Point& pt = points[idx];
    EquilibriumOptions opt = spec.equilibrium;
    opt.seed = spec.seed + idx;
    opt.randomize_initial = true;
    EqualPlayersPoint eq = solve_equal_players(pt.players, pt.setting, pt.r, spec.total_rigs, opt);
    const SystemParams params = standard_params(pt.setting, pt.r, spec.total_rigs);

    StartSchedule zero = equal_players_schedule(pt.players, spec.total_rigs, 0.0);
    UtilityReport zero_report = utility_report(zero, params, solve_rate(zero, params).rate);

    SweepRow row;
    row.players = pt.players;
    row.setting = pt.setting.kind;
    row.r = pt.r;
    row.tau_eq = eq.tau_mean;
    row.tau_spread = eq.tau_max - eq.tau_min;
    double eq_sum = 0, zero_sum = 0;
    for (const auto& u : eq.equilibrium.report.players) eq_sum += u.normalized_utility;
    for (const auto& u : zero_report.players) zero_sum += u.normalized_utility;
    row.util_norm_eq = eq_sum / pt.players;
    row.util_norm_zero = zero_sum / pt.players;
    row.util_gain = row.util_norm_eq - row.util_norm_zero;
    row.utilization = mining_power_utilization(eq.equilibrium.schedule, params, eq.equilibrium.rate);
    row.converged = eq.equilibrium.converged;
    row.epsilon = eq.equilibrium.epsilon;
    out.rows[idx] = row;

    if (spec.coalitions && pt.players >= 3) {
      const int m = spec.total_rigs / pt.players;
      std::vector<int> rigs{2 * m};
      for (int i = 2; i < pt.players; ++i) rigs.push_back(m);
      StartSchedule merged = single_group_schedule(rigs, std::vector<double>(rigs.size(), 0.0));
      EquilibriumResult mr = find_equilibrium(merged, params, opt);
      CoalitionRow c;
      c.players = pt.players;
      c.setting = pt.setting.kind;
      c.r = pt.r;
      c.util_norm_separate = row.util_norm_eq;
      c.util_norm_merged = mr.report.players[0].normalized_utility;
      c.tau_merged = mr.schedule.players[0].groups[0].start / params.block_interval;
      c.converged = mr.converged;
      coalition[idx] = c;
      has_coalition[idx] = 1;
    }
  });

  auto key = [](int players, ExpenseKind s, double r) {
    return std::make_tuple(players, static_cast<int>(s), r);
  };
  std::sort(out.rows.begin(), out.rows.end(), [&](const SweepRow& a, const SweepRow& b) {
    return key(a.players, a.setting, a.r) < key(b.players, b.setting, b.r);
  });
  for (std::size_t i = 0; i < coalition.size(); ++i)
    if (has_coalition[i]) out.coalitions.push_back(coalition[i]);
  std::sort(out.coalitions.begin(), out.coalitions.end(),
            [&](const CoalitionRow& a, const CoalitionRow& b) {
              return key(a.players, a.setting, a.r) < key(b.players, b.setting, b.r);
            });
  return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "players,setting,r,tau_eq,util_norm_eq,util_norm_zero,util_gain,utilization,converged,"
        "epsilon\n";
  for (const auto& r : rows) {
    os << r.players << ',' << ExpenseSetting::to_string(r.setting) << ',' << format_number(r.r)
       << ',' << format_number(r.tau_eq) << ',' << format_number(r.util_norm_eq) << ','
       << format_number(r.util_norm_zero) << ',' << format_number(r.util_gain) << ','
       << format_number(r.utilization) << ',' << (r.converged ? "true" : "false") << ','
       << format_number(r.epsilon) << '\n';
  }
}

inline void write_coalition_csv(std::ostream& os, const std::vector<CoalitionRow>& rows) {
  os << "players,setting,r,util_norm_separate,util_norm_merged,tau_merged,converged\n";
  for (const auto& r : rows) {
    os << r.players << ',' << ExpenseSetting::to_string(r.setting) << ',' << format_number(r.r)
       << ',' << format_number(r.util_norm_separate) << ',' << format_number(r.util_norm_merged)
       << ',' << format_number(r.tau_merged) << ',' << (r.converged ? "true" : "false") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Minimal base-reward ratio bounding the gap

struct MinBrrOptions {
  double r_low = 0.0;
  double r_high = 20.0;
  double resolution = 1e-2;
  int total_rigs = 128;
  EquilibriumOptions equilibrium;
};

struct MinBrrResult {
  double r_min = 0;
  int equilibria_solved = 0;
};

/// Smallest r (to `resolution`) whose equal-size equilibrium keeps every
/// normalized start at or below x. Assumes the bound is monotone in r.
inline MinBrrResult min_brr_for_bounded_gap(ExpenseSetting setting, int players, double x,
                                            const MinBrrOptions& opt = {}) {
  MinBrrResult res;
  auto bounded = [&](double r) {
    ++res.equilibria_solved;
    return solve_equal_players(players, setting, r, opt.total_rigs, opt.equilibrium).tau_max <= x;
  };
  double lo = opt.r_low;
  double hi = opt.r_high;
  if (bounded(lo)) {
    res.r_min = lo;
    return res;
  }
  while (!bounded(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > 1e6) throw NoConvergence("no base-reward ratio bounds the gap", lo, hi);
  }
  while (hi - lo > opt.resolution) {
    double mid = 0.5 * (lo + hi);
    if (bounded(mid))
      hi = mid;
    else
      lo = mid;
  }
  res.r_min = hi;
  return res;
}

// ---------------------------------------------------------------------------
// Bitcoin case study

struct MiningHardware {
  double rig_price = 1000.0;        // $
  double lifetime_years = 1.0;
  double power_kw = 1.3;
  double electricity_per_kwh = 0.1;  // $
};

struct BitcoinReport {
  double capex_per_year = 0;
  double opex_per_year = 0;
  double opex_fraction = 0;  // opex / (opex + capex)
  ExpenseKind setting = ExpenseKind::MidOC;
  int miners = 0;
  double gap_bound = 0;
  double threshold_r = 0;
  double current_r = 0;
  bool gaps_profitable = false;
};

inline constexpr double kHoursPerYear = 24.0 * 365.0;

/// Nearest expense preset by opex share of total expenses.
inline ExpenseKind classify_expenses(double opex, double capex) {
  const double share = opex / (opex + capex);
  ExpenseKind best = ExpenseKind::MidOC;
  double best_dist = INFINITY;
  for (ExpenseKind k : {ExpenseKind::HighOpex, ExpenseKind::MidOC, ExpenseKind::LowOpex}) {
    ExpenseSetting s = ExpenseSetting::preset(k);
    double d = std::abs(share - s.opex_rate / (s.opex_rate + s.capex_rate));
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  return best;
}

inline BitcoinReport bitcoin_case_study(const MiningHardware& hw, int miners, double current_r,
                                        double gap_bound = 0.05, const MinBrrOptions& opt = {}) {
  if (!(hw.rig_price > 0 && hw.lifetime_years > 0 && hw.power_kw > 0 &&
        hw.electricity_per_kwh > 0 && miners > 0))
    throw InvalidParams("hardware inputs and miner count must be positive");
  BitcoinReport rep;
  rep.capex_per_year = hw.rig_price / hw.lifetime_years;
  rep.opex_per_year = hw.power_kw * kHoursPerYear * hw.electricity_per_kwh;
  rep.opex_fraction = rep.opex_per_year / (rep.opex_per_year + rep.capex_per_year);
  rep.setting = classify_expenses(rep.opex_per_year, rep.capex_per_year);
  rep.miners = miners;
  rep.gap_bound = gap_bound;
  rep.threshold_r =
      min_brr_for_bounded_gap(ExpenseSetting::preset(rep.setting), miners, gap_bound, opt).r_min;
  rep.current_r = current_r;
  rep.gaps_profitable = current_r < rep.threshold_r;
  return rep;
}

// ---------------------------------------------------------------------------
// Fee accumulation regression

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;  // 0 by convention when y is constant
  std::size_t samples = 0;
};

/// Ordinary least squares of y on x. Throws on fewer than two distinct x.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InvalidParams("need at least two points to fit a line");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0)) throw InvalidParams("degenerate fee data: all times in a window are equal");
  LinearFit f;
  f.samples = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  return f;
}

struct FeeFitResult {
  std::vector<LinearFit> windows;
  double mean_slope = 0;
  double mean_intercept = 0;
  double mean_r_squared = 0;
};

/// Reads `timestamp_seconds,fees_total` rows. A drop in fees_total starts a
/// new block window; time is measured from each window's first sample.
inline FeeFitResult fit_fee_accumulation(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidParams("fee CSV is empty");
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
  };
  {
    std::string h = trim(line);
    if (h != "timestamp_seconds,fees_total")
      throw InvalidParams("fee CSV header must be 'timestamp_seconds,fees_total'");
  }
  std::vector<std::vector<std::pair<double, double>>> windows(1);
  double prev_fee = -INFINITY;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InvalidParams("fee CSV line " + std::to_string(line_no) + " has no comma");
    double t = 0, fee = 0;
    try {
      std::size_t used = 0;
      t = std::stod(line.substr(0, comma), &used);
      fee = std::stod(line.substr(comma + 1), &used);
    } catch (const std::exception&) {
      throw InvalidParams("fee CSV line " + std::to_string(line_no) + " is not numeric");
    }
    if (fee < prev_fee && !windows.back().empty()) windows.emplace_back();
    windows.back().emplace_back(t, fee);
    prev_fee = fee;
  }
  FeeFitResult out;
  for (const auto& w : windows) {
    if (w.empty()) continue;
    std::vector<double> xs, ys;
    for (const auto& [t, fee] : w) {
      xs.push_back(t - w.front().first);
      ys.push_back(fee);
    }
    out.windows.push_back(fit_line(xs, ys));
  }
  if (out.windows.empty()) throw InvalidParams("fee CSV has no data rows");
  for (const auto& f : out.windows) {
    out.mean_slope += f.slope;
    out.mean_intercept += f.intercept;
    out.mean_r_squared += f.r_squared;
  }
  const double n = static_cast<double>(out.windows.size());
  out.mean_slope /= n;
  out.mean_intercept /= n;
  out.mean_r_squared /= n;
  return out;
}

// ---------------------------------------------------------------------------
// Utility as a function of one group's start (case-study curves)

struct CurvePoint {
  double start = 0;
  double utility = 0;
  double normalized_utility = 0;
};

inline std::vector<CurvePoint> utility_curve(const StartSchedule& schedule,
                                             const SystemParams& params, std::size_t player,
                                             std::size_t group, double max_start,
                                             std::size_t points,
                                             LambdaMode mode = LambdaMode::Resolve) {
  std::vector<CurvePoint> out;
  const double rate = solve_rate(schedule, params).rate;
  const double norm = params.total_expected_reward() * schedule.players.at(player).rig_count();
  for (std::size_t i = 0; i < points; ++i) {
    double s = points < 2 ? 0.0 : max_start * static_cast<double>(i) / (points - 1);
    double u = deviation_utility(schedule, params, rate, player, group, s, mode);
    out.push_back({s, u, u / norm});
  }
  return out;
}

}  // namespace gapgame

#endif  // GAPGAME_EXPERIMENTS_HPP
