#ifndef GAPGAME_VALIDATION_HPP
#define GAPGAME_VALIDATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gapgame/blocktime.hpp"
#include "gapgame/difficulty.hpp"
#include "gapgame/equilibrium.hpp"
#include "gapgame/experiments.hpp"
#include "gapgame/model.hpp"
#include "gapgame/parallel.hpp"
#include "gapgame/simulator.hpp"
#include "gapgame/utility.hpp"

namespace gapgame {

struct CriterionOutcome {
  bool passed = false;
  std::string detail;
};

struct ValidationContext {
  unsigned threads = 1;
  std::uint64_t seed = 42;
};

struct Criterion {
  std::string name;
  std::string summary;
  std::function<CriterionOutcome(const ValidationContext&)> run;
};

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Random schedule with at most `max_starts` distinct start times, the
// earliest below T so a rate exists.
inline StartSchedule random_schedule(std::mt19937_64& rng, double T, int max_starts) {
  std::uniform_int_distribution<int> players(1, 4);
  std::uniform_int_distribution<int> rigs(1, 40);
  std::uniform_real_distribution<double> start(0.0, 2.0 * T);
  const int np = players(rng);
  const int distinct = std::uniform_int_distribution<int>(1, max_starts)(rng);
  std::vector<double> starts(distinct);
  for (auto& s : starts) s = start(rng);
  starts[0] = std::uniform_real_distribution<double>(0.0, 0.95 * T)(rng);
  std::uniform_int_distribution<int> pick(0, distinct - 1);
  StartSchedule sch;
  sch.players.resize(np);
  for (int k = 0; k < distinct; ++k) {
    std::size_t owner = std::uniform_int_distribution<std::size_t>(0, np - 1)(rng);
    sch.players[owner].groups.push_back({rigs(rng), starts[k]});
  }
  for (auto& p : sch.players)
    if (p.groups.empty()) p.groups.push_back({rigs(rng), starts[pick(rng)]});
  return sch;
}

inline double max_normalized_start(const StartSchedule& s, double T) {
  double hi = 0;
  for (const auto& p : s.players)
    for (const auto& g : p.groups) hi = std::max(hi, g.start / T);
  return hi;
}

}  // namespace detail

inline CriterionOutcome check_pdf_normalization(const ValidationContext& ctx) {
  std::mt19937_64 rng(ctx.seed);
  const double T = 10000;
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    StartSchedule s = detail::random_schedule(rng, T, 16);
    double n = s.total_rigs();
    double rate = std::exp(std::uniform_real_distribution<double>(std::log(1e-3), std::log(1e3))(rng)) /
                  (n * T);
    worst = std::max(worst, std::abs(BlockTimeDistribution(s, rate).total_mass() - 1.0));
  }
  return {worst <= 1e-10, "max |mass - 1| over 100 schedules = " + detail::fmt("%.3g", worst)};
}

inline CriterionOutcome check_difficulty_closed_forms(const ValidationContext& ctx) {
  const SystemParams params;
  const double T = params.block_interval;
  const double n = params.total_rigs;
  double zero = solve_rate(equal_players_schedule(4, 128, 0.0), params).rate;
  double half = solve_rate(equal_players_schedule(4, 128, 0.5 * T), params).rate;
  double e_zero = std::abs(zero * n * T - 1.0);
  double e_half = std::abs(half * n * T / 2.0 - 1.0);
  std::mt19937_64 rng(ctx.seed + 1);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    StartSchedule s = detail::random_schedule(rng, T, 16);
    double rate = solve_rate(s, params).rate;
    worst = std::max(worst, std::abs(expected_block_time(s, rate) - T) / T);
  }
  bool ok = e_zero <= 1e-9 && e_half <= 1e-9 && worst <= 1e-9;
  return {ok, "all-zero rel err " + detail::fmt("%.2g", e_zero) + ", all-half rel err " +
                  detail::fmt("%.2g", e_half) + ", max |E[X]-T|/T over 100 schedules " +
                  detail::fmt("%.2g", worst)};
}

inline CriterionOutcome check_share_law(const ValidationContext& ctx) {
  SystemParams params;  // no base reward, no expenses
  params.total_rigs = 100;
  double worst_analytic = 0;
  double worst_sigma = 0;
  for (int k = 1; k <= 9; ++k) {
    StartSchedule s = single_group_schedule({10 * k, 100 - 10 * k}, {0.0, 0.0});
    double rate = solve_rate(s, params).rate;
    double share = k / 10.0;
    double rel = expected_utility(s, params, rate, 0) / params.total_expected_reward();
    worst_analytic = std::max(worst_analytic, std::abs(rel - share));
    const std::uint64_t blocks = 100000;
    SimulationResult sim = simulate(s, params, rate, blocks, ctx.seed + k);
    double win = static_cast<double>(sim.players[0].blocks_won) / blocks;
    double sigma = std::sqrt(share * (1 - share) / blocks);
    worst_sigma = std::max(worst_sigma, std::abs(win - share) / sigma);
  }
  bool ok = worst_analytic <= 1e-9 && worst_sigma <= 3.0;
  return {ok, "max |relative utility - share| = " + detail::fmt("%.2g", worst_analytic) +
                  ", max win-rate deviation = " + detail::fmt("%.2f", worst_sigma) + " sigma"};
}

inline CriterionOutcome check_simulator_agreement(const ValidationContext& ctx) {
  struct Case {
    ExpenseKind kind;
    double r;
    int rigs;
  };
  std::vector<Case> cases;
  for (ExpenseKind k : {ExpenseKind::HighOpex, ExpenseKind::MidOC, ExpenseKind::LowOpex})
    for (double r : {0.1, 1.0, 10.0})
      for (int rigs = 16; rigs <= 112; rigs += 16) cases.push_back({k, r, rigs});
  std::vector<double> z(cases.size());
  parallel_for(cases.size(), ctx.threads, [&](std::size_t i) {
    const Case& c = cases[i];
    SystemParams params = standard_params(ExpenseSetting::preset(c.kind), c.r);
    StartSchedule s = split_gap_schedule(c.rigs, params.total_rigs, params.block_interval);
    double rate = solve_rate(s, params).rate;
    double analytic = expected_utility(s, params, rate, 0);
    SimulationResult sim = simulate_replications(s, params, rate, 10000, ctx.seed + 1000 * i, 10);
    z[i] = std::abs(sim.players[0].mean_profit - analytic) / sim.players[0].standard_error;
  });
  auto worst = std::max_element(z.begin(), z.end());
  int over = static_cast<int>(std::count_if(z.begin(), z.end(), [](double v) { return v > 3.0; }));
  const Case& w = cases[worst - z.begin()];
  return {over == 0, std::to_string(cases.size()) + " scenarios, " + std::to_string(over) +
                         " beyond 3 sigma; worst " + detail::fmt("%.2f", *worst) + " sigma (" +
                         std::string(ExpenseSetting::to_string(w.kind)) + ", r=" +
                         format_number(w.r) + ", player-1 rigs " + std::to_string(w.rigs) + ")"};
}

inline CriterionOutcome check_mixed_size_equilibria(const ValidationContext& ctx) {
  bool ok = true;
  std::ostringstream detail;
  double worst = 0;
  for (int row = 1; row <= 4; ++row) {
    const auto reference = mixed_size_reference_starts(row);
    for (std::uint64_t seed : {ctx.seed, ctx.seed + 1, ctx.seed + 2}) {
      Scenario sc = preset_scenario("mixed-size-" + std::to_string(row));
      EquilibriumOptions opt;
      opt.seed = seed;
      EquilibriumResult eq = find_equilibrium(sc.schedule, sc.params, opt);
      for (std::size_t i = 0; i < reference.size(); ++i) {
        double got = eq.schedule.players[i].groups[0].start / sc.params.block_interval;
        double err = std::abs(got - reference[i]);
        worst = std::max(worst, err);
        if (err > 0.02 || !eq.converged) ok = false;
      }
      if (seed == ctx.seed) {
        detail << " case " << row << ":";
        for (const auto& p : eq.schedule.players)
          detail << ' ' << detail::fmt("%.3f", p.groups[0].start / sc.params.block_interval);
        detail << " (ref";
        for (double v : reference) detail << ' ' << v;
        detail << ')';
      }
    }
  }
  return {ok, "max deviation " + detail::fmt("%.3f", worst) + " (tolerance 0.02);" + detail.str()};
}

inline CriterionOutcome check_lowopex_null(const ValidationContext& ctx) {
  SweepSpec spec;
  spec.settings = {ExpenseSetting::preset(ExpenseKind::LowOpex)};
  spec.seed = ctx.seed;
  spec.threads = ctx.threads;
  spec.coalitions = false;
  SweepOutput out = run_sweep(spec);
  double worst_start = 0, worst_gain = 0;
  bool converged = true;
  for (const auto& row : out.rows) {
    worst_start = std::max(worst_start, row.tau_eq + row.tau_spread);
    worst_gain = std::max(worst_gain, std::abs(row.util_gain));
    converged = converged && row.converged;
  }
  bool ok = converged && worst_start <= 1e-3 && worst_gain <= 1e-9;
  return {ok, std::to_string(out.rows.size()) + " grid points, max start " +
                  detail::fmt("%.3g", worst_start) + ", max |utility gain| " +
                  detail::fmt("%.3g", worst_gain) + (converged ? "" : ", some not converged")};
}

inline CriterionOutcome check_symmetry(const ValidationContext& ctx) {
  struct Job {
    int players;
    ExpenseKind kind;
    double r;
    int seed_index;
  };
  const std::vector<int> counts{2, 4, 8, 16, 32, 64, 128};
  const std::vector<std::pair<ExpenseKind, double>> settings{{ExpenseKind::MidOC, 1.0},
                                                             {ExpenseKind::HighOpex, 2.0}};
  std::vector<Job> jobs;
  for (int pc : counts)
    for (auto [k, r] : settings)
      for (int s = 0; s < 5; ++s) jobs.push_back({pc, k, r, s});
  std::vector<EqualPlayersPoint> res(jobs.size());
  parallel_for(jobs.size(), ctx.threads, [&](std::size_t i) {
    EquilibriumOptions opt;
    opt.seed = ctx.seed + 97 * jobs[i].seed_index;
    opt.randomize_initial = true;
    res[i] = solve_equal_players(jobs[i].players, ExpenseSetting::preset(jobs[i].kind), jobs[i].r,
                                 128, opt);
  });
  double across_players = 0, across_seeds = 0;
  bool converged = true;
  for (std::size_t i = 0; i < jobs.size(); i += 5) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t s = 0; s < 5; ++s) {
      const auto& r = res[i + s];
      converged = converged && r.equilibrium.converged;
      across_players = std::max(across_players, r.tau_max - r.tau_min);
      lo = std::min(lo, r.tau_min);
      hi = std::max(hi, r.tau_max);
    }
    across_seeds = std::max(across_seeds, hi - lo);
  }
  bool ok = converged && across_players <= 1e-3 && across_seeds <= 1e-3;
  return {ok, "max spread across players " + detail::fmt("%.3g", across_players) +
                  ", across 5 seeds " + detail::fmt("%.3g", across_seeds) + " (units of T)" +
                  (converged ? "" : ", some not converged")};
}

inline CriterionOutcome check_utilization_extreme(const ValidationContext& ctx) {
  EquilibriumOptions opt;
  opt.seed = ctx.seed;
  const ExpenseSetting high = ExpenseSetting::preset(ExpenseKind::HighOpex);
  EqualPlayersPoint pt = solve_equal_players(2, high, 0.1, 128, opt);
  SystemParams params = standard_params(high, 0.1);
  double u = mining_power_utilization(pt.equilibrium.schedule, params, pt.equilibrium.rate);
  return {pt.equilibrium.converged && u >= 0.05 && u <= 0.20,
          "utilization " + detail::fmt("%.4f", u) + " at start " + detail::fmt("%.4f", pt.tau_mean) +
              " (accepted range [0.05, 0.20])"};
}

inline CriterionOutcome check_min_brr(const ValidationContext& ctx) {
  (void)ctx;
  std::ostringstream d;
  bool ok = true;
  const std::vector<double> xs{0.01, 0.05, 0.1};

  double low_max = 0;
  for (int pc : {2, 4, 8, 16, 32, 64, 128})
    for (double x : xs)
      low_max = std::max(
          low_max, min_brr_for_bounded_gap(ExpenseSetting::preset(ExpenseKind::LowOpex), pc, x).r_min);
  if (low_max != 0) ok = false;
  d << "LowOpex max r_min " << low_max << ";";

  for (ExpenseKind k : {ExpenseKind::MidOC, ExpenseKind::HighOpex}) {
    const ExpenseSetting s = ExpenseSetting::preset(k);
    std::vector<double> by_x;
    for (double x : xs) by_x.push_back(min_brr_for_bounded_gap(s, 8, x).r_min);
    bool monotone = by_x[0] >= by_x[1] && by_x[1] >= by_x[2];
    double r64 = min_brr_for_bounded_gap(s, 64, 0.05).r_min;
    double r128 = min_brr_for_bounded_gap(s, 128, 0.05).r_min;
    double rel = std::abs(r64 - r128) / std::max(r64, r128);
    ok = ok && monotone && rel <= 0.2;
    d << ' ' << ExpenseSetting::to_string(k) << " 8 players r_min(x=0.01,0.05,0.1) = " << by_x[0]
      << ", " << by_x[1] << ", " << by_x[2] << (monotone ? "" : " NOT monotone")
      << "; r_min(64)=" << r64 << " r_min(128)=" << r128 << " rel diff " << detail::fmt("%.3f", rel)
      << ';';
  }
  return {ok, d.str()};
}

inline CriterionOutcome check_bitcoin_case(const ValidationContext& ctx) {
  (void)ctx;
  BitcoinReport rep = bitcoin_case_study(MiningHardware{}, 8, 12.5, 0.05);
  bool opex_ok = std::abs(rep.opex_per_year - 876.0) <= 0.5;
  bool class_ok = rep.setting == ExpenseKind::MidOC;
  bool threshold_ok = std::abs(rep.threshold_r - 1.0) <= 0.5;
  bool verdict_ok = !rep.gaps_profitable;
  std::ostringstream d;
  d << "opex " << detail::fmt("%.1f", rep.opex_per_year) << " $/yr (expected 876)"
    << (opex_ok ? "" : " MISMATCH") << ", class " << ExpenseSetting::to_string(rep.setting)
    << (class_ok ? "" : " MISMATCH") << ", threshold r " << rep.threshold_r
    << (threshold_ok ? "" : " MISMATCH") << ", at r=12.5 gaps "
    << (rep.gaps_profitable ? "profitable" : "not profitable") << (verdict_ok ? "" : " MISMATCH");
  return {opex_ok && class_ok && threshold_ok && verdict_ok, d.str()};
}

inline CriterionOutcome check_no_gap_threshold(const ValidationContext& ctx) {
  SweepSpec spec;
  spec.r_values = {6.0};
  spec.seed = ctx.seed;
  spec.threads = ctx.threads;
  spec.coalitions = false;
  SweepOutput out = run_sweep(spec);
  double worst = 0;
  bool converged = true;
  for (const auto& row : out.rows) {
    worst = std::max(worst, row.tau_eq + row.tau_spread);
    converged = converged && row.converged;
  }
  return {converged && worst <= 0.01, std::to_string(out.rows.size()) +
                                          " (setting, players) points at r=6, max start " +
                                          detail::fmt("%.3g", worst) + " (bound 0.01)"};
}

inline const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> all{
      {"pdf-normalization", "block-time density integrates to 1 on random schedules",
       check_pdf_normalization},
      {"difficulty-closed-forms", "rate solver matches closed forms and hits the target interval",
       check_difficulty_closed_forms},
      {"share-law", "no gaps, no expenses: relative utility and win rate equal power share",
       check_share_law},
      {"simulator-agreement", "analytic utility within 3 sigma of simulation on split-gap schedules",
       check_simulator_agreement},
      {"mixed-size-equilibria", "mixed-size equilibria within 0.02 of the reference starts",
       check_mixed_size_equilibria},
      {"lowopex-null", "LowOpex equal-size equilibria start at zero with zero gain",
       check_lowopex_null},
      {"symmetry-seed-independence", "equal-size equilibria symmetric and seed independent",
       check_symmetry},
      {"utilization-extreme", "2 players, HighOpex, r=0.1: utilization in [0.05, 0.20]",
       check_utilization_extreme},
      {"min-brr-properties", "minimal base-reward ratio: zero for LowOpex, monotone, converging",
       check_min_brr},
      {"bitcoin-case", "default hardware: opex 876, MidOC, threshold near 1, gaps not profitable",
       check_bitcoin_case},
      {"no-gap-threshold", "r=6 removes gaps for every setting and player count",
       check_no_gap_threshold},
  };
  return all;
}

}  // namespace gapgame

#endif  // GAPGAME_VALIDATION_HPP
