#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "gapgame/experiments.hpp"
#include "gapgame/simulator.hpp"

using namespace gapgame;

TEST(Utilization, AllZeroIsFullyUtilized) {
  Scenario sc = preset_scenario("all-zero");
  double rate = solve_rate(sc.schedule, sc.params).rate;
  EXPECT_NEAR(mining_power_utilization(sc.schedule, sc.params, rate), 1.0, 1e-14);
}

TEST(Utilization, SingleGroupClosedForm) {
  StartSchedule s = single_group_schedule({1}, {700.0});
  const double rate = 1.0 / 300.0;
  EXPECT_NEAR(mining_power_utilization(s, SystemParams{}, rate), 300.0 / 1000.0, 1e-12);
}

TEST(Utilization, MatchesMonteCarlo) {
  StartSchedule s = single_group_schedule({10, 30, 20}, {0.0, 2000.0, 5000.0});
  SystemParams p;
  p.total_rigs = 60;
  double rate = solve_rate(s, p).rate;
  BlockSampler sampler(s, rate);
  std::mt19937_64 rng(17);
  RunningStats active, time;
  for (int i = 0; i < 200000; ++i) {
    double x = sampler(rng).time;
    double a = 0;
    for (const auto& pl : s.players)
      for (const auto& g : pl.groups) a += g.rigs * std::max(0.0, x - g.start);
    active.add(a);
    time.add(x);
  }
  double mc = active.mean() / (60 * time.mean());
  EXPECT_NEAR(mining_power_utilization(s, p, rate), mc, 0.01);
}

TEST(Utilization, StrictlyBelowOneWithGaps) {
  Scenario sc = preset_scenario("a-scatter");
  double u = mining_power_utilization(sc.schedule, sc.params, solve_rate(sc.schedule, sc.params).rate);
  EXPECT_GT(u, 0.0);
  EXPECT_LT(u, 1.0);
}

TEST(Sweep, SmallGridRowsAndCsv) {
  SweepSpec spec;
  spec.player_counts = {2, 4};
  spec.settings = {ExpenseSetting::preset(ExpenseKind::LowOpex),
                   ExpenseSetting::preset(ExpenseKind::HighOpex)};
  spec.r_values = {0.5, 6.0};
  spec.threads = 2;
  SweepOutput out = run_sweep(spec);
  ASSERT_EQ(out.rows.size(), 8u);
  for (const auto& row : out.rows) {
    EXPECT_TRUE(row.converged);
    EXPECT_GE(row.util_gain, -1e-12);
    EXPECT_GT(row.utilization, 0.0);
    EXPECT_LE(row.utilization, 1.0 + 1e-12);
    if (row.setting == ExpenseKind::LowOpex || row.r == 6.0) {
      EXPECT_LE(row.tau_eq, 1e-3);
      EXPECT_NEAR(row.utilization, 1.0, 1e-9);
    } else {
      EXPECT_GT(row.tau_eq, 0.1);
      EXPECT_GT(row.util_gain, 0.0);
    }
  }
  // 2 players before 4 players, rows sorted
  EXPECT_EQ(out.rows.front().players, 2);
  EXPECT_EQ(out.rows.back().players, 4);
  ASSERT_EQ(out.coalitions.size(), 4u);
  std::ostringstream csv;
  write_sweep_csv(csv, out.rows);
  std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "players,setting,r,tau_eq,util_norm_eq,util_norm_zero,util_gain,utilization,converged,"
            "epsilon");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);
}

TEST(Sweep, ResultsIndependentOfThreadCount) {
  SweepSpec spec;
  spec.player_counts = {2, 8};
  spec.settings = {ExpenseSetting::preset(ExpenseKind::MidOC)};
  spec.r_values = {0.5, 1.0};
  spec.coalitions = false;
  spec.threads = 1;
  std::ostringstream a, b;
  write_sweep_csv(a, run_sweep(spec).rows);
  spec.threads = 4;
  write_sweep_csv(b, run_sweep(spec).rows);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Sweep, StartsDoNotGrowWithPlayerCount) {
  SweepSpec spec;
  spec.player_counts = {2, 4, 8, 16};
  spec.settings = {ExpenseSetting::preset(ExpenseKind::HighOpex)};
  spec.r_values = {0.5, 2.0};
  spec.coalitions = false;
  SweepOutput out = run_sweep(spec);
  for (double r : spec.r_values) {
    double prev = INFINITY;
    for (const auto& row : out.rows)
      if (row.r == r) {
        EXPECT_LE(row.tau_eq, prev + 1e-6) << row.players << " players, r=" << r;
        prev = row.tau_eq;
      }
  }
}

TEST(Sweep, RejectsNonDividingPlayerCount) {
  SweepSpec spec;
  spec.player_counts = {3};
  EXPECT_THROW(run_sweep(spec), InvalidParams);
}

TEST(MinBrr, LowOpexNeedsNoBaseReward) {
  for (double x : {0.01, 0.05, 0.1})
    EXPECT_EQ(min_brr_for_bounded_gap(ExpenseSetting::preset(ExpenseKind::LowOpex), 4, x).r_min, 0.0);
}

TEST(MinBrr, NonIncreasingInGapBoundAndBoundHolds) {
  const ExpenseSetting mid = ExpenseSetting::preset(ExpenseKind::MidOC);
  double prev = INFINITY;
  for (double x : {0.01, 0.05, 0.1}) {
    MinBrrResult res = min_brr_for_bounded_gap(mid, 4, x);
    EXPECT_LE(res.r_min, prev);
    prev = res.r_min;
    EXPECT_LE(solve_equal_players(4, mid, res.r_min, 128, {}).tau_max, x);
    EXPECT_GT(solve_equal_players(4, mid, res.r_min - 0.011, 128, {}).tau_max, x);
  }
}

TEST(Bitcoin, HardwareEconomics) {
  MinBrrOptions opt;
  BitcoinReport rep = bitcoin_case_study(MiningHardware{}, 2, 12.5, 0.05, opt);
  EXPECT_DOUBLE_EQ(rep.capex_per_year, 1000.0);
  EXPECT_NEAR(rep.opex_per_year, 1.3 * 8760 * 0.1, 1e-9);
  EXPECT_EQ(rep.setting, ExpenseKind::MidOC);
  EXPECT_FALSE(rep.gaps_profitable);
  EXPECT_GT(rep.threshold_r, 0.0);
  EXPECT_THROW(bitcoin_case_study(MiningHardware{0, 1, 1, 1}, 8, 1.0), InvalidParams);
}

TEST(Bitcoin, ClassifiesByOpexShare) {
  EXPECT_EQ(classify_expenses(10, 0), ExpenseKind::HighOpex);
  EXPECT_EQ(classify_expenses(0, 10), ExpenseKind::LowOpex);
  EXPECT_EQ(classify_expenses(876, 1000), ExpenseKind::MidOC);
  EXPECT_EQ(classify_expenses(9, 1), ExpenseKind::HighOpex);
}

TEST(FeeFit, ExactLine) {
  std::istringstream in("timestamp_seconds,fees_total\n0,5\n1,7\n2,9\n3,11\n");
  FeeFitResult f = fit_fee_accumulation(in);
  ASSERT_EQ(f.windows.size(), 1u);
  EXPECT_NEAR(f.mean_slope, 2.0, 1e-12);
  EXPECT_NEAR(f.mean_intercept, 5.0, 1e-12);
  EXPECT_NEAR(f.mean_r_squared, 1.0, 1e-12);
}

TEST(FeeFit, NoisyWindowsAgainstDirectOls) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::ostringstream csv;
  csv.precision(17);
  csv << "timestamp_seconds,fees_total\n";
  double t0 = 1000;
  std::vector<double> slopes;
  for (int w = 0; w < 5; ++w) {
    std::vector<double> xs, ys;
    for (int i = 0; i < 60; ++i) {
      double x = 10.0 * i;
      double y = (3.0 + w) * x + 50.0;
      y *= 1.0 + 0.01 * noise(rng);
      xs.push_back(x);
      ys.push_back(y);
    }
    // accumulated fees never drop inside a window
    std::sort(ys.begin(), ys.end());
    for (std::size_t i = 0; i < xs.size(); ++i) csv << t0 + xs[i] << ',' << ys[i] << '\n';
    t0 += 700;
    slopes.push_back(fit_line(xs, ys).slope);
  }
  std::istringstream in(csv.str());
  FeeFitResult f = fit_fee_accumulation(in);
  ASSERT_EQ(f.windows.size(), 5u);
  for (std::size_t w = 0; w < 5; ++w) EXPECT_NEAR(f.windows[w].slope, slopes[w], 1e-9);
  EXPECT_GE(f.mean_r_squared, 0.95);
}

TEST(FeeFit, ConstantFeesGiveZeroRSquared) {
  std::istringstream in("timestamp_seconds,fees_total\n0,4\n5,4\n9,4\n");
  FeeFitResult f = fit_fee_accumulation(in);
  EXPECT_DOUBLE_EQ(f.mean_slope, 0.0);
  EXPECT_DOUBLE_EQ(f.mean_r_squared, 0.0);
}

TEST(FeeFit, DegenerateAndMalformedInput) {
  std::istringstream same("timestamp_seconds,fees_total\n3,1\n3,2\n");
  EXPECT_THROW(fit_fee_accumulation(same), InvalidParams);
  std::istringstream header("time,fees\n0,1\n1,2\n");
  EXPECT_THROW(fit_fee_accumulation(header), InvalidParams);
  std::istringstream text("timestamp_seconds,fees_total\n0,abc\n");
  EXPECT_THROW(fit_fee_accumulation(text), InvalidParams);
  std::istringstream empty("");
  EXPECT_THROW(fit_fee_accumulation(empty), InvalidParams);
}
