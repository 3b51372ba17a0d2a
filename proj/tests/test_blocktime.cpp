#include <gtest/gtest.h>

#include <random>

#include "gapgame/blocktime.hpp"
#include "gapgame/validation.hpp"
#include "oracles.hpp"

using namespace gapgame;

TEST(ActiveProfile, CumulativeCountsAndExposure) {
  StartSchedule s = single_group_schedule({2, 3, 5}, {10.0, 0.0, 10.0});
  ActiveProfile p = ActiveProfile::from_schedule(s);
  ASSERT_EQ(p.intervals(), 2u);
  EXPECT_EQ(p.active_count(0), 3);
  EXPECT_EQ(p.active_count(1), 10);
  EXPECT_EQ(p.interval_at(-1.0), ActiveProfile::npos);
  EXPECT_EQ(p.interval_at(10.0), 1u);
  Exposure e = p.exposure_at(12.0);
  EXPECT_EQ(e.count, 10);
  EXPECT_DOUBLE_EQ(e.exposure, 3 * 12.0 + 7 * 2.0);
}

TEST(BlockTime, SurvivalAndPdfMatchBruteForce) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    StartSchedule s = detail::random_schedule(rng, 1000.0, 8);
    double rate = 1.0 / (s.total_rigs() * 1000.0);
    BlockTimeDistribution d(s, rate);
    auto rigs = oracle::rigs_of(s);
    for (double t : {0.0, 137.0, 555.5, 1234.0, 4000.0}) {
      EXPECT_NEAR(d.survival(t), oracle::survival(rigs, rate, t), 1e-14);
      EXPECT_NEAR(d.pdf(t), oracle::pdf(rigs, rate, t), 1e-14 * rate * s.total_rigs());
    }
  }
}

TEST(BlockTime, MassIsOneAgainstQuadrature) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    StartSchedule s = detail::random_schedule(rng, 1000.0, 16);
    double rate = 0.5 / (s.total_rigs() * 1000.0);
    BlockTimeDistribution d(s, rate);
    auto rigs = oracle::rigs_of(s);
    double numeric = oracle::integrate_over_block_time(
        rigs, rate, [&](double t) { return oracle::pdf(rigs, rate, t); });
    EXPECT_NEAR(numeric, 1.0, 1e-8);
    EXPECT_NEAR(d.total_mass(), 1.0, 1e-12);
  }
}

TEST(BlockTime, IntervalMassesTelescope) {
  StartSchedule s = single_group_schedule({10, 20, 30}, {0.0, 300.0, 900.0});
  BlockTimeDistribution d(s, 1e-4);
  double sum = 0;
  for (std::size_t k = 0; k < d.profile().intervals(); ++k) {
    double m = d.interval_mass(k);
    EXPECT_GE(m, 0.0);
    sum += m;
    EXPECT_NEAR(d.cdf(d.profile().interval_end(k) - 1e-9), sum, 1e-9);
  }
  EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(BlockTime, CdfAgreesWithIntegratedPdf) {
  StartSchedule s = single_group_schedule({5, 7, 9}, {50.0, 200.0, 480.0});
  const double rate = 2e-4;
  BlockTimeDistribution d(s, rate);
  auto rigs = oracle::rigs_of(s);
  for (double t : {100.0, 250.0, 700.0, 1500.0}) {
    double numeric = oracle::integrate([&](double x) { return oracle::pdf(rigs, rate, x); }, 0.0,
                                       t, 1e-13);
    EXPECT_NEAR(d.cdf(t), numeric, 1e-9) << t;
  }
}

TEST(BlockTime, MeanAgreesWithQuadrature) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    StartSchedule s = detail::random_schedule(rng, 1000.0, 6);
    double rate = 1.3 / (s.total_rigs() * 1000.0);
    EXPECT_NEAR(expected_block_time(s, rate), oracle::mean_block_time(s, rate),
                1e-7 * expected_block_time(s, rate));
  }
}

TEST(BlockTime, ShiftedExponentialSingleGroup) {
  // every rig starts at s: X = s + Exp(n rate)
  StartSchedule s = single_group_schedule({8}, {300.0});
  BlockTimeDistribution d(s, 0.001);
  EXPECT_NEAR(d.mean(), 300.0 + 1.0 / 0.008, 1e-12);
  EXPECT_DOUBLE_EQ(d.survival(299.0), 1.0);
  EXPECT_NEAR(d.survival(400.0), std::exp(-0.8), 1e-15);
  EXPECT_DOUBLE_EQ(d.pdf(299.9), 0.0);
  EXPECT_NEAR(d.pdf(300.0), 0.008, 1e-15);
}

TEST(BlockTime, MonteCarloSurvivalAtTargetForAllZero) {
  // all rigs at 0 with rate 1/(nT): P(X > T) = e^-1
  StartSchedule s = equal_players_schedule(4, 128, 0.0);
  const double T = 10000;
  BlockSampler sampler(s, 1.0 / (128 * T));
  std::mt19937_64 rng(11);
  const int N = 200000;
  int beyond = 0;
  for (int i = 0; i < N; ++i) beyond += sampler(rng).time > T;
  double p = std::exp(-1.0);
  EXPECT_NEAR(static_cast<double>(beyond) / N, p, 4 * std::sqrt(p * (1 - p) / N));
}

TEST(BlockTime, SamplerPassesKolmogorovSmirnov) {
  StartSchedule s = single_group_schedule({10, 20, 30}, {0.0, 3000.0, 6000.0});
  const double rate = 1.0 / (60 * 5000.0);
  BlockTimeDistribution d(s, rate);
  BlockSampler sampler(s, rate);
  std::mt19937_64 rng(12);
  const int N = 20000;
  std::vector<double> xs(N);
  for (auto& x : xs) x = sampler(rng).time;
  std::sort(xs.begin(), xs.end());
  double D = 0;
  for (int i = 0; i < N; ++i) {
    double F = d.cdf(xs[i]);
    D = std::max({D, F - static_cast<double>(i) / N, static_cast<double>(i + 1) / N - F});
  }
  EXPECT_LT(D, 1.63 / std::sqrt(N));  // 1% critical value
}

TEST(BlockTime, WinnerFrequenciesFollowActiveShares) {
  // two players at 0: winner share equals rig share
  StartSchedule s = single_group_schedule({32, 96}, {0.0, 0.0});
  BlockSampler sampler(s, 1e-6);
  std::mt19937_64 rng(13);
  const int N = 100000;
  int first = 0;
  for (int i = 0; i < N; ++i) first += sampler(rng).winner == 0;
  EXPECT_NEAR(static_cast<double>(first) / N, 0.25, 4 * std::sqrt(0.25 * 0.75 / N));
}

TEST(BlockTime, RejectsBadRate) {
  StartSchedule s = equal_players_schedule(2, 4, 0.0);
  EXPECT_THROW(BlockTimeDistribution(s, 0.0), InvalidParams);
  EXPECT_THROW(BlockTimeDistribution(s, -1.0), InvalidParams);
}
