#ifndef GAPGAME_SIMULATOR_HPP
#define GAPGAME_SIMULATOR_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "gapgame/blocktime.hpp"
#include "gapgame/model.hpp"
#include "gapgame/parallel.hpp"

namespace gapgame {

/// Streaming mean and variance (Welford), mergeable (Chan et al.).
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double n = static_cast<double>(n_ + other.n_);
    const double delta = other.mean_ - mean_;
    mean_ += delta * static_cast<double>(other.n_) / n;
    m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / n;
    n_ += other.n_;
  }

  [[nodiscard]] std::uint64_t count() const { return n_; }
  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  [[nodiscard]] double standard_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

struct PlayerSimulation {
  double mean_profit = 0;  // per block
  double standard_error = 0;
  std::uint64_t blocks_won = 0;
  RunningStats stats;
};

struct SimulationResult {
  std::vector<PlayerSimulation> players;
  std::uint64_t total_blocks = 0;
  double mean_block_interval = 0;
  double interval_standard_error = 0;
  std::uint64_t seed = 0;
  RunningStats interval_stats;
};

struct SimulationOptions {
  // Relative Gaussian noise on the fee part of each block's reward; 0 keeps
  // the deterministic reward R + f X.
  double fee_noise = 0.0;
};

namespace detail {

inline void finalize(SimulationResult& r) {
  for (auto& p : r.players) {
    p.mean_profit = p.stats.mean();
    p.standard_error = p.stats.standard_error();
  }
  r.mean_block_interval = r.interval_stats.mean();
  r.interval_standard_error = r.interval_stats.standard_error();
}

}  // namespace detail

/// Independent one-shot rounds: each block draws (X, winner); the winner
/// earns R + f X and every player pays its expenses accrued by X.
inline SimulationResult simulate(const StartSchedule& schedule, const SystemParams& params,
                                 double rate, std::uint64_t blocks, std::uint64_t seed,
                                 const SimulationOptions& opt = {}) {
  if (blocks < 1) throw InvalidParams("blocks must be at least 1");
  schedule.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  BlockSampler sampler(schedule, rate);

  const std::size_t np = schedule.players.size();
  std::vector<int> owned(np);
  for (std::size_t i = 0; i < np; ++i) owned[i] = schedule.players[i].rig_count();

  SimulationResult result;
  result.seed = seed;
  result.total_blocks = blocks;
  result.players.resize(np);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    BlockSample s = sampler(rng);
    const double t = s.time;
    double fees = params.fee_rate * t;
    if (opt.fee_noise > 0) fees *= 1.0 + opt.fee_noise * noise(rng);
    result.interval_stats.add(t);
    for (std::size_t i = 0; i < np; ++i) {
      double active_time = 0;
      for (const auto& g : schedule.players[i].groups)
        if (g.start <= t) active_time += g.rigs * (t - g.start);
      double profit = -(params.capex_rate * owned[i] * t + params.opex_rate * active_time);
      if (i == s.winner) {
        profit += params.base_reward + fees;
        ++result.players[i].blocks_won;
      }
      result.players[i].stats.add(profit);
    }
  }
  detail::finalize(result);
  return result;
}

/// Replications with seeds base_seed + k, pooled in seed order so the
/// result does not depend on the thread count.
inline SimulationResult simulate_replications(const StartSchedule& schedule,
                                              const SystemParams& params, double rate,
                                              std::uint64_t blocks, std::uint64_t base_seed,
                                              std::size_t replications, unsigned threads = 1,
                                              const SimulationOptions& opt = {}) {
  std::vector<SimulationResult> runs(replications);
  parallel_for(replications, threads, [&](std::size_t k) {
    runs[k] = simulate(schedule, params, rate, blocks, base_seed + k, opt);
  });
  SimulationResult pooled;
  pooled.seed = base_seed;
  pooled.players.resize(schedule.players.size());
  for (const auto& r : runs) {
    pooled.total_blocks += r.total_blocks;
    pooled.interval_stats.merge(r.interval_stats);
    for (std::size_t i = 0; i < r.players.size(); ++i) {
      pooled.players[i].blocks_won += r.players[i].blocks_won;
      pooled.players[i].stats.merge(r.players[i].stats);
    }
  }
  detail::finalize(pooled);
  return pooled;
}

}  // namespace gapgame

#endif  // GAPGAME_SIMULATOR_HPP
