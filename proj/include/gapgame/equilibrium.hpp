#ifndef GAPGAME_EQUILIBRIUM_HPP
#define GAPGAME_EQUILIBRIUM_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "gapgame/difficulty.hpp"
#include "gapgame/model.hpp"
#include "gapgame/optimize.hpp"
#include "gapgame/utility.hpp"

namespace gapgame {

/// How the per-rig rate is treated while a player evaluates deviations.
///   Resolve: difficulty is re-solved for every candidate schedule.
///   Fixed:   the current rate is kept during a sweep, re-solved between sweeps.
enum class LambdaMode { Resolve, Fixed };

inline std::string_view to_string(LambdaMode mode) {
  return mode == LambdaMode::Resolve ? "resolve" : "fixed";
}

inline LambdaMode parse_lambda_mode(std::string_view text) {
  if (text == "resolve") return LambdaMode::Resolve;
  if (text == "fixed") return LambdaMode::Fixed;
  throw InvalidParams("unknown lambda mode '" + std::string(text) + "'");
}

struct EquilibriumOptions {
  // Thresholds are relative to the total expected block reward fT + R.
  double eps_tolerance = 1e-12;
  double gain_threshold = 1e-13;
  int max_sweeps = 200;
  std::uint64_t seed = 42;
  LambdaMode lambda_mode = LambdaMode::Resolve;
  double start_cap = 5.0;  // upper bound of the search domain, in units of T
  std::size_t grid_points = 256;
  double refine_tolerance = 1e-6;  // in units of T
  // Replace the initial starts by uniform draws in [0, initial_spread * T).
  bool randomize_initial = false;
  double initial_spread = 0.9;
};

struct BestResponse {
  double start = 0;
  double utility = -std::numeric_limits<double>::infinity();
};

struct TraceEntry {
  int sweep = 0;
  std::size_t player = 0;
  std::size_t group = 0;
  double old_start = 0;
  double new_start = 0;
  double gain = 0;
};

struct EquilibriumResult {
  StartSchedule schedule;
  double rate = 0;
  UtilityReport report;
  double epsilon = 0;  // largest unilateral gain found in the final sweep
  std::vector<TraceEntry> trace;
  bool converged = false;
  int sweeps = 0;
};

/// Utility of `player` after moving one of its groups to `start`.
/// Returns -inf when the moved schedule admits no rate.
inline double deviation_utility(const StartSchedule& schedule, const SystemParams& params,
                                double rate, std::size_t player, std::size_t group, double start,
                                LambdaMode mode) {
  StartSchedule moved = schedule;
  moved.players[player].groups[group].start = start;
  // No rate achieves the target interval once every rig starts at or after T.
  if (moved.earliest_start() >= params.block_interval)
    return -std::numeric_limits<double>::infinity();
  double r = rate;
  if (mode == LambdaMode::Resolve) {
    DifficultyOptions dopt;
    dopt.rate_hint = rate;
    r = solve_rate(moved, params, dopt).rate;
  }
  return expected_utility(moved, params, r, player);
}

/// Start time in [0, start_cap * T] maximizing the player's utility with
/// everything else held fixed.
inline BestResponse best_response_start(const StartSchedule& schedule, const SystemParams& params,
                                        double rate, std::size_t player, std::size_t group,
                                        const EquilibriumOptions& opt = {}) {
  if (player >= schedule.players.size() || group >= schedule.players[player].groups.size())
    throw InvalidSchedule("group does not belong to player");
  const double T = params.block_interval;
  auto objective = [&](double s) {
    return deviation_utility(schedule, params, rate, player, group, s, opt.lambda_mode);
  };
  ScalarMaximum m =
      grid_golden_maximize(objective, 0.0, opt.start_cap * T, opt.grid_points, opt.refine_tolerance * T);
  return {m.argmax, m.value};
}

struct EpsilonCertificate {
  double epsilon = 0;
  std::size_t player = 0;
  std::size_t group = 0;
  double best_start = 0;  // deviation achieving epsilon
};

/// Largest utility gain any single group can obtain by moving to a point of
/// a uniform grid over [0, start_cap * T], clamped below at zero.
inline EpsilonCertificate verify_epsilon(const StartSchedule& schedule, const SystemParams& params,
                                         double rate, std::size_t grid_points,
                                         LambdaMode mode = LambdaMode::Resolve,
                                         double start_cap = 5.0) {
  EpsilonCertificate cert;
  const double hi = start_cap * params.block_interval;
  for (std::size_t p = 0; p < schedule.players.size(); ++p) {
    const double current = expected_utility(schedule, params, rate, p);
    for (std::size_t g = 0; g < schedule.players[p].groups.size(); ++g) {
      for (std::size_t i = 0; i < grid_points; ++i) {
        double s = grid_points < 2 ? 0.0 : hi * static_cast<double>(i) / (grid_points - 1);
        double gain = deviation_utility(schedule, params, rate, p, g, s, mode) - current;
        if (gain > cert.epsilon) cert = {gain, p, g, s};
      }
    }
  }
  return cert;
}

/// Randomized best-response dynamics over (player, group) pairs. Each sweep
/// visits every group once in a random order; a sweep in which no move
/// gains more than eps_tolerance ends the search.
inline EquilibriumResult find_equilibrium(const StartSchedule& initial, const SystemParams& params,
                                          const EquilibriumOptions& opt = {}) {
  params.validate();
  initial.validate_against(params);
  const double T = params.block_interval;
  const double scale = params.total_expected_reward();
  const double gain_threshold = opt.gain_threshold * scale;
  const double eps_tolerance = opt.eps_tolerance * scale;

  std::mt19937_64 rng(opt.seed);
  EquilibriumResult result;
  StartSchedule schedule = initial;
  if (opt.randomize_initial) {
    std::uniform_real_distribution<double> start(0.0, opt.initial_spread * T);
    for (auto& p : schedule.players)
      for (auto& g : p.groups) g.start = start(rng);
  }

  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t p = 0; p < schedule.players.size(); ++p)
    for (std::size_t g = 0; g < schedule.players[p].groups.size(); ++g) order.emplace_back(p, g);

  double rate = solve_rate(schedule, params).rate;
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    result.sweeps = sweep;
    rate = solve_rate(schedule, params).rate;
    std::shuffle(order.begin(), order.end(), rng);
    double max_gain = 0;
    for (auto [p, g] : order) {
      const double current = expected_utility(schedule, params, rate, p);
      BestResponse br = best_response_start(schedule, params, rate, p, g, opt);
      const double gain = br.utility - current;
      if (gain > gain_threshold) {
        auto& grp = schedule.players[p].groups[g];
        result.trace.push_back({sweep, p, g, grp.start, br.start, gain});
        grp.start = br.start;
        max_gain = std::max(max_gain, gain);
        if (opt.lambda_mode == LambdaMode::Resolve) {
          DifficultyOptions dopt;
          dopt.rate_hint = rate;
          rate = solve_rate(schedule, params, dopt).rate;
        }
      }
    }
    result.epsilon = max_gain;
    if (max_gain <= eps_tolerance) {
      result.converged = true;
      break;
    }
  }

  result.schedule = canonicalize(schedule);
  result.rate = solve_rate(result.schedule, params).rate;
  result.report = utility_report(result.schedule, params, result.rate);
  return result;
}

}  // namespace gapgame

#endif  // GAPGAME_EQUILIBRIUM_HPP
