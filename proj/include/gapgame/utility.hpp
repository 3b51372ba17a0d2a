#ifndef GAPGAME_UTILITY_HPP
#define GAPGAME_UTILITY_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "gapgame/blocktime.hpp"
#include "gapgame/model.hpp"

namespace gapgame {

struct PlayerUtility {
  double expected_income = 0;
  double expected_expenses = 0;
  double utility = 0;
  double normalized_utility = 0;  // utility / ((fT + R) * rig_count)
  int rig_count = 0;
  double power_share = 0;
};

struct UtilityReport {
  std::vector<PlayerUtility> players;
  double rate = 0;
  double expected_block_time = 0;
};

namespace detail {

inline void check_player(const StartSchedule& schedule, std::size_t player) {
  if (player >= schedule.players.size())
    throw InvalidSchedule("player index " + std::to_string(player) + " out of range");
}

}  // namespace detail

/// Expected income of `player` given the block is found at t:
/// (|A_i(t)| / |A(t)|) * (R + f t).
inline double income_at(const StartSchedule& schedule, const SystemParams& params,
                        std::size_t player, double t) {
  detail::check_player(schedule, player);
  Exposure all = ActiveProfile::from_schedule(schedule).exposure_at(t);
  if (all.count == 0) throw Error("income is undefined while no rig is active");
  Exposure own = ActiveProfile::from_groups(schedule.players[player].groups).exposure_at(t);
  return static_cast<double>(own.count) / all.count * (params.base_reward + params.fee_rate * t);
}

/// Expenses of `player` accrued by time t: c |N_i| t + e * sum_{j in A_i(t)} (t - s_j).
inline double expenses_at(const StartSchedule& schedule, const SystemParams& params,
                          std::size_t player, double t) {
  detail::check_player(schedule, player);
  const auto& p = schedule.players[player];
  Exposure own = ActiveProfile::from_groups(p.groups).exposure_at(t);
  return params.capex_rate * p.rig_count() * t + params.opex_rate * own.exposure;
}

namespace detail {

inline constexpr std::size_t npos_player = static_cast<std::size_t>(-1);

struct PlayerTotals {
  double income = 0;
  double expenses = 0;
};

// One pass over the global intervals. On interval k the integrand for each
// player is linear in t, so every term is a closed-form linear expectation.
inline std::vector<PlayerTotals> integrate_players(const StartSchedule& schedule,
                                                   const SystemParams& params,
                                                   const BlockTimeDistribution& dist,
                                                   std::size_t only = npos_player) {
  const ActiveProfile& all = dist.profile();
  const std::size_t np = schedule.players.size();
  const std::size_t first = only == npos_player ? 0 : only;
  const std::size_t last = only == npos_player ? np : only + 1;
  std::vector<ActiveProfile> own(np);
  std::vector<int> owned(np);
  for (std::size_t i = first; i < last; ++i) {
    own[i] = ActiveProfile::from_groups(schedule.players[i].groups);
    owned[i] = schedule.players[i].rig_count();
  }
  std::vector<PlayerTotals> totals(np);
  for (std::size_t k = 0; k < all.intervals(); ++k) {
    const double t0 = all.breakpoint(k);
    const double count = all.active_count(k);
    for (std::size_t i = first; i < last; ++i) {
      const std::size_t c = own[i].interval_at(t0);
      const double own_count = c == ActiveProfile::npos ? 0 : own[i].active_count(c);
      const double own_sum = c == ActiveProfile::npos ? 0 : own[i].active_start_sum(c);
      const double share = own_count / count;
      if (share > 0)
        totals[i].income += dist.linear_expectation_on(k, share * params.base_reward,
                                                       share * params.fee_rate);
      totals[i].expenses += dist.linear_expectation_on(
          k, -params.opex_rate * own_sum,
          params.capex_rate * owned[i] + params.opex_rate * own_count);
    }
  }
  return totals;
}

}  // namespace detail

/// Exact expected utility (expected income minus expected expenses) of one
/// player at per-rig rate `rate`.
inline double expected_utility(const StartSchedule& schedule, const SystemParams& params,
                               double rate, std::size_t player) {
  detail::check_player(schedule, player);
  BlockTimeDistribution dist(schedule, rate);
  auto totals = detail::integrate_players(schedule, params, dist, player);
  return totals[player].income - totals[player].expenses;
}

inline UtilityReport utility_report(const StartSchedule& schedule, const SystemParams& params,
                                    double rate) {
  BlockTimeDistribution dist(schedule, rate);
  auto totals = detail::integrate_players(schedule, params, dist);
  UtilityReport report;
  report.rate = rate;
  report.expected_block_time = dist.mean();
  const int n = schedule.total_rigs();
  for (std::size_t i = 0; i < totals.size(); ++i) {
    PlayerUtility u;
    u.expected_income = totals[i].income;
    u.expected_expenses = totals[i].expenses;
    u.utility = u.expected_income - u.expected_expenses;
    u.rig_count = schedule.players[i].rig_count();
    u.power_share = static_cast<double>(u.rig_count) / n;
    u.normalized_utility = u.utility / (params.total_expected_reward() * u.rig_count);
    report.players.push_back(u);
  }
  return report;
}

}  // namespace gapgame

#endif  // GAPGAME_UTILITY_HPP
