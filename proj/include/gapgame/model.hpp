#ifndef GAPGAME_MODEL_HPP
#define GAPGAME_MODEL_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gapgame {

// Error hierarchy shared by all modules.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSchedule : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class UnknownScenario : public Error {
 public:
  using Error::Error;
};

/// Economic and protocol constants of a mining system.
///
/// Times are in absolute units throughout; normalization by block_interval
/// only happens at I/O boundaries.
struct SystemParams {
  double fee_rate = 1.0;          // fees accumulated per time unit
  double base_reward = 0.0;       // time-independent reward per block
  double block_interval = 10000;  // protocol target for E[X]
  double opex_rate = 0.0;         // per active rig per time unit
  double capex_rate = 0.0;        // per owned rig per time unit
  int total_rigs = 128;

  /// Expected total block reward when E[X] equals the target interval.
  [[nodiscard]] double total_expected_reward() const {
    return fee_rate * block_interval + base_reward;
  }

  [[nodiscard]] double base_reward_ratio() const {
    return base_reward / (fee_rate * block_interval);
  }

  void validate() const {
    if (!(fee_rate > 0) || !std::isfinite(fee_rate))
      throw InvalidParams("fee_rate must be positive and finite");
    if (!(block_interval > 0) || !std::isfinite(block_interval))
      throw InvalidParams("block_interval must be positive and finite");
    if (total_rigs < 1) throw InvalidParams("total_rigs must be at least 1");
    if (!(base_reward >= 0) || !std::isfinite(base_reward))
      throw InvalidParams("base_reward must be non-negative and finite");
    if (!(opex_rate >= 0) || !std::isfinite(opex_rate))
      throw InvalidParams("opex_rate must be non-negative and finite");
    if (!(capex_rate >= 0) || !std::isfinite(capex_rate))
      throw InvalidParams("capex_rate must be non-negative and finite");
  }
};

enum class ExpenseKind { HighOpex, MidOC, LowOpex };

struct ExpenseSetting {
  ExpenseKind kind = ExpenseKind::MidOC;
  double opex_rate = 0.01;
  double capex_rate = 0.01;

  static ExpenseSetting preset(ExpenseKind kind) {
    switch (kind) {
      case ExpenseKind::HighOpex:
        return {kind, 0.02, 0.00};
      case ExpenseKind::MidOC:
        return {kind, 0.01, 0.01};
      case ExpenseKind::LowOpex:
        return {kind, 0.00, 0.02};
    }
    throw InvalidParams("unknown expense setting");
  }

  [[nodiscard]] std::string_view name() const { return to_string(kind); }

  static std::string_view to_string(ExpenseKind kind) {
    switch (kind) {
      case ExpenseKind::HighOpex:
        return "HighOpex";
      case ExpenseKind::MidOC:
        return "MidOC";
      case ExpenseKind::LowOpex:
        return "LowOpex";
    }
    return "?";
  }

  static ExpenseKind parse(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "highopex" || lower == "high") return ExpenseKind::HighOpex;
    if (lower == "midoc" || lower == "mid") return ExpenseKind::MidOC;
    if (lower == "lowopex" || lower == "low") return ExpenseKind::LowOpex;
    throw InvalidParams("unknown expense setting '" + std::string(text) + "'");
  }
};

/// Standard experiment parameters: f = 1, T = 10000, n = 128.
inline SystemParams standard_params(ExpenseSetting setting, double base_reward_ratio,
                                    int total_rigs = 128) {
  SystemParams p;
  p.fee_rate = 1.0;
  p.block_interval = 10000.0;
  p.total_rigs = total_rigs;
  p.base_reward = base_reward_ratio * p.fee_rate * p.block_interval;
  p.opex_rate = setting.opex_rate;
  p.capex_rate = setting.capex_rate;
  return p;
}

/// Rigs of one player sharing a start time.
struct RigGroup {
  int rigs = 0;
  double start = 0.0;

  friend bool operator==(const RigGroup&, const RigGroup&) = default;
};

struct Player {
  std::vector<RigGroup> groups;

  [[nodiscard]] int rig_count() const {
    int total = 0;
    for (const auto& g : groups) total += g.rigs;
    return total;
  }

  friend bool operator==(const Player&, const Player&) = default;
};

/// A full strategy profile: start times of every rig, grouped by owner.
///
/// The schedule does not have to be canonical for evaluation; all
/// downstream code treats groups as (count, start) pairs and merges
/// equal starts itself.
struct StartSchedule {
  std::vector<Player> players;

  [[nodiscard]] int total_rigs() const {
    int total = 0;
    for (const auto& p : players) total += p.rig_count();
    return total;
  }

  [[nodiscard]] std::size_t player_count() const { return players.size(); }

  [[nodiscard]] double earliest_start() const {
    double best = INFINITY;
    for (const auto& p : players)
      for (const auto& g : p.groups) best = std::min(best, g.start);
    return best;
  }

  [[nodiscard]] double latest_start() const {
    double best = -INFINITY;
    for (const auto& p : players)
      for (const auto& g : p.groups) best = std::max(best, g.start);
    return best;
  }

  /// Sorted distinct start times over all rigs.
  [[nodiscard]] std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& p : players)
      for (const auto& g : p.groups) out.push_back(g.start);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  friend bool operator==(const StartSchedule&, const StartSchedule&) = default;

  /// Throws InvalidSchedule unless every player owns rigs and every group
  /// has a positive count and a finite non-negative start.
  void validate() const {
    if (players.empty()) throw InvalidSchedule("schedule has no players");
    for (std::size_t i = 0; i < players.size(); ++i) {
      const auto& p = players[i];
      if (p.groups.empty())
        throw InvalidSchedule("player " + std::to_string(i) + " owns no rigs");
      for (const auto& g : p.groups) {
        if (g.rigs <= 0)
          throw InvalidSchedule("player " + std::to_string(i) +
                                " has a group with non-positive rig count");
        if (!std::isfinite(g.start) || g.start < 0)
          throw InvalidSchedule("player " + std::to_string(i) +
                                " has a negative or non-finite start time");
      }
    }
  }

  void validate_against(const SystemParams& params) const {
    validate();
    if (total_rigs() != params.total_rigs)
      throw InvalidSchedule("schedule owns " + std::to_string(total_rigs()) +
                            " rigs but total_rigs is " + std::to_string(params.total_rigs));
  }
};

/// Merges equal starts within each player and sorts groups by start.
inline StartSchedule canonicalize(const StartSchedule& schedule) {
  schedule.validate();
  StartSchedule out;
  out.players.reserve(schedule.players.size());
  for (const auto& p : schedule.players) {
    std::map<double, int> by_start;
    for (const auto& g : p.groups) by_start[g.start] += g.rigs;
    Player merged;
    for (const auto& [start, rigs] : by_start) merged.groups.push_back({rigs, start});
    out.players.push_back(std::move(merged));
  }
  return out;
}

/// One player per entry, each with a single group at the given start.
inline StartSchedule single_group_schedule(const std::vector<int>& rigs,
                                           const std::vector<double>& starts) {
  if (rigs.size() != starts.size())
    throw InvalidSchedule("rig counts and start times differ in length");
  StartSchedule s;
  for (std::size_t i = 0; i < rigs.size(); ++i) s.players.push_back({{{rigs[i], starts[i]}}});
  return s;
}

inline StartSchedule equal_players_schedule(int players, int total_rigs, double start) {
  if (players < 1 || total_rigs % players != 0)
    throw InvalidSchedule("player count must divide total rigs");
  return single_group_schedule(std::vector<int>(players, total_rigs / players),
                               std::vector<double>(players, start));
}

/// Splits `rigs` over `portions` with largest-remainder rounding; ties go to
/// the earlier portion. Groups rounding to zero rigs are dropped.
inline Player split_by_portions(int rigs, const std::vector<std::pair<double, double>>& portions,
                                double block_interval) {
  std::vector<int> counts(portions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < portions.size(); ++i) {
    double exact = portions[i].first * rigs;
    counts[i] = static_cast<int>(std::floor(exact + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < rigs && k < remainders.size(); ++k, ++assigned)
    ++counts[remainders[k].second];
  Player p;
  for (std::size_t i = 0; i < portions.size(); ++i)
    if (counts[i] > 0) p.groups.push_back({counts[i], portions[i].second * block_interval});
  return p;
}

// Portions (share of the player's rigs, normalized start) of the two-player
// arbitrary-gap validation scenario.
inline const std::vector<std::pair<double, double>>& split_gap_portions_player1() {
  static const std::vector<std::pair<double, double>> v{{0.2, 0.1}, {0.7, 0.3}, {0.1, 0.9}};
  return v;
}
inline const std::vector<std::pair<double, double>>& split_gap_portions_player2() {
  static const std::vector<std::pair<double, double>> v{{0.2, 0.2}, {0.4, 0.5}, {0.4, 0.6}};
  return v;
}

/// Two-player arbitrary-gap schedule; player 1 owns `player1_rigs`.
inline StartSchedule split_gap_schedule(int player1_rigs, int total_rigs, double block_interval) {
  if (player1_rigs <= 0 || player1_rigs >= total_rigs)
    throw InvalidSchedule("player 1 must own between 1 and total_rigs - 1 rigs");
  StartSchedule s;
  s.players.push_back(split_by_portions(player1_rigs, split_gap_portions_player1(), block_interval));
  s.players.push_back(
      split_by_portions(total_rigs - player1_rigs, split_gap_portions_player2(), block_interval));
  return canonicalize(s);
}

/// Player 1 (16 rigs, at `player1_start`) against seven 16-rig opponents
/// following one of the four opponent strategies.
inline StartSchedule fixed_opponents_schedule(int strategy, double player1_start, double block_interval) {
  std::vector<double> others;
  switch (strategy) {
    case 1:
      others = {0.1, 0.1, 0.1, 0.1, 0.9, 0.9, 0.9};
      break;
    case 2:
      others.assign(7, 0.1);
      break;
    case 3:
      others.assign(7, 0.5);
      break;
    case 4:
      others.assign(7, 0.9);
      break;
    default:
      throw UnknownScenario("opponent strategy must be 1..4");
  }
  StartSchedule s;
  s.players.push_back({{{16, player1_start}}});
  for (double tau : others) s.players.push_back({{{16, tau * block_interval}}});
  return s;
}

/// Relative player sizes of the mixed-size cases.
inline std::vector<double> mixed_size_shares(int row) {
  switch (row) {
    case 1:
      return {0.125, 0.125, 0.25, 0.5};
    case 2:
      return {0.25, 0.25, 0.5};
    case 3:
      return {0.125, 0.375, 0.5};
    case 4:
      return {0.125, 0.25, 0.625};
    default:
      throw UnknownScenario("mixed-size case must be 1..4");
  }
}

/// Reference normalized equilibrium starts for the mixed-size cases.
inline std::vector<double> mixed_size_reference_starts(int row) {
  switch (row) {
    case 1:
      return {0.157, 0.157, 0.261, 0.452};
    case 2:
      return {0.261, 0.261, 0.452};
    case 3:
      return {0.131, 0.350, 0.452};
    case 4:
      return {0.131, 0.261, 0.452};
    default:
      throw UnknownScenario("mixed-size case must be 1..4");
  }
}

inline StartSchedule sized_players_schedule(const std::vector<double>& sizes, int total_rigs,
                                            double start) {
  std::vector<int> rigs;
  int assigned = 0;
  for (double sz : sizes) {
    int r = static_cast<int>(std::lround(sz * total_rigs));
    rigs.push_back(r);
    assigned += r;
  }
  if (assigned != total_rigs) throw InvalidSchedule("player sizes do not sum to 1");
  return single_group_schedule(rigs, std::vector<double>(rigs.size(), start));
}

struct Scenario {
  std::string name;
  SystemParams params;
  StartSchedule schedule;
};

/// Known scenario ids:
///   all-zero, all-half, a-scatter          four 32-rig players (no rewards/expenses set)
///   split-gap                              two 64-rig players, split start times
///   opponents-1 .. opponents-4             eight 16-rig players, HighOpex, r = 2
///   mixed-size-1 .. mixed-size-4           mixed sizes, HighOpex, r = 2, all start 0
///   equal-N                                N equal players at 0 (N divides 128)
inline Scenario preset_scenario(std::string_view name) {
  Scenario sc;
  sc.name = std::string(name);
  sc.params = standard_params({ExpenseKind::MidOC, 0.0, 0.0}, 0.0);
  const double T = sc.params.block_interval;
  const int n = sc.params.total_rigs;
  auto quarters = [&](double a, double b, double c, double d) {
    return single_group_schedule({32, 32, 32, 32}, {a * T, b * T, c * T, d * T});
  };
  if (name == "all-zero") {
    sc.schedule = quarters(0, 0, 0, 0);
  } else if (name == "all-half") {
    sc.schedule = quarters(0.5, 0.5, 0.5, 0.5);
  } else if (name == "a-scatter") {
    sc.schedule = quarters(0.2, 0.4, 0.6, 0.8);
  } else if (name == "split-gap") {
    sc.schedule = split_gap_schedule(n / 2, n, T);
  } else if (name.starts_with("opponents-") && name.size() == 11) {
    sc.params = standard_params(ExpenseSetting::preset(ExpenseKind::HighOpex), 2.0);
    sc.schedule = fixed_opponents_schedule(name[10] - '0', 0.0, T);
  } else if (name.starts_with("mixed-size-") && name.size() == 12) {
    sc.params = standard_params(ExpenseSetting::preset(ExpenseKind::HighOpex), 2.0);
    sc.schedule = sized_players_schedule(mixed_size_shares(name[11] - '0'), n, 0.0);
  } else if (name.starts_with("equal-")) {
    int players = 0;
    try {
      players = std::stoi(std::string(name.substr(6)));
    } catch (const std::exception&) {
      throw UnknownScenario("unknown scenario '" + std::string(name) + "'");
    }
    sc.schedule = equal_players_schedule(players, n, 0.0);
  } else {
    throw UnknownScenario("unknown scenario '" + std::string(name) + "'");
  }
  return sc;
}

}  // namespace gapgame

#endif  // GAPGAME_MODEL_HPP
