#ifndef GAPGAME_CONFIG_HPP
#define GAPGAME_CONFIG_HPP

#include <fstream>
#include <istream>
#include <string>

#include "json.hpp"

#include "gapgame/model.hpp"

namespace gapgame {

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline double number_field(const nlohmann::json& obj, const std::string& key,
                           const std::string& where, bool required, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw ConfigError(where + key + ": missing");
    return fallback;
  }
  if (!it->is_number()) throw ConfigError(where + key + ": expected a number");
  return it->get<double>();
}

}  // namespace detail

/// Parses a scenario document. Start times are given normalized by
/// block_interval in the file and stored absolute.
inline Scenario scenario_from_json(const nlohmann::json& doc, const std::string& name = "config") {
  using detail::number_field;
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  Scenario sc;
  sc.name = name;
  SystemParams& p = sc.params;
  p.fee_rate = number_field(doc, "fee_rate", "", false, p.fee_rate);
  p.base_reward = number_field(doc, "base_reward", "", false, p.base_reward);
  p.block_interval = number_field(doc, "block_interval", "", false, p.block_interval);
  p.opex_rate = number_field(doc, "opex_rate", "", false, p.opex_rate);
  p.capex_rate = number_field(doc, "capex_rate", "", false, p.capex_rate);

  auto players = doc.find("players");
  if (players == doc.end()) throw ConfigError("players: missing");
  if (!players->is_array() || players->empty()) throw ConfigError("players: expected a non-empty array");
  for (std::size_t i = 0; i < players->size(); ++i) {
    const auto& pj = (*players)[i];
    const std::string where = "players[" + std::to_string(i) + "].";
    if (!pj.is_object()) throw ConfigError(where.substr(0, where.size() - 1) + ": expected an object");
    auto groups = pj.find("groups");
    if (groups == pj.end()) throw ConfigError(where + "groups: missing");
    if (!groups->is_array() || groups->empty())
      throw ConfigError(where + "groups: expected a non-empty array");
    Player player;
    for (std::size_t g = 0; g < groups->size(); ++g) {
      const auto& gj = (*groups)[g];
      const std::string gw = where + "groups[" + std::to_string(g) + "].";
      if (!gj.is_object()) throw ConfigError(gw.substr(0, gw.size() - 1) + ": expected an object");
      auto rigs = gj.find("rigs");
      if (rigs == gj.end()) throw ConfigError(gw + "rigs: missing");
      if (!rigs->is_number_integer() || rigs->get<long long>() < 1)
        throw ConfigError(gw + "rigs: expected a positive integer");
      double s = number_field(gj, "start_time_normalized", gw, true, 0.0);
      if (!(s >= 0) || !std::isfinite(s))
        throw ConfigError(gw + "start_time_normalized: must be finite and non-negative");
      player.groups.push_back({static_cast<int>(rigs->get<long long>()), s * p.block_interval});
    }
    sc.schedule.players.push_back(std::move(player));
  }
  p.total_rigs = sc.schedule.total_rigs();
  try {
    p.validate();
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
  return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json doc;
  doc["fee_rate"] = sc.params.fee_rate;
  doc["base_reward"] = sc.params.base_reward;
  doc["block_interval"] = sc.params.block_interval;
  doc["opex_rate"] = sc.params.opex_rate;
  doc["capex_rate"] = sc.params.capex_rate;
  doc["players"] = nlohmann::json::array();
  for (const auto& p : sc.schedule.players) {
    nlohmann::json pj;
    pj["groups"] = nlohmann::json::array();
    for (const auto& g : p.groups)
      pj["groups"].push_back(
          {{"rigs", g.rigs}, {"start_time_normalized", g.start / sc.params.block_interval}});
    doc["players"].push_back(pj);
  }
  return doc;
}

inline Scenario load_scenario(std::istream& in, const std::string& name = "config") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(name + ": malformed JSON (" + e.what() + ")");
  }
  return scenario_from_json(doc, name);
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  return load_scenario(in, path);
}

}  // namespace gapgame

#endif  // GAPGAME_CONFIG_HPP
