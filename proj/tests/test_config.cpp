#include <gtest/gtest.h>

#include <sstream>

#include "gapgame/config.hpp"

using namespace gapgame;

namespace {

std::string message_of(const std::string& text) {
  std::istringstream in(text);
  try {
    load_scenario(in);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesNormalizedStarts) {
  std::istringstream in(R"({"fee_rate": 2, "base_reward": 100, "block_interval": 600,
    "opex_rate": 0.5, "capex_rate": 0.25,
    "players": [{"groups": [{"rigs": 3, "start_time_normalized": 0.5}]},
                {"groups": [{"rigs": 1, "start_time_normalized": 0}, {"rigs": 2, "start_time_normalized": 1.5}]}]})");
  Scenario sc = load_scenario(in);
  EXPECT_DOUBLE_EQ(sc.params.fee_rate, 2);
  EXPECT_DOUBLE_EQ(sc.params.block_interval, 600);
  EXPECT_EQ(sc.params.total_rigs, 6);
  EXPECT_DOUBLE_EQ(sc.schedule.players[0].groups[0].start, 300);
  EXPECT_DOUBLE_EQ(sc.schedule.players[1].groups[1].start, 900);
}

TEST(Config, RoundTrips) {
  Scenario sc = preset_scenario("split-gap");
  sc.params.base_reward = 1234.5;
  Scenario back = scenario_from_json(scenario_to_json(sc));
  EXPECT_EQ(back.schedule.players.size(), sc.schedule.players.size());
  for (std::size_t i = 0; i < sc.schedule.players.size(); ++i)
    for (std::size_t g = 0; g < sc.schedule.players[i].groups.size(); ++g) {
      EXPECT_EQ(back.schedule.players[i].groups[g].rigs, sc.schedule.players[i].groups[g].rigs);
      EXPECT_NEAR(back.schedule.players[i].groups[g].start, sc.schedule.players[i].groups[g].start,
                  1e-9);
    }
  EXPECT_DOUBLE_EQ(back.params.base_reward, 1234.5);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(message_of("{").find("malformed"), std::string::npos);
  EXPECT_NE(message_of("{}").find("players"), std::string::npos);
  EXPECT_NE(message_of(R"({"fee_rate": "x", "players": []})").find("fee_rate"), std::string::npos);
  EXPECT_NE(message_of(R"({"players": [{"groups": [{"start_time_normalized": 0}]}]})")
                .find("players[0].groups[0].rigs"),
            std::string::npos);
  EXPECT_NE(message_of(R"({"players": [{"groups": [{"rigs": 2, "start_time_normalized": -1}]}]})")
                .find("start_time_normalized"),
            std::string::npos);
  EXPECT_NE(message_of(R"({"players": [{"groups": [{"rigs": 2.5, "start_time_normalized": 0}]}]})")
                .find("rigs"),
            std::string::npos);
  EXPECT_NE(message_of(R"({"block_interval": 0, "players": [{"groups": [{"rigs": 2, "start_time_normalized": 0}]}]})")
                .find("block_interval"),
            std::string::npos);
}

TEST(Config, MissingFileIsReported) {
  EXPECT_THROW(load_scenario_file("/nonexistent/file.json"), ConfigError);
}
