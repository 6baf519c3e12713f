#include <gtest/gtest.h>

#include <filesystem>

#include "pbsync/config.hpp"

using namespace pbsync;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const ScenarioConfig c = parse_config("");
  EXPECT_EQ(c.topology.routers, 8u);
  EXPECT_EQ(c.protocol.level1, Protocol::Pure1588);
  EXPECT_EQ(c.protocol.level2, Protocol::Hybrid1588Pbs);
  EXPECT_EQ(c.exchange_period(), 100'000'000);
  EXPECT_EQ(c.metrics.counted_kinds.size(), 4u);
}

TEST(Config, ParsesSectionsAndPerNodeTables) {
  const ScenarioConfig c = parse_config(R"(
# comment
[run]
seed = 17
end_s = 12.5
[protocol]
level2 = pure
cycle_s = 0.4
rounds_per_cycle = 4
[slaves]
1 = 12
[drift_ppm]
3 = -0.5
[offset_ns]
4 = 250
[links]
1->9 = 40
[metrics]
counted_kinds = sync, delay_request
)");
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(c.topology.seed, 17u);
  EXPECT_DOUBLE_EQ(c.end_s, 12.5);
  EXPECT_EQ(c.protocol.level2, Protocol::Pure1588);
  EXPECT_EQ(c.exchange_period(), 100'000'000);
  EXPECT_EQ(c.protocol.slaves.at(1), 12u);
  EXPECT_DOUBLE_EQ(c.clock.drift_ppm_of.at(3), -0.5);
  EXPECT_EQ(c.clock.offset_ns_of.at(4), 250);
  EXPECT_EQ(c.medium.link_delay_ns.at({1, 9}), 40);
  EXPECT_EQ(c.metrics.counted_kinds,
            (std::set<MessageKind>{MessageKind::Sync, MessageKind::DelayRequest}));
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(field_of("[clock]\nbogus = 1\n"), "clock.bogus");
  EXPECT_EQ(field_of("[nope]\na = 1\n"), "nope");
  EXPECT_EQ(field_of("[clock]\ndrift_ppm = fast\n"), "clock.drift_ppm");
  EXPECT_EQ(field_of("[clock]\ndrift_ppm = 1 ; inline comments are not allowed\n"),
            "clock.drift_ppm");
  EXPECT_EQ(field_of("[clock]\ndrift_mode = wobbly\n"), "clock.drift_mode");
  EXPECT_EQ(field_of("[clock]\nrouter_drift_ppm = 5000\n"), "clock.router_drift_ppm");
  EXPECT_EQ(field_of("[protocol]\nlevel1 = ntp\n"), "protocol.level1");
  EXPECT_EQ(field_of("[medium]\nloss_probability = 1.5\n"), "medium.loss_probability");
  EXPECT_EQ(field_of("[metrics]\ncounted_kinds = sync,announce\n"), "metrics.counted_kinds");
  EXPECT_EQ(field_of("[links]\n1-9 = 3\n"), "links.1-9");
}

TEST(Config, CrossFieldChecks) {
  // 50 ms holds fewer slots than the 73 nodes
  EXPECT_EQ(field_of("[protocol]\ncycle_s = 0.05\n"), "protocol.cycle_s");
  // a period that is not a whole number of slots
  EXPECT_EQ(field_of("[protocol]\ncycle_s = 0.1005\n"), "protocol.cycle_s");
  // 8 pure 1588 leaves need 25 messages per router slot
  EXPECT_EQ(field_of("[protocol]\nlevel2 = pure\n[medium]\nmessage_spacing_us = 50\n"),
            "medium.message_spacing_us");
  // slave must be a child of the master
  EXPECT_EQ(field_of("[slaves]\n1 = 20\n").rfind("slaves", 0), 0u);
  EXPECT_EQ(field_of("[protocol]\nlevel1_start_s = 5\nlevel2_start_s = 1\n"),
            "protocol.level2_start_s");
}

TEST(Config, TextRoundTrip) {
  ScenarioConfig c = parse_config("[run]\nseed = 5\n[drift_ppm]\n2 = 0.25\n[links]\n3->1 = 99\n");
  c.clock.timestamp_noise_ns = 0.1 + 0.2;  // not representable in short decimal
  const std::string text = to_text(c);
  const ScenarioConfig back = parse_config(text);
  EXPECT_EQ(to_text(back), text);
  EXPECT_EQ(back.clock.timestamp_noise_ns, c.clock.timestamp_noise_ns);
  EXPECT_EQ(back.medium.link_delay_ns.at({3, 1}), 99);
}

TEST(Config, ShippedConfigsLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(PBSYNC_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
  }
  EXPECT_THROW(load_config("/nonexistent/x.ini"), ConfigError);
}
