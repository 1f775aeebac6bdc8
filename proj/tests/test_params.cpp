#include <doctest.h>

#include <cmath>

#include "npca/params.hpp"

using namespace npca;

TEST_CASE("default timing constants") {
  const auto cfg = default_config();
  CHECK(cfg.slot() == 9000);
  CHECK(cfg.sifs() == 16000);
  CHECK(cfg.difs() == 34000);
  CHECK(cfg.eifs() == 16000 + 32000 + 34000);
  CHECK(cfg.payload_bytes() == 1500);
  CHECK(cfg.cw_min() == 16);
  CHECK(cfg.cw_max() == 1024);
  CHECK(cfg.max_backoff_stage() == 6);
  CHECK(cfg.data_rate_mbps() == doctest::Approx(mcs_rate_mbps(7)));
  CHECK(mcs_rate_mbps(7) == 86.0);
  CHECK_THROWS_AS(mcs_rate_mbps(12), ConfigError);
  CHECK_THROWS_AS(mcs_rate_mbps(-1), ConfigError);
}

TEST_CASE("contention window doubles and saturates") {
  const auto cfg = default_config();
  const int expected[] = {16, 32, 64, 128, 256, 512, 1024, 1024, 1024};
  for (int s = 0; s < 9; ++s) CHECK(cfg.contention_window(s) == expected[s]);
}

TEST_CASE("busy periods, term by term") {
  const auto cfg = default_config();
  // Independent arithmetic from the raw constants.
  const double pkt = 40.0 + 1500.0 * 8.0 / 86.0;
  const double difs = 16.0 + 2 * 9.0;
  const double eifs = 16.0 + 32.0 + difs;
  const double ts = pkt + 16.0 + 0.1 + 32.0 + difs + 0.1;
  const double tc = pkt + 0.1 + eifs;
  CHECK(packet_airtime_us(cfg) == doctest::Approx(pkt).epsilon(1e-12));
  CHECK(t_success_us(cfg) == doctest::Approx(ts).epsilon(1e-12));
  CHECK(t_collision_us(cfg) == doctest::Approx(tc).epsilon(1e-12));
  CHECK(success_busy_ns(cfg) == std::llround((ts - difs) * 1000));
  CHECK(collision_busy_ns(cfg) == std::llround((tc - difs) * 1000));
  CHECK(success_busy_ns(cfg) == 227735);
  CHECK(collision_busy_ns(cfg) == 227635);
}

TEST_CASE("degenerate timings") {
  CHECK(payload_airtime_us(0, 86.0) == 0.0);
  CHECK_THROWS_AS(payload_airtime_us(1500, 0.0), ConfigError);
  FrameTiming zero;
  CHECK(t_success_us(zero) == 0.0);
  CHECK(t_collision_us(zero) == 0.0);
  FrameTiming only_payload;
  only_payload.payload_us = 10;
  CHECK(t_success_us(only_payload) == 10.0);
  CHECK(t_collision_us(only_payload) == 10.0);
}

TEST_CASE("invalid parameters are rejected") {
  auto make = [](auto edit) {
    PhyMacConfig::Params p;
    edit(p);
    return PhyMacConfig(p);
  };
  CHECK_THROWS_AS(make([](auto& p) { p.slot_us = 0; }), ConfigError);
  CHECK_THROWS_AS(make([](auto& p) { p.sifs_us = -1; }), ConfigError);
  CHECK_THROWS_AS(make([](auto& p) { p.payload_bytes = 0; }), ConfigError);
  CHECK_THROWS_AS(make([](auto& p) { p.data_rate_mbps = 0; }), ConfigError);
  CHECK_THROWS_AS(make([](auto& p) { p.cw_min = 15; }), ConfigError);
  CHECK_THROWS_AS(make([](auto& p) { p.cw_max = 8; }), ConfigError);
  CHECK_NOTHROW(make([](auto& p) { p.cw_max = 16; }));
  CHECK(make([](auto& p) { p.cw_max = 16; }).max_backoff_stage() == 0);
}

TEST_CASE("phy json round trip and errors") {
  PhyMacConfig::Params p;
  p.payload_bytes = 1000;
  p.slot_us = 20;
  const PhyMacConfig cfg(p);
  CHECK(phy_from_json(to_json(cfg)) == cfg);
  CHECK(phy_from_json(nlohmann::json::object()) == default_config());

  CHECK_THROWS_AS(phy_from_json({{"slot_ms", 9}}), ConfigError);
  CHECK_THROWS_AS(phy_from_json({{"mcs", 7}, {"data_rate_mbps", 86.0}}), ConfigError);
  CHECK_THROWS_AS(phy_from_json({{"difs_us", 50}}), ConfigError);
  CHECK_THROWS_AS(phy_from_json({{"max_backoff_stage", 3}}), ConfigError);
  CHECK_THROWS_AS(phy_from_json({{"payload_bytes", 1.5}}), ConfigError);
  CHECK_THROWS_AS(phy_from_json({{"slot_us", "nine"}}), ConfigError);
  CHECK(phy_from_json({{"mcs", 0}}).data_rate_mbps() == 8.6);
  CHECK(phy_from_json({{"slot_us", 20}, {"difs_us", 56}}).difs() == 56000);
}

TEST_CASE("channel setup") {
  ChannelSetup ch;
  ch.primary_idle_prob = 0.5;
  ch.nonprimary_idle_probs = {0.8, 0.3};
  CHECK(ch.channel_count() == 3);
  CHECK(ch.idle_prob(0) == 0.5);
  CHECK(ch.idle_prob(2) == 0.3);
  CHECK_THROWS_AS(ch.idle_prob(3), ConfigError);
  CHECK(channels_from_json(to_json(ch)) == ch);

  ChannelSetup bad = ch;
  bad.primary_idle_prob = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ch;
  bad.nonprimary_idle_probs[1] = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(channels_from_json({{"primary", 1}}), ConfigError);
  CHECK_THROWS_AS(channels_from_json({{"nonprimary_idle_probs", "x"}}), ConfigError);
}

TEST_CASE("unit conversion") {
  CHECK(us_to_ns(9.0) == 9000);
  CHECK(us_to_ns(0.1) == 100);
  CHECK(us_to_ns(139.5348837) == 139535);
  CHECK(ns_to_us(227735) == doctest::Approx(227.735));
}
