#include "npca/params.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

namespace npca {

namespace {

bool is_power_of_two(int v) { return v > 0 && std::has_single_bit(static_cast<unsigned>(v)); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

double get_number(const nlohmann::json& j, std::string_view key, double fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) throw ConfigError("phy." + std::string(key) + ": expected a number");
  return it->get<double>();
}

int get_int(const nlohmann::json& j, std::string_view key, int fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) throw ConfigError(std::string(key) + ": expected an integer");
  return it->get<int>();
}

}  // namespace

TimeNs us_to_ns(double us) { return static_cast<TimeNs>(std::llround(us * kNsPerUs)); }

double mcs_rate_mbps(int mcs) {
  static constexpr std::array<double, 12> kRates = {8.6,  17.2, 25.8, 34.4,  51.6,  68.8,
                                                    77.4, 86.0, 103.2, 114.7, 129.0, 143.4};
  if (mcs < 0 || mcs >= static_cast<int>(kRates.size()))
    throw ConfigError("unknown MCS index " + std::to_string(mcs));
  return kRates[static_cast<std::size_t>(mcs)];
}

PhyMacConfig::PhyMacConfig(const Params& p) : params_(p) {
  require(p.slot_us > 0, "slot_us must be > 0");
  require(p.sifs_us > 0, "sifs_us must be > 0");
  require(p.payload_bytes > 0, "payload_bytes must be > 0");
  require(p.data_rate_mbps > 0 && std::isfinite(p.data_rate_mbps), "data_rate_mbps must be > 0");
  require(p.phy_header_us >= 0, "phy_header_us must be >= 0");
  require(p.ack_us >= 0, "ack_us must be >= 0");
  require(p.propagation_us >= 0, "propagation_us must be >= 0");
  require(is_power_of_two(p.cw_min), "cw_min must be a power of two");
  require(is_power_of_two(p.cw_max), "cw_max must be a power of two");
  require(p.cw_max >= p.cw_min, "cw_max must be >= cw_min");

  slot_ = us_to_ns(p.slot_us);
  sifs_ = us_to_ns(p.sifs_us);
  header_ = us_to_ns(p.phy_header_us);
  ack_ = us_to_ns(p.ack_us);
  prop_ = us_to_ns(p.propagation_us);
  require(slot_ > 0, "slot_us below nanosecond resolution");
  difs_ = sifs_ + 2 * slot_;
  // NACK is taken to last as long as an ACK.
  eifs_ = sifs_ + ack_ + difs_;
  max_stage_ = std::countr_zero(static_cast<unsigned>(p.cw_max / p.cw_min));
}

int PhyMacConfig::contention_window(int stage) const {
  stage = std::clamp(stage, 0, max_stage_);
  return std::min(params_.cw_min << stage, params_.cw_max);
}

bool PhyMacConfig::operator==(const PhyMacConfig& o) const {
  const auto& a = params_;
  const auto& b = o.params_;
  return a.slot_us == b.slot_us && a.sifs_us == b.sifs_us && a.phy_header_us == b.phy_header_us &&
         a.ack_us == b.ack_us && a.propagation_us == b.propagation_us &&
         a.payload_bytes == b.payload_bytes && a.data_rate_mbps == b.data_rate_mbps &&
         a.cw_min == b.cw_min && a.cw_max == b.cw_max;
}

PhyMacConfig default_config() { return PhyMacConfig(PhyMacConfig::Params{}); }

double payload_airtime_us(int payload_bytes, double rate_mbps) {
  if (!(rate_mbps > 0)) throw ConfigError("data rate must be > 0");
  return 8.0 * payload_bytes / rate_mbps;
}

double packet_airtime_us(const PhyMacConfig& cfg) {
  return cfg.phy_header_us() + payload_airtime_us(cfg.payload_bytes(), cfg.data_rate_mbps());
}

FrameTiming frame_timing(const PhyMacConfig& cfg) {
  return FrameTiming{
      .header_us = cfg.phy_header_us(),
      .payload_us = payload_airtime_us(cfg.payload_bytes(), cfg.data_rate_mbps()),
      .sifs_us = cfg.sifs_us(),
      .ack_us = cfg.ack_us(),
      .difs_us = cfg.difs_us(),
      .eifs_us = cfg.eifs_us(),
      .propagation_us = cfg.propagation_us(),
  };
}

double t_success_us(const FrameTiming& t) {
  return t.header_us + t.payload_us + t.sifs_us + t.propagation_us + t.ack_us + t.difs_us +
         t.propagation_us;
}

double t_collision_us(const FrameTiming& t) {
  return t.header_us + t.payload_us + t.propagation_us + t.eifs_us;
}

double t_success_us(const PhyMacConfig& cfg) { return t_success_us(frame_timing(cfg)); }
double t_collision_us(const PhyMacConfig& cfg) { return t_collision_us(frame_timing(cfg)); }

namespace {
TimeNs payload_ns(const PhyMacConfig& cfg) {
  return us_to_ns(payload_airtime_us(cfg.payload_bytes(), cfg.data_rate_mbps()));
}
}  // namespace

TimeNs success_busy_ns(const PhyMacConfig& cfg) {
  return cfg.phy_header() + payload_ns(cfg) + cfg.sifs() + cfg.propagation() + cfg.ack() +
         cfg.propagation();
}

TimeNs collision_busy_ns(const PhyMacConfig& cfg) {
  return cfg.phy_header() + payload_ns(cfg) + cfg.propagation() + cfg.eifs() - cfg.difs();
}

double ChannelSetup::idle_prob(std::size_t c) const {
  if (c == 0) return primary_idle_prob;
  if (c > nonprimary_idle_probs.size()) throw ConfigError("channel index out of range");
  return nonprimary_idle_probs[c - 1];
}

void ChannelSetup::validate() const {
  auto ok = [](double p) { return p > 0.0 && p <= 1.0; };
  require(ok(primary_idle_prob), "channels.primary_idle_prob must be in (0, 1]");
  for (std::size_t i = 0; i < nonprimary_idle_probs.size(); ++i)
    require(ok(nonprimary_idle_probs[i]),
            "channels.nonprimary_idle_probs[" + std::to_string(i) + "] must be in (0, 1]");
  require(channel_bandwidth_mhz > 0, "channels.channel_bandwidth_mhz must be > 0");
}

void require_known_keys(const nlohmann::json& j, std::span<const std::string_view> allowed,
                        std::string_view section) {
  if (!j.is_object()) throw ConfigError(std::string(section) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + std::string(section) + "." + key + "'");
  }
}

nlohmann::json to_json(const PhyMacConfig& cfg) {
  const auto& p = cfg.params();
  return {
      {"slot_us", p.slot_us},
      {"sifs_us", p.sifs_us},
      {"difs_us", cfg.difs_us()},
      {"eifs_us", cfg.eifs_us()},
      {"phy_header_us", p.phy_header_us},
      {"ack_us", p.ack_us},
      {"propagation_us", p.propagation_us},
      {"payload_bytes", p.payload_bytes},
      {"data_rate_mbps", p.data_rate_mbps},
      {"cw_min", p.cw_min},
      {"cw_max", p.cw_max},
      {"max_backoff_stage", cfg.max_backoff_stage()},
  };
}

PhyMacConfig phy_from_json(const nlohmann::json& j) {
  static constexpr std::string_view kKeys[] = {
      "slot_us", "sifs_us",        "difs_us", "eifs_us", "phy_header_us",
      "ack_us",  "propagation_us", "payload_bytes", "data_rate_mbps", "mcs",
      "cw_min",  "cw_max",         "max_backoff_stage"};
  require_known_keys(j, kKeys, "phy");

  PhyMacConfig::Params p;
  p.slot_us = get_number(j, "slot_us", p.slot_us);
  p.sifs_us = get_number(j, "sifs_us", p.sifs_us);
  p.phy_header_us = get_number(j, "phy_header_us", p.phy_header_us);
  p.ack_us = get_number(j, "ack_us", p.ack_us);
  p.propagation_us = get_number(j, "propagation_us", p.propagation_us);
  p.payload_bytes = get_int(j, "payload_bytes", p.payload_bytes);
  p.cw_min = get_int(j, "cw_min", p.cw_min);
  p.cw_max = get_int(j, "cw_max", p.cw_max);
  if (j.contains("mcs") && j.contains("data_rate_mbps"))
    throw ConfigError("phy: give either mcs or data_rate_mbps, not both");
  if (j.contains("mcs")) p.data_rate_mbps = mcs_rate_mbps(get_int(j, "mcs", 7));
  p.data_rate_mbps = get_number(j, "data_rate_mbps", p.data_rate_mbps);

  PhyMacConfig cfg(p);
  // Derived fields may be present (e.g. from a dumped config) but must agree.
  auto check_derived = [&](std::string_view key, double value) {
    if (j.contains(key) && us_to_ns(get_number(j, key, 0)) != us_to_ns(value))
      throw ConfigError("phy." + std::string(key) + " is derived and does not match the other fields");
  };
  check_derived("difs_us", cfg.difs_us());
  check_derived("eifs_us", cfg.eifs_us());
  if (j.contains("max_backoff_stage") && get_int(j, "max_backoff_stage", 0) != cfg.max_backoff_stage())
    throw ConfigError("phy.max_backoff_stage is derived and does not match cw_max/cw_min");
  return cfg;
}

nlohmann::json to_json(const ChannelSetup& ch) {
  return {{"primary_idle_prob", ch.primary_idle_prob},
          {"nonprimary_idle_probs", ch.nonprimary_idle_probs},
          {"channel_bandwidth_mhz", ch.channel_bandwidth_mhz}};
}

ChannelSetup channels_from_json(const nlohmann::json& j) {
  static constexpr std::string_view kKeys[] = {"primary_idle_prob", "nonprimary_idle_probs",
                                               "channel_bandwidth_mhz"};
  require_known_keys(j, kKeys, "channels");
  ChannelSetup ch;
  try {
    ch.primary_idle_prob = j.value("primary_idle_prob", ch.primary_idle_prob);
    ch.nonprimary_idle_probs = j.value("nonprimary_idle_probs", ch.nonprimary_idle_probs);
    ch.channel_bandwidth_mhz = j.value("channel_bandwidth_mhz", ch.channel_bandwidth_mhz);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("channels: ") + e.what());
  }
  ch.validate();
  return ch;
}

}  // namespace npca
