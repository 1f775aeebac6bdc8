// PHY/MAC timing constants, channel setup, and unit conversions.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace npca {

/// Simulation timestamps and durations, in integer nanoseconds.
using TimeNs = std::int64_t;

inline constexpr TimeNs kNsPerUs = 1000;

TimeNs us_to_ns(double us);
inline double ns_to_us(TimeNs ns) { return static_cast<double>(ns) / kNsPerUs; }

/// Raised for any invalid configuration value or malformed config document.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// 20 MHz, one spatial stream, 0.8 us GI data rate for an MCS index (0..11).
double mcs_rate_mbps(int mcs);

/// Immutable PHY/MAC constants. Durations are held as integer nanoseconds;
/// DIFS, EIFS and the maximum backoff stage are derived on construction.
class PhyMacConfig {
public:
  struct Params {
    double slot_us = 9.0;
    double sifs_us = 16.0;
    double phy_header_us = 40.0;
    double ack_us = 32.0;
    double propagation_us = 0.1;
    int payload_bytes = 1500;
    double data_rate_mbps = 86.0;  // MCS 7
    int cw_min = 16;
    int cw_max = 1024;
  };

  PhyMacConfig() : PhyMacConfig(Params{}) {}
  explicit PhyMacConfig(const Params& p);

  const Params& params() const { return params_; }

  TimeNs slot() const { return slot_; }
  TimeNs sifs() const { return sifs_; }
  TimeNs difs() const { return difs_; }
  TimeNs eifs() const { return eifs_; }
  TimeNs phy_header() const { return header_; }
  TimeNs ack() const { return ack_; }
  TimeNs propagation() const { return prop_; }

  double slot_us() const { return ns_to_us(slot_); }
  double sifs_us() const { return ns_to_us(sifs_); }
  double difs_us() const { return ns_to_us(difs_); }
  double eifs_us() const { return ns_to_us(eifs_); }
  double phy_header_us() const { return ns_to_us(header_); }
  double ack_us() const { return ns_to_us(ack_); }
  double propagation_us() const { return ns_to_us(prop_); }

  int payload_bytes() const { return params_.payload_bytes; }
  double payload_bits() const { return 8.0 * params_.payload_bytes; }
  double data_rate_mbps() const { return params_.data_rate_mbps; }
  int cw_min() const { return params_.cw_min; }
  int cw_max() const { return params_.cw_max; }
  int max_backoff_stage() const { return max_stage_; }

  /// Contention window at a backoff stage: min(cw_min * 2^stage, cw_max).
  int contention_window(int stage) const;

  bool operator==(const PhyMacConfig& o) const;

private:
  Params params_;
  TimeNs slot_, sifs_, difs_, eifs_, header_, ack_, prop_;
  int max_stage_;
};

PhyMacConfig default_config();

/// Raw durations (us) entering the busy-period formulas. Split out from
/// PhyMacConfig so degenerate timing sets can be evaluated directly.
struct FrameTiming {
  double header_us = 0;
  double payload_us = 0;
  double sifs_us = 0;
  double ack_us = 0;
  double difs_us = 0;
  double eifs_us = 0;
  double propagation_us = 0;
};

FrameTiming frame_timing(const PhyMacConfig& cfg);

/// Airtime of the payload alone, payload_bytes * 8 / rate.
double payload_airtime_us(int payload_bytes, double rate_mbps);
/// PHY header plus payload airtime.
double packet_airtime_us(const PhyMacConfig& cfg);

double t_success_us(const FrameTiming& t);
double t_collision_us(const FrameTiming& t);
double t_success_us(const PhyMacConfig& cfg);
double t_collision_us(const PhyMacConfig& cfg);

/// Busy portion of a frame exchange as seen on the medium, excluding the
/// trailing DIFS that every contender has to sense before resuming backoff.
TimeNs success_busy_ns(const PhyMacConfig& cfg);
TimeNs collision_busy_ns(const PhyMacConfig& cfg);

/// One primary channel plus N non-primary channels with the probability each
/// is sensed idle. List order is switching priority.
struct ChannelSetup {
  double primary_idle_prob = 1.0;
  std::vector<double> nonprimary_idle_probs;
  double channel_bandwidth_mhz = 20.0;

  std::size_t nonprimary_count() const { return nonprimary_idle_probs.size(); }
  std::size_t channel_count() const { return 1 + nonprimary_idle_probs.size(); }
  /// Idle probability of channel index c, where 0 is the primary.
  double idle_prob(std::size_t c) const;
  void validate() const;

  bool operator==(const ChannelSetup&) const = default;
};

// JSON (de)serialization. Unknown keys are rejected with ConfigError.
nlohmann::json to_json(const PhyMacConfig& cfg);
PhyMacConfig phy_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ChannelSetup& ch);
ChannelSetup channels_from_json(const nlohmann::json& j);

/// Throws ConfigError if `j` is not an object or carries a key outside `allowed`.
void require_known_keys(const nlohmann::json& j, std::span<const std::string_view> allowed,
                        std::string_view section);

}  // namespace npca
