// Per-run measurement record produced by the simulator.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "npca/params.hpp"
#include "npca/world.hpp"

namespace npca {

struct DelayStats {
  std::size_t count = 0;
  double mean = 0, p50 = 0, p95 = 0, min = 0, max = 0;
};

/// Nearest-rank percentiles over a copy of `samples`.
DelayStats summarize(std::vector<double> samples);

enum class Outcome { Success, Collision };
std::string_view to_string(Outcome o);

struct TxAttemptRecord {
  int station_id = 0;
  int bss_id = 0;
  std::vector<int> channel_ids;  ///< first entry is the channel driving the outcome
  TimeNs start_ns = 0;
  TimeNs end_ns = 0;
  Outcome outcome = Outcome::Success;
  TimeNs access_delay_ns = 0;  ///< start minus the time the packet became ready
  int packets_delivered = 0;
};

struct StationMetrics {
  int station_id = 0;
  int bss_id = 0;
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::vector<double> access_delay_us;  ///< one sample per successful attempt
};

struct BssMetrics {
  std::string name;
  Policy policy = Policy::Legacy;
  int stations = 0;
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::uint64_t packets_delivered = 0;
  double throughput_mbps = 0;
  double collision_rate = 0;
  DelayStats access_delay;  ///< microseconds
};

struct ChannelMetrics {
  int channel_id = 0;
  TimeNs success_ns = 0;    ///< in-simulation traffic, every portion delivered
  TimeNs collision_ns = 0;  ///< in-simulation traffic with a failed portion
  TimeNs obss_ns = 0;       ///< external occupancy only
  TimeNs idle_ns = 0;
  TimeNs obss_active_ns = 0;  ///< total time an OBSS burst was on air
  std::uint64_t obss_bursts = 0;
  double target_idle_prob = 1.0;

  double fraction(TimeNs part, TimeNs duration) const;
  /// 1 - (OBSS airtime / duration).
  double measured_idle_fraction(TimeNs duration) const;
};

struct MetricsReport {
  TimeNs duration_ns = 0;
  std::uint64_t seed = 0;
  std::vector<BssMetrics> bss;
  std::vector<ChannelMetrics> channels;
  std::vector<StationMetrics> stations;
  std::vector<TxAttemptRecord> attempts;  ///< filled only when requested

  double duration_us() const { return ns_to_us(duration_ns); }
};

/// Summary form (no per-sample arrays) used for printed and written reports.
nlohmann::json to_json(const MetricsReport& r);

}  // namespace npca
