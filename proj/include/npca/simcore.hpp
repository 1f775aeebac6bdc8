// Deterministic multi-channel CSMA/CA simulator with legacy (primary-anchored
// bonding) and NPCA (switch to an idle non-primary channel) access policies.
//
// Time is kept in integer nanoseconds. Contention is slotted: a station's
// backoff slots on a channel start one DIFS after the later of (a) the
// instant the channel went idle and (b) the instant the station arrived on
// it. Busy periods have their exact frame-exchange durations, so one success
// occupies the medium for T_s including the trailing DIFS.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "npca/metrics.hpp"
#include "npca/params.hpp"
#include "npca/rng.hpp"
#include "npca/world.hpp"

namespace npca::sim {

struct StationState {
  int station_id = 0;
  int bss_id = 0;
  Policy policy = Policy::Legacy;
  int backoff_stage = 0;
  int backoff_counter = 0;
  int operating_channel = 0;
  /// Start of the DIFS window on the operating channel. Empty while frozen.
  std::optional<TimeNs> anchor;
  TimeNs pending_since = 0;
  bool transmitting = false;
  /// Set when a transmission completes, cleared on every channel change.
  bool return_pending = false;

  /// Idle time accumulated toward DIFS at `now` (0 while frozen).
  TimeNs difs_progress(TimeNs now, const PhyMacConfig& cfg) const;
};

struct ActiveTx {
  int tx_id = 0;
  int station_id = 0;
  int bss_id = 0;
  TimeNs end = 0;
  bool delivered = false;  ///< this channel's portion is received
};

struct ChannelState {
  int channel_id = 0;
  TimeNs obss_busy_until = 0;
  std::vector<ActiveTx> active_tx;
  double width_mhz = 20.0;
  TimeNs idle_since = 0;

  bool obss_busy(TimeNs now) const { return obss_busy_until > now; }
  bool sensed_busy(TimeNs now) const { return obss_busy(now) || !active_tx.empty(); }
  /// Busy because of an OBSS burst or a transmission from a BSS other than `bss_id`.
  bool foreign_busy(TimeNs now, int bss_id) const;
};

/// On/off external occupancy realizing a long-run idle fraction. Each idle
/// slot is followed by a burst of `busy_duration` with probability
/// q = (1-P)*slot / (P*B), so idle runs average slot/q and the idle
/// fraction is P.
struct ObssProcess {
  double target_idle_prob = 1.0;
  TimeNs busy_duration = 0;
  TimeNs slot = 0;
  double start_prob_per_slot = 0.0;
  std::uint64_t rng_stream_id = 0;
  std::optional<TimeNs> next_onset;
};

ObssProcess make_obss_process(double target_idle_prob, TimeNs busy_duration, TimeNs slot,
                              std::uint64_t stream_id);

/// Advances the OBSS process on `channel` to `now`. Cancels a pending onset
/// if the channel is busy; otherwise schedules the next onset on the global
/// slot grid, and starts the burst if it is due now. Returns true on onset.
bool obss_advance(ObssProcess& process, ChannelState& channel, TimeNs now, RngStream& rng);

/// Draws a backoff counter uniformly from [0, CW(stage) - 1].
void draw_backoff(StationState& st, const PhyMacConfig& cfg, RngStream& rng);

struct BackoffDecision {
  enum class Kind { Frozen, Counting, Transmit };
  Kind kind = Kind::Frozen;
  std::optional<TimeNs> tx_time;
};

/// Brings the station's backoff up to date at `now` against its operating
/// channel. A busy channel freezes the counter, keeping the slots that fully
/// elapsed, and discards DIFS progress. An idle channel starts (or continues)
/// DIFS-then-backoff; `arrival_delay` postpones a freshly started DIFS window.
BackoffDecision sense_and_backoff_step(StationState& st, const ChannelState& channel, TimeNs now,
                                       const PhyMacConfig& cfg, TimeNs arrival_delay = 0);

/// Channel an NPCA station should operate on. From the primary, it moves to
/// the lowest-index idle non-primary channel when the primary is busy with
/// foreign traffic, carrying its counter. A switched station stays on the
/// non-primary channel until its own transmission there has completed
/// (`return_pending`), then returns as soon as the primary is sensed idle.
/// `bss_channels[0]` is the primary.
int npca_switch_decision(const StationState& st, std::span<const ChannelState> channels,
                         std::span<const int> bss_channels, TimeNs now);

/// Channels used by a station whose backoff expired: the primary plus the
/// longest run of idle non-primary channels in priority order. A station
/// operating on a non-primary channel transmits on that channel alone.
/// Empty if the starting channel is busy.
std::vector<int> legacy_bonding_decision(const StationState& st,
                                         std::span<const ChannelState> channels,
                                         std::span<const int> bss_channels, TimeNs now);

struct StartRequest {
  int station_id = 0;
  std::vector<int> channels;  ///< first entry drives the outcome
};

struct ResolvedTx {
  int station_id = 0;
  std::vector<int> channels;
  std::vector<bool> delivered;  ///< per channel portion
  Outcome outcome = Outcome::Success;
  TimeNs busy_duration = 0;
  int packets = 0;
};

/// Resolves every transmission starting at one instant. On each channel one
/// starter and no OBSS onset means that portion is clean; otherwise it is
/// lost. A transmission succeeds iff its first channel is clean, and a
/// failed first channel loses every portion. `obss_onset` is indexed by channel.
std::vector<ResolvedTx> resolve_slot_transmissions(std::span<const StartRequest> starters,
                                                   const std::vector<bool>& obss_onset,
                                                   const PhyMacConfig& cfg);

/// Stage/counter update after a transmission completes.
void complete_transmission(StationState& st, Outcome outcome, TimeNs now, const PhyMacConfig& cfg,
                           RngStream& rng);

struct RunOptions {
  std::ostream* trace = nullptr;  ///< line-delimited JSON, one record per attempt / OBSS burst
  bool keep_attempt_log = false;
};

/// Runs `world` for `duration` simulated nanoseconds. Identical inputs give
/// identical reports. Throws ConfigError on an invalid topology.
MetricsReport run_simulation(const WorldConfig& world, TimeNs duration, std::uint64_t seed,
                             const RunOptions& opts = {});

}  // namespace npca::sim
