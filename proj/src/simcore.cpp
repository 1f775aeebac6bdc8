#include "npca/simcore.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace npca::sim {

namespace {

constexpr TimeNs kNever = std::numeric_limits<TimeNs>::max();

// Folds the fully elapsed idle slots into the counter and drops the anchor.
void freeze(StationState& st, TimeNs now, const PhyMacConfig& cfg) {
  if (!st.anchor) return;
  const TimeNs slots_start = *st.anchor + cfg.difs();
  if (now > slots_start) {
    const TimeNs elapsed = (now - slots_start) / cfg.slot();
    st.backoff_counter -= static_cast<int>(std::min<TimeNs>(elapsed, st.backoff_counter));
  }
  st.anchor.reset();
}

}  // namespace

TimeNs StationState::difs_progress(TimeNs now, const PhyMacConfig& cfg) const {
  if (!anchor || now <= *anchor) return 0;
  return std::min(now - *anchor, cfg.difs());
}

bool ChannelState::foreign_busy(TimeNs now, int bss_id) const {
  if (obss_busy(now)) return true;
  return std::any_of(active_tx.begin(), active_tx.end(),
                     [bss_id](const ActiveTx& a) { return a.bss_id != bss_id; });
}

ObssProcess make_obss_process(double target_idle_prob, TimeNs busy_duration, TimeNs slot,
                              std::uint64_t stream_id) {
  if (!(target_idle_prob > 0.0 && target_idle_prob <= 1.0))
    throw ConfigError("OBSS target idle probability must be in (0, 1]");
  if (busy_duration <= 0 || slot <= 0) throw ConfigError("OBSS burst and slot must be > 0");
  ObssProcess p;
  p.target_idle_prob = target_idle_prob;
  p.busy_duration = busy_duration;
  p.slot = slot;
  p.rng_stream_id = stream_id;
  if (target_idle_prob < 1.0) {
    const double q = (1.0 - target_idle_prob) * static_cast<double>(slot) /
                     (target_idle_prob * static_cast<double>(busy_duration));
    p.start_prob_per_slot = std::clamp(q, 0.0, 1.0);
  }
  return p;
}

bool obss_advance(ObssProcess& process, ChannelState& channel, TimeNs now, RngStream& rng) {
  if (channel.sensed_busy(now)) {
    process.next_onset.reset();
    return false;
  }
  if (process.start_prob_per_slot <= 0.0) return false;
  const TimeNs slot = process.slot;
  if (!process.next_onset) {
    // First grid point that closes a full idle slot, and not in the past.
    auto ceil_grid = [slot](TimeNs t) { return (t + slot - 1) / slot * slot; };
    const TimeNs first = std::max(ceil_grid(channel.idle_since + slot), ceil_grid(now));
    const std::int64_t trials = rng.geometric_trials(process.start_prob_per_slot);
    const TimeNs headroom = (kNever - first) / slot;
    process.next_onset = trials - 1 >= headroom ? kNever : first + (trials - 1) * slot;
  }
  if (*process.next_onset != now) return false;
  channel.obss_busy_until = now + process.busy_duration;
  process.next_onset.reset();
  return true;
}

void draw_backoff(StationState& st, const PhyMacConfig& cfg, RngStream& rng) {
  const int cw = cfg.contention_window(st.backoff_stage);
  st.backoff_counter = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(cw)));
}

BackoffDecision sense_and_backoff_step(StationState& st, const ChannelState& channel, TimeNs now,
                                       const PhyMacConfig& cfg, TimeNs arrival_delay) {
  if (channel.sensed_busy(now)) {
    freeze(st, now, cfg);
    return {BackoffDecision::Kind::Frozen, std::nullopt};
  }
  if (!st.anchor) st.anchor = now + arrival_delay;
  const TimeNs tx_time = *st.anchor + cfg.difs() + st.backoff_counter * cfg.slot();
  if (tx_time < now) throw std::logic_error("backoff expiry was skipped");
  if (tx_time == now) {
    st.backoff_counter = 0;
    return {BackoffDecision::Kind::Transmit, now};
  }
  return {BackoffDecision::Kind::Counting, tx_time};
}

int npca_switch_decision(const StationState& st, std::span<const ChannelState> channels,
                         std::span<const int> bss_channels, TimeNs now) {
  const int primary = bss_channels.front();
  const auto& primary_state = channels[static_cast<std::size_t>(primary)];
  if (st.operating_channel != primary) {
    if (st.return_pending && !primary_state.sensed_busy(now)) return primary;
    return st.operating_channel;
  }
  if (!primary_state.foreign_busy(now, st.bss_id)) return primary;
  for (std::size_t i = 1; i < bss_channels.size(); ++i) {
    const int c = bss_channels[i];
    if (!channels[static_cast<std::size_t>(c)].sensed_busy(now)) return c;
  }
  return primary;
}

std::vector<int> legacy_bonding_decision(const StationState& st, std::span<const ChannelState> channels,
                                         std::span<const int> bss_channels, TimeNs now) {
  auto busy = [&](int c) { return channels[static_cast<std::size_t>(c)].sensed_busy(now); };
  const int primary = bss_channels.front();
  if (st.operating_channel != primary) {
    if (busy(st.operating_channel)) return {};
    return {st.operating_channel};
  }
  if (busy(primary)) return {};
  std::vector<int> out{primary};
  for (std::size_t i = 1; i < bss_channels.size() && !busy(bss_channels[i]); ++i)
    out.push_back(bss_channels[i]);
  return out;
}

std::vector<ResolvedTx> resolve_slot_transmissions(std::span<const StartRequest> starters,
                                                   const std::vector<bool>& obss_onset,
                                                   const PhyMacConfig& cfg) {
  std::vector<int> starts(obss_onset.size(), 0);
  for (const auto& s : starters)
    for (int c : s.channels) {
      if (c < 0 || static_cast<std::size_t>(c) >= starts.size())
        throw std::out_of_range("transmission on unknown channel");
      ++starts[static_cast<std::size_t>(c)];
    }

  std::vector<ResolvedTx> out;
  out.reserve(starters.size());
  for (const auto& s : starters) {
    if (s.channels.empty()) throw std::invalid_argument("transmission without channels");
    ResolvedTx r;
    r.station_id = s.station_id;
    r.channels = s.channels;
    for (int c : s.channels) {
      const auto idx = static_cast<std::size_t>(c);
      r.delivered.push_back(starts[idx] == 1 && !obss_onset[idx]);
    }
    r.outcome = r.delivered.front() ? Outcome::Success : Outcome::Collision;
    if (r.outcome == Outcome::Collision) std::fill(r.delivered.begin(), r.delivered.end(), false);
    r.packets = static_cast<int>(std::count(r.delivered.begin(), r.delivered.end(), true));
    r.busy_duration = r.outcome == Outcome::Success ? success_busy_ns(cfg) : collision_busy_ns(cfg);
    out.push_back(std::move(r));
  }
  return out;
}

void complete_transmission(StationState& st, Outcome outcome, TimeNs now, const PhyMacConfig& cfg,
                           RngStream& rng) {
  st.transmitting = false;
  st.return_pending = true;
  st.anchor.reset();
  if (outcome == Outcome::Success) {
    st.backoff_stage = 0;
    st.pending_since = now;
  } else {
    st.backoff_stage = std::min(st.backoff_stage + 1, cfg.max_backoff_stage());
  }
  draw_backoff(st, cfg, rng);
}

namespace {

class Engine {
public:
  Engine(const WorldConfig& world, std::uint64_t seed, const RunOptions& opts)
      : world_(world), cfg_(world.phy), opts_(opts) {
    world.validate();
    const auto n_channels = world.channels.channel_count();
    const TimeNs burst = world.obss_burst_ns();
    for (std::size_t c = 0; c < n_channels; ++c) {
      ChannelState ch;
      ch.channel_id = static_cast<int>(c);
      ch.width_mhz = world.channels.channel_bandwidth_mhz;
      channels_.push_back(ch);
      obss_.push_back(make_obss_process(world.channels.idle_prob(c), burst, cfg_.slot(), c));
      obss_rng_.emplace_back(seed, StreamKind::Obss, c);
      busy_.push_back(false);
    }

    report_.seed = seed;
    for (std::size_t b = 0; b < world.bss.size(); ++b) {
      const auto& bss = world.bss[b];
      BssMetrics m;
      m.name = bss.name;
      m.policy = bss.policy;
      m.stations = bss.stations;
      report_.bss.push_back(m);
      for (int i = 0; i < bss.stations; ++i) {
        StationState st;
        st.station_id = static_cast<int>(stations_.size());
        st.bss_id = static_cast<int>(b);
        st.policy = bss.policy;
        st.operating_channel = bss.channels.front();
        station_rng_.emplace_back(seed, StreamKind::Station, static_cast<std::uint64_t>(st.station_id));
        draw_backoff(st, cfg_, station_rng_.back());
        stations_.push_back(st);
        report_.stations.push_back(StationMetrics{st.station_id, st.bss_id, 0, 0, 0, {}});
      }
    }
    tx_time_.assign(stations_.size(), std::nullopt);
    for (std::size_t c = 0; c < n_channels; ++c) {
      ChannelMetrics m;
      m.channel_id = static_cast<int>(c);
      m.target_idle_prob = world.channels.idle_prob(c);
      report_.channels.push_back(m);
    }
  }

  MetricsReport run(TimeNs duration) {
    report_.duration_ns = std::max<TimeNs>(duration, 0);
    if (duration > 0) {
      TimeNs now = 0;
      while (true) {
        complete_due(now);
        refresh_channels(now, /*track_idle=*/true);
        const std::vector<int> starters = settle(now);
        start_transmissions(starters, now);
        refresh_channels(now, /*track_idle=*/false);
        if (!settle(now).empty()) throw std::logic_error("station expired after the start phase");
        const TimeNs next = next_event(now);
        if (next >= duration) {
          account(now, duration);
          break;
        }
        account(now, next);
        now = next;
      }
    }
    finish();
    return std::move(report_);
  }

private:
  struct Transmission {
    ResolvedTx tx;
    int bss_id = 0;
    TimeNs start = 0;
    TimeNs end = 0;
    TimeNs access_delay = 0;
  };

  std::span<const int> bss_channels(const StationState& st) const {
    return world_.bss[static_cast<std::size_t>(st.bss_id)].channels;
  }

  void complete_due(TimeNs now) {
    auto due = [now](const Transmission& t) { return t.end == now; };
    for (const Transmission& t : in_flight_) {
      if (!due(t)) continue;
      for (int c : t.tx.channels) {
        auto& active = channels_[static_cast<std::size_t>(c)].active_tx;
        std::erase_if(active, [&](const ActiveTx& a) { return a.station_id == t.tx.station_id; });
      }
      auto& st = stations_[static_cast<std::size_t>(t.tx.station_id)];
      complete_transmission(st, t.tx.outcome, now, cfg_, station_rng_[static_cast<std::size_t>(st.station_id)]);
      record(t);
    }
    std::erase_if(in_flight_, due);
  }

  void record(const Transmission& t) {
    auto& sm = report_.stations[static_cast<std::size_t>(t.tx.station_id)];
    auto& bm = report_.bss[static_cast<std::size_t>(t.bss_id)];
    ++sm.attempts;
    ++bm.attempts;
    if (t.tx.outcome == Outcome::Success) {
      ++sm.successes;
      ++bm.successes;
      bm.packets_delivered += static_cast<std::uint64_t>(t.tx.packets);
      sm.access_delay_us.push_back(ns_to_us(t.access_delay));
    } else {
      ++sm.collisions;
      ++bm.collisions;
    }
    if (opts_.keep_attempt_log) {
      report_.attempts.push_back(TxAttemptRecord{t.tx.station_id, t.bss_id, t.tx.channels, t.start,
                                                 t.end, t.tx.outcome, t.access_delay, t.tx.packets});
    }
    if (opts_.trace) {
      nlohmann::json line = {{"time_us", ns_to_us(t.start)},
                             {"kind", "tx"},
                             {"station", t.tx.station_id},
                             {"bss", t.bss_id},
                             {"channels", t.tx.channels},
                             {"outcome", std::string(to_string(t.tx.outcome))},
                             {"end_us", ns_to_us(t.end)},
                             {"packets", t.tx.packets}};
      *opts_.trace << line.dump() << '\n';
    }
  }

  void refresh_channels(TimeNs now, bool track_idle) {
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      const bool b = channels_[c].sensed_busy(now);
      if (track_idle && busy_[c] && !b) channels_[c].idle_since = now;
      busy_[c] = b;
    }
  }

  // Re-evaluates every contending station against the current channel state
  // and returns the ones whose backoff expires now.
  std::vector<int> settle(TimeNs now) {
    std::vector<int> starters;
    const TimeNs switch_delay = us_to_ns(world_.sim.switch_delay_us);
    for (auto& st : stations_) {
      const auto i = static_cast<std::size_t>(st.station_id);
      if (st.transmitting) {
        tx_time_[i].reset();
        continue;
      }
      const int primary = bss_channels(st).front();
      const int desired = st.policy == Policy::Npca
                              ? npca_switch_decision(st, channels_, bss_channels(st), now)
                              : primary;
      TimeNs delay = 0;
      if (desired != st.operating_channel) {
        freeze(st, now, cfg_);
        st.operating_channel = desired;
        st.return_pending = false;
        delay = switch_delay;
      }
      const auto d = sense_and_backoff_step(st, channels_[static_cast<std::size_t>(st.operating_channel)],
                                            now, cfg_, delay);
      tx_time_[i] = d.tx_time;
      if (d.kind == BackoffDecision::Kind::Transmit) starters.push_back(st.station_id);
    }
    return starters;
  }

  void start_transmissions(const std::vector<int>& starters, TimeNs now) {
    std::vector<StartRequest> requests;
    for (int id : starters) {
      const auto& st = stations_[static_cast<std::size_t>(id)];
      auto chans = legacy_bonding_decision(st, channels_, bss_channels(st), now);
      if (chans.empty()) throw std::logic_error("backoff expired on a busy channel");
      requests.push_back(StartRequest{id, std::move(chans)});
    }

    // OBSS onsets are drawn against the pre-start channel state, so an onset
    // coinciding with an in-BSS start collides with it.
    std::vector<char> onset_flags(channels_.size(), 0);
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      if (obss_advance(obss_[c], channels_[c], now, obss_rng_[c])) {
        onset_flags[c] = 1;
        ++report_.channels[c].obss_bursts;
        if (opts_.trace) {
          nlohmann::json line = {{"time_us", ns_to_us(now)},
                                 {"kind", "obss"},
                                 {"station", nullptr},
                                 {"channels", {static_cast<int>(c)}},
                                 {"outcome", "busy"},
                                 {"end_us", ns_to_us(channels_[c].obss_busy_until)}};
          *opts_.trace << line.dump() << '\n';
        }
      }
    }
    const std::vector<bool> onset(onset_flags.begin(), onset_flags.end());
    auto resolved = resolve_slot_transmissions(requests, onset, cfg_);
    for (auto& r : resolved) {
      auto& st = stations_[static_cast<std::size_t>(r.station_id)];
      Transmission t;
      t.bss_id = st.bss_id;
      t.start = now;
      t.end = now + r.busy_duration;
      t.access_delay = now - st.pending_since;
      for (std::size_t k = 0; k < r.channels.size(); ++k) {
        channels_[static_cast<std::size_t>(r.channels[k])].active_tx.push_back(
            ActiveTx{next_tx_id_, r.station_id, st.bss_id, t.end, r.delivered[k]});
      }
      ++next_tx_id_;
      st.transmitting = true;
      st.anchor.reset();
      t.tx = std::move(r);
      in_flight_.push_back(std::move(t));
    }
    // Channels that just went busy drop their pending onset.
    for (std::size_t c = 0; c < channels_.size(); ++c)
      if (channels_[c].sensed_busy(now)) obss_[c].next_onset.reset();
  }

  TimeNs next_event(TimeNs now) const {
    TimeNs next = kNever;
    for (const auto& t : in_flight_) next = std::min(next, t.end);
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      if (channels_[c].obss_busy(now)) next = std::min(next, channels_[c].obss_busy_until);
      if (obss_[c].next_onset) next = std::min(next, *obss_[c].next_onset);
    }
    for (const auto& t : tx_time_)
      if (t) next = std::min(next, *t);
    if (next <= now) throw std::logic_error("simulation clock did not advance");
    return next;
  }

  void account(TimeNs from, TimeNs to) {
    const TimeNs len = to - from;
    if (len <= 0) return;
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      const auto& ch = channels_[c];
      auto& m = report_.channels[c];
      if (!ch.active_tx.empty()) {
        const bool lost = std::any_of(ch.active_tx.begin(), ch.active_tx.end(),
                                      [](const ActiveTx& a) { return !a.delivered; });
        (lost ? m.collision_ns : m.success_ns) += len;
      } else if (ch.obss_busy(from)) {
        m.obss_ns += len;
      } else {
        m.idle_ns += len;
      }
      if (ch.obss_busy(from)) m.obss_active_ns += std::min(len, ch.obss_busy_until - from);
    }
  }

  void finish() {
    const double duration_us = report_.duration_us();
    for (auto& b : report_.bss) {
      b.throughput_mbps = duration_us > 0 ? static_cast<double>(b.packets_delivered) * cfg_.payload_bits() / duration_us : 0.0;
      b.collision_rate = b.attempts ? static_cast<double>(b.collisions) / static_cast<double>(b.attempts) : 0.0;
    }
    std::vector<std::vector<double>> per_bss(report_.bss.size());
    for (const auto& s : report_.stations) {
      auto& v = per_bss[static_cast<std::size_t>(s.bss_id)];
      v.insert(v.end(), s.access_delay_us.begin(), s.access_delay_us.end());
    }
    for (std::size_t b = 0; b < report_.bss.size(); ++b) report_.bss[b].access_delay = summarize(std::move(per_bss[b]));
  }

  const WorldConfig& world_;
  PhyMacConfig cfg_;
  RunOptions opts_;
  std::vector<StationState> stations_;
  std::vector<RngStream> station_rng_;
  std::vector<std::optional<TimeNs>> tx_time_;
  std::vector<ChannelState> channels_;
  std::vector<ObssProcess> obss_;
  std::vector<RngStream> obss_rng_;
  std::vector<bool> busy_;
  std::vector<Transmission> in_flight_;
  int next_tx_id_ = 0;
  MetricsReport report_;
};

}  // namespace

MetricsReport run_simulation(const WorldConfig& world, TimeNs duration, std::uint64_t seed,
                             const RunOptions& opts) {
  Engine engine(world, seed, opts);
  return engine.run(duration);
}

}  // namespace npca::sim
