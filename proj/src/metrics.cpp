#include "npca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace npca {

DelayStats summarize(std::vector<double> samples) {
  DelayStats s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(idx, 1, samples.size()) - 1];
  };
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  s.p50 = rank(0.50);
  s.p95 = rank(0.95);
  s.min = samples.front();
  s.max = samples.back();
  // Guard the invariant min <= mean <= max against summation rounding.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

std::string_view to_string(Outcome o) { return o == Outcome::Success ? "success" : "collision"; }

double ChannelMetrics::fraction(TimeNs part, TimeNs duration) const {
  return duration > 0 ? static_cast<double>(part) / static_cast<double>(duration) : 0.0;
}

double ChannelMetrics::measured_idle_fraction(TimeNs duration) const {
  return duration > 0 ? 1.0 - fraction(obss_active_ns, duration) : 1.0;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json bss = nlohmann::json::array();
  for (const auto& b : r.bss) {
    bss.push_back({{"name", b.name},
                   {"policy", std::string(to_string(b.policy))},
                   {"stations", b.stations},
                   {"throughput_mbps", b.throughput_mbps},
                   {"attempts", b.attempts},
                   {"successes", b.successes},
                   {"collisions", b.collisions},
                   {"packets_delivered", b.packets_delivered},
                   {"collision_rate", b.collision_rate},
                   {"access_delay_us",
                    {{"count", b.access_delay.count},
                     {"mean", b.access_delay.mean},
                     {"p50", b.access_delay.p50},
                     {"p95", b.access_delay.p95},
                     {"min", b.access_delay.min},
                     {"max", b.access_delay.max}}}});
  }
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& c : r.channels) {
    channels.push_back({{"channel", c.channel_id},
                        {"target_idle_prob", c.target_idle_prob},
                        {"measured_idle_fraction", c.measured_idle_fraction(r.duration_ns)},
                        {"obss_bursts", c.obss_bursts},
                        {"utilization",
                         {{"success", c.fraction(c.success_ns, r.duration_ns)},
                          {"collision", c.fraction(c.collision_ns, r.duration_ns)},
                          {"obss", c.fraction(c.obss_ns, r.duration_ns)},
                          {"idle", c.fraction(c.idle_ns, r.duration_ns)}}}});
  }
  return {{"duration_us", r.duration_us()}, {"seed", r.seed}, {"bss", bss}, {"channels", channels}};
}

}  // namespace npca
