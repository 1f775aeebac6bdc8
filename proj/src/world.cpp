#include "npca/world.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace npca {

std::string_view to_string(Policy p) { return p == Policy::Npca ? "npca" : "legacy"; }

Policy policy_from_string(std::string_view s) {
  if (s == "legacy") return Policy::Legacy;
  if (s == "npca") return Policy::Npca;
  throw ConfigError("unknown policy '" + std::string(s) + "' (expected legacy or npca)");
}

void WorldConfig::validate() const {
  channels.validate();
  if (bss.empty()) throw ConfigError("bss: at least one BSS is required");
  const int n_channels = static_cast<int>(channels.channel_count());
  std::set<std::string> names;
  for (const auto& b : bss) {
    if (!names.insert(b.name).second) throw ConfigError("bss: duplicate name '" + b.name + "'");
    if (b.stations < 0) throw ConfigError("bss '" + b.name + "': stations must be >= 0");
    if (b.channels.empty()) throw ConfigError("bss '" + b.name + "': channel list is empty");
    std::set<int> seen;
    for (int c : b.channels) {
      if (c < 0 || c >= n_channels)
        throw ConfigError("bss '" + b.name + "' references unknown channel " + std::to_string(c));
      if (!seen.insert(c).second)
        throw ConfigError("bss '" + b.name + "' lists channel " + std::to_string(c) + " twice");
    }
  }
  if (!(sim.duration_s >= 0) || !std::isfinite(sim.duration_s))
    throw ConfigError("sim.duration_s must be >= 0");
  if (sim.obss_burst_us && !(*sim.obss_burst_us > 0)) throw ConfigError("sim.obss_burst_us must be > 0");
  if (!(sim.switch_delay_us >= 0)) throw ConfigError("sim.switch_delay_us must be >= 0");
}

TimeNs WorldConfig::obss_burst_ns() const {
  if (sim.obss_burst_us) return us_to_ns(*sim.obss_burst_us);
  const TimeNs ts = success_busy_ns(phy) + phy.difs();
  const TimeNs slot = phy.slot();
  return (ts + slot - 1) / slot * slot;
}

int WorldConfig::total_stations() const {
  int n = 0;
  for (const auto& b : bss) n += b.stations;
  return n;
}

nlohmann::json to_json(const WorldConfig& w) {
  nlohmann::json bss = nlohmann::json::array();
  for (const auto& b : w.bss)
    bss.push_back({{"name", b.name},
                   {"channels", b.channels},
                   {"stations", b.stations},
                   {"policy", std::string(to_string(b.policy))}});
  nlohmann::json sim = {{"duration_s", w.sim.duration_s},
                        {"seed", w.sim.seed},
                        {"obss_burst_us", nullptr},
                        {"switch_delay_us", w.sim.switch_delay_us}};
  if (w.sim.obss_burst_us) sim["obss_burst_us"] = *w.sim.obss_burst_us;
  return {{"phy", to_json(w.phy)}, {"channels", to_json(w.channels)}, {"bss", bss}, {"sim", sim}};
}

namespace {

template <typename T>
T field(const nlohmann::json& j, std::string_view key, T fallback, std::string_view section) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(section) + "." + std::string(key) + ": wrong type");
  }
}

BssConfig bss_from_json(const nlohmann::json& j, std::size_t index) {
  static constexpr std::string_view kKeys[] = {"name", "channels", "stations", "policy"};
  const std::string section = "bss[" + std::to_string(index) + "]";
  require_known_keys(j, kKeys, section);
  BssConfig b;
  b.name = field<std::string>(j, "name", "bss" + std::to_string(index + 1), section);
  b.channels = field<std::vector<int>>(j, "channels", b.channels, section);
  b.stations = field<int>(j, "stations", b.stations, section);
  b.policy = policy_from_string(field<std::string>(j, "policy", "legacy", section));
  return b;
}

SimOptions sim_from_json(const nlohmann::json& j) {
  static constexpr std::string_view kKeys[] = {"duration_s", "seed", "obss_burst_us", "switch_delay_us"};
  require_known_keys(j, kKeys, "sim");
  SimOptions s;
  s.duration_s = field<double>(j, "duration_s", s.duration_s, "sim");
  s.seed = field<std::uint64_t>(j, "seed", s.seed, "sim");
  if (auto it = j.find("obss_burst_us"); it != j.end() && !it->is_null())
    s.obss_burst_us = field<double>(j, "obss_burst_us", 0.0, "sim");
  s.switch_delay_us = field<double>(j, "switch_delay_us", s.switch_delay_us, "sim");
  return s;
}

}  // namespace

WorldConfig world_from_json(const nlohmann::json& j) {
  static constexpr std::string_view kKeys[] = {"phy", "channels", "bss", "sim"};
  require_known_keys(j, kKeys, "config");
  WorldConfig w;
  if (j.contains("phy")) w.phy = phy_from_json(j.at("phy"));
  if (j.contains("channels")) w.channels = channels_from_json(j.at("channels"));
  if (j.contains("bss")) {
    const auto& arr = j.at("bss");
    if (!arr.is_array()) throw ConfigError("bss: expected a list");
    w.bss.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) w.bss.push_back(bss_from_json(arr[i], i));
  }
  if (j.contains("sim")) w.sim = sim_from_json(j.at("sim"));
  w.validate();
  return w;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

WorldConfig load_world(const std::filesystem::path& path) {
  try {
    return world_from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.find(path.string()) != std::string::npos) throw;
    throw ConfigError("'" + path.string() + "': " + msg);
  }
}

namespace {

std::vector<std::string> split_key(std::string_view key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.emplace_back(key.substr(start, dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  for (const auto& p : parts)
    if (p.empty()) throw ConfigError("malformed override key '" + std::string(key) + "'");
  return parts;
}

void assign_path(nlohmann::json& node, const std::vector<std::string>& parts, std::size_t depth,
                 const nlohmann::json& value, std::string_view key) {
  if (depth == parts.size()) {
    node = value;
    return;
  }
  const std::string& part = parts[depth];
  if (node.is_object()) {
    auto it = node.find(part);
    if (it == node.end()) throw ConfigError("override references unknown key '" + std::string(key) + "'");
    assign_path(*it, parts, depth + 1, value, key);
    return;
  }
  if (node.is_array()) {
    if (part == "*") {
      for (auto& el : node) assign_path(el, parts, depth + 1, value, key);
      return;
    }
    std::size_t idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoul(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("override key '" + std::string(key) + "': '" + part + "' is not an index");
    }
    if (idx >= node.size())
      throw ConfigError("override key '" + std::string(key) + "': index " + part + " out of range");
    assign_path(node[idx], parts, depth + 1, value, key);
    return;
  }
  throw ConfigError("override references unknown key '" + std::string(key) + "'");
}

}  // namespace

void apply_override(nlohmann::json& doc, std::string_view key, const nlohmann::json& value) {
  assign_path(doc, split_key(key), 0, value, key);
}

void apply_override(nlohmann::json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  const std::string_view key = assignment.substr(0, eq);
  const std::string raw(assignment.substr(eq + 1));
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  apply_override(doc, key, value);
}

WorldConfig with_overrides(const WorldConfig& base, const std::vector<std::string>& assignments) {
  if (assignments.empty()) return base;
  nlohmann::json doc = to_json(base);
  std::set<std::string> touched;
  for (const auto& a : assignments) {
    apply_override(doc, a);
    touched.insert(std::string(a.substr(0, a.find('='))));
  }
  // Derived values are recomputed unless the caller set them explicitly.
  for (const char* key : {"difs_us", "eifs_us", "max_backoff_stage"})
    if (!touched.count(std::string("phy.") + key)) doc["phy"].erase(key);
  return world_from_json(doc);
}

std::string config_hash(const nlohmann::json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const WorldConfig& w) { return config_hash(to_json(w)); }

}  // namespace npca
