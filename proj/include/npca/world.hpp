// Simulated world description: PHY constants, channels, BSS topology and run
// options, plus the structured config file format and dotted-key overrides.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "npca/params.hpp"

namespace npca {

enum class Policy { Legacy, Npca };

std::string_view to_string(Policy p);
Policy policy_from_string(std::string_view s);

struct BssConfig {
  std::string name;
  /// Indices into the world's channels; the first entry is this BSS's primary.
  std::vector<int> channels{0};
  int stations = 10;
  Policy policy = Policy::Legacy;

  bool operator==(const BssConfig&) const = default;
};

struct SimOptions {
  double duration_s = 30.0;
  std::uint64_t seed = 1;
  /// OBSS burst length; defaults to the success busy period rounded up to slots.
  std::optional<double> obss_burst_us;
  double switch_delay_us = 0.0;

  bool operator==(const SimOptions&) const = default;
};

struct WorldConfig {
  PhyMacConfig phy;
  ChannelSetup channels;
  std::vector<BssConfig> bss{BssConfig{"bss1", {0}, 10, Policy::Legacy}};
  SimOptions sim;

  /// Throws ConfigError on an invalid topology (unknown or repeated channel, empty BSS list ...).
  void validate() const;
  /// OBSS burst length in ns after applying the default.
  TimeNs obss_burst_ns() const;
  int total_stations() const;

  bool operator==(const WorldConfig&) const = default;
};

nlohmann::json to_json(const WorldConfig& w);
WorldConfig world_from_json(const nlohmann::json& j);

/// Reads a config file. Every field is optional; unknown keys are an error.
WorldConfig load_world(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Applies one `dotted.key=value` override to a fully resolved document.
/// Array elements are addressed by index, or `*` for every element. The key
/// must already exist. The value is parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);
void apply_override(nlohmann::json& doc, std::string_view key, const nlohmann::json& value);

WorldConfig with_overrides(const WorldConfig& base, const std::vector<std::string>& assignments);

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);
std::string config_hash(const WorldConfig& w);

}  // namespace npca
