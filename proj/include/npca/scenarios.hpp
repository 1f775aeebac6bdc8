// Experiment presets and the sweep engine: a base world, a list of policy
// variants, one swept config key and a seed list.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "npca/metrics.hpp"
#include "npca/world.hpp"

namespace npca {

struct PolicyVariant {
  std::string label;
  std::vector<Policy> policies;  ///< one per BSS, in BSS order

  bool operator==(const PolicyVariant&) const = default;
};

struct SweepAxis {
  std::string param;  ///< dotted config key, e.g. "channels.primary_idle_prob" or "bss.*.stations"
  std::vector<double> values;

  bool operator==(const SweepAxis&) const = default;
};

struct ScenarioSpec {
  std::string name;
  WorldConfig base;
  std::vector<PolicyVariant> variants;
  SweepAxis sweep;
  std::vector<std::uint64_t> seeds;
  double duration_s = 30.0;

  /// Checks the variant shapes, seeds and every swept world. Throws ConfigError.
  void validate() const;
  /// World for one sweep value and variant, seeded with the first seed.
  WorldConfig world_at(double value, const PolicyVariant& variant) const;

  bool operator==(const ScenarioSpec&) const = default;
};

nlohmann::json to_json(const ScenarioSpec& s);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

std::vector<std::uint64_t> default_seeds(std::size_t count = 5);

ScenarioSpec preset_single_bss_occupancy();
ScenarioSpec preset_two_bss(Policy bss1_policy);
ScenarioSpec preset_delay_analysis();

/// "single-bss-occupancy", "two-bss", "delay-analysis".
const std::vector<std::string>& preset_names();
/// `policy` only applies to two-bss (default legacy). Throws ConfigError for an unknown name.
ScenarioSpec preset_by_name(const std::string& name, std::optional<Policy> policy = std::nullopt);

struct BssPointStats {
  std::string bss_name;
  Policy policy = Policy::Legacy;
  int stations = 0;
  double throughput_mean = 0, throughput_std = 0;
  double delay_mean_us = 0, delay_std_us = 0;
  double collision_rate_mean = 0;
  std::vector<double> throughput_per_seed;
  std::vector<double> delay_per_seed;
  // NaN where the model does not apply.
  double analytic_s_leg = 0, analytic_s_npca = 0, analytic_delay_us = 0;
};

struct ScenarioPoint {
  double value = 0;
  std::string variant;
  std::vector<BssPointStats> bss;
  std::vector<double> measured_idle_fraction;  ///< per channel, seed mean
  std::vector<std::uint64_t> seeds;
  std::string config_hash;
  /// Model assumptions hold: primary always idle and every BSS sharing it legacy.
  bool analytic_applicable = false;
};

struct ScenarioResult {
  ScenarioSpec spec;
  std::vector<ScenarioPoint> points;  ///< sweep value major, variant minor
};

/// Error raised by a simulation inside a sweep, with the point in the message.
class ScenarioError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunSettings {
  int parallelism = 1;
  /// Called in point order, as soon as a point and all earlier points are done.
  std::function<void(const ScenarioPoint&)> on_point;
};

double mean_of(const std::vector<double>& v);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_std(const std::vector<double>& v);

/// Analytic attachments for one BSS of a world.
void attach_analytic(const WorldConfig& world, std::size_t bss_index, BssPointStats& out);
bool analytic_applicable(const WorldConfig& world);

ScenarioResult run_scenario(const ScenarioSpec& spec, const RunSettings& settings = {});

}  // namespace npca
