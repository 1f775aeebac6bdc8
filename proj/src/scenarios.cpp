#include "npca/scenarios.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "npca/analytic.hpp"
#include "npca/simcore.hpp"

namespace npca {

namespace {

nlohmann::json sweep_value_json(double v) {
  if (std::isfinite(v) && std::floor(v) == v && std::fabs(v) < 1e15) return static_cast<std::int64_t>(v);
  return v;
}

std::string describe(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

WorldConfig ScenarioSpec::world_at(double value, const PolicyVariant& variant) const {
  WorldConfig w = base;
  if (variant.policies.size() != w.bss.size())
    throw ConfigError("variant '" + variant.label + "' lists " + std::to_string(variant.policies.size()) +
                      " policies for " + std::to_string(w.bss.size()) + " BSS");
  for (std::size_t b = 0; b < w.bss.size(); ++b) w.bss[b].policy = variant.policies[b];
  w.sim.duration_s = duration_s;
  if (!seeds.empty()) w.sim.seed = seeds.front();
  if (sweep.param.empty()) {
    w.validate();
    return w;
  }
  nlohmann::json doc = to_json(w);
  apply_override(doc, sweep.param, sweep_value_json(value));
  return world_from_json(doc);
}

void ScenarioSpec::validate() const {
  if (name.empty()) throw ConfigError("scenario: name is empty");
  if (seeds.empty()) throw ConfigError("scenario '" + name + "': at least one seed is required");
  if (variants.empty()) throw ConfigError("scenario '" + name + "': at least one variant is required");
  if (!(duration_s >= 0) || !std::isfinite(duration_s))
    throw ConfigError("scenario '" + name + "': duration_s must be >= 0");
  if (!sweep.param.empty() && sweep.values.empty())
    throw ConfigError("scenario '" + name + "': sweep '" + sweep.param + "' has no values");
  const std::vector<double> values = sweep.param.empty() ? std::vector<double>{0.0} : sweep.values;
  for (const auto& v : variants) {
    for (double x : values) {
      try {
        (void)world_at(x, v);
      } catch (const ConfigError& e) {
        throw ConfigError("scenario '" + name + "', " + sweep.param + "=" + describe(x) + ": " + e.what());
      }
    }
  }
}

nlohmann::json to_json(const ScenarioSpec& s) {
  nlohmann::json variants = nlohmann::json::array();
  for (const auto& v : s.variants) {
    nlohmann::json pol = nlohmann::json::array();
    for (Policy p : v.policies) pol.push_back(std::string(to_string(p)));
    variants.push_back({{"label", v.label}, {"policies", pol}});
  }
  nlohmann::json values = nlohmann::json::array();
  for (double x : s.sweep.values) values.push_back(sweep_value_json(x));
  return {{"name", s.name},
          {"base", to_json(s.base)},
          {"variants", variants},
          {"sweep", {{"param", s.sweep.param}, {"values", values}}},
          {"seeds", s.seeds},
          {"duration_s", s.duration_s}};
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  static constexpr std::string_view kKeys[] = {"name", "base", "variants", "sweep", "seeds", "duration_s"};
  require_known_keys(j, kKeys, "scenario");
  ScenarioSpec s;
  try {
    s.name = j.value("name", std::string("custom"));
    if (j.contains("base")) s.base = world_from_json(j.at("base"));
    if (j.contains("variants")) {
      for (const auto& v : j.at("variants")) {
        static constexpr std::string_view kVariantKeys[] = {"label", "policies"};
        require_known_keys(v, kVariantKeys, "scenario.variants");
        PolicyVariant pv;
        pv.label = v.at("label").get<std::string>();
        for (const auto& p : v.at("policies")) pv.policies.push_back(policy_from_string(p.get<std::string>()));
        s.variants.push_back(std::move(pv));
      }
    } else {
      PolicyVariant pv;
      for (const auto& b : s.base.bss) pv.policies.push_back(b.policy);
      pv.label = pv.policies.empty() ? "base" : std::string(to_string(pv.policies.front()));
      s.variants.push_back(std::move(pv));
    }
    if (j.contains("sweep")) {
      static constexpr std::string_view kSweepKeys[] = {"param", "values"};
      const auto& sw = j.at("sweep");
      require_known_keys(sw, kSweepKeys, "scenario.sweep");
      s.sweep.param = sw.value("param", std::string());
      s.sweep.values = sw.value("values", std::vector<double>{});
    }
    s.seeds = j.contains("seeds") ? j.at("seeds").get<std::vector<std::uint64_t>>() : default_seeds();
    s.duration_s = j.value("duration_s", s.base.sim.duration_s);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<std::uint64_t> default_seeds(std::size_t count) {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 1; i <= count; ++i) out.push_back(i);
  return out;
}

ScenarioSpec preset_single_bss_occupancy() {
  ScenarioSpec s;
  s.name = "single-bss-occupancy";
  s.base.channels.primary_idle_prob = 0.5;
  s.base.channels.nonprimary_idle_probs = {0.8};
  s.base.bss = {BssConfig{"bss1", {0, 1}, 10, Policy::Legacy}};
  s.variants = {{"legacy", {Policy::Legacy}}, {"npca", {Policy::Npca}}};
  s.sweep = {"channels.primary_idle_prob", {0.1, 0.2, 0.3, 0.4, 0.5}};
  s.seeds = default_seeds();
  return s;
}

namespace {

ScenarioSpec two_bss_base() {
  ScenarioSpec s;
  s.base.channels.primary_idle_prob = 1.0;
  s.base.channels.nonprimary_idle_probs = {1.0};
  s.base.bss = {BssConfig{"bss1", {0, 1}, 10, Policy::Legacy}, BssConfig{"bss2", {0}, 10, Policy::Legacy}};
  s.sweep = {"bss.*.stations", {2, 4, 6, 8, 10}};
  s.seeds = default_seeds();
  return s;
}

}  // namespace

ScenarioSpec preset_two_bss(Policy bss1_policy) {
  ScenarioSpec s = two_bss_base();
  s.name = "two-bss-" + std::string(to_string(bss1_policy));
  s.variants = {{std::string(to_string(bss1_policy)), {bss1_policy, Policy::Legacy}}};
  return s;
}

ScenarioSpec preset_delay_analysis() {
  ScenarioSpec s = two_bss_base();
  s.name = "delay-analysis";
  s.variants = {{"legacy", {Policy::Legacy, Policy::Legacy}}, {"npca", {Policy::Npca, Policy::Legacy}}};
  return s;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"single-bss-occupancy", "two-bss", "delay-analysis"};
  return names;
}

ScenarioSpec preset_by_name(const std::string& name, std::optional<Policy> policy) {
  if (name == "two-bss") return preset_two_bss(policy.value_or(Policy::Legacy));
  if (policy) throw ConfigError("--policy only applies to the two-bss preset");
  if (name == "single-bss-occupancy") return preset_single_bss_occupancy();
  if (name == "delay-analysis") return preset_delay_analysis();
  throw ConfigError("unknown preset '" + name + "'");
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

bool analytic_applicable(const WorldConfig& world) {
  for (const auto& b : world.bss) {
    const int primary = b.channels.front();
    if (world.channels.idle_prob(static_cast<std::size_t>(primary)) != 1.0) return false;
    for (const auto& other : world.bss)
      if (other.channels.front() == primary && other.policy != Policy::Legacy) return false;
  }
  return true;
}

void attach_analytic(const WorldConfig& world, std::size_t bss_index, BssPointStats& out) {
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  const auto& b = world.bss.at(bss_index);
  const int primary = b.channels.front();
  int n_total = 0;
  for (const auto& other : world.bss)
    if (other.channels.front() == primary) n_total += other.stations;
  if (b.stations <= 0 || n_total <= 0) {
    out.analytic_s_leg = out.analytic_s_npca = out.analytic_delay_us = kNan;
    return;
  }
  const double share = analytic::single_channel_throughput(n_total, world.phy) * b.stations / n_total;
  std::vector<double> probs;
  for (std::size_t i = 1; i < b.channels.size(); ++i)
    probs.push_back(world.channels.idle_prob(static_cast<std::size_t>(b.channels[i])));
  const double p_r = world.channels.idle_prob(static_cast<std::size_t>(primary));
  out.analytic_s_leg = analytic::legacy_from_single(share, probs);
  out.analytic_s_npca = analytic::npca_from_single(share, p_r, probs).s_npca;
  out.analytic_delay_us = analytic::access_delay(n_total, world.phy).expected_access_delay_us;
}

ScenarioResult run_scenario(const ScenarioSpec& spec, const RunSettings& settings) {
  spec.validate();
  const std::vector<double> values = spec.sweep.param.empty() ? std::vector<double>{0.0} : spec.sweep.values;
  const std::size_t n_variants = spec.variants.size();
  const std::size_t n_seeds = spec.seeds.size();
  const std::size_t n_points = values.size() * n_variants;
  const std::size_t n_jobs = n_points * n_seeds;

  std::vector<WorldConfig> worlds;
  for (double v : values)
    for (const auto& var : spec.variants) worlds.push_back(spec.world_at(v, var));

  const TimeNs duration = us_to_ns(spec.duration_s * 1e6);
  std::vector<std::optional<MetricsReport>> reports(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);
  std::vector<std::size_t> remaining(n_points, n_seeds);
  std::vector<bool> emitted(n_points, false);
  std::size_t next_emit = 0;
  ScenarioResult result;
  result.spec = spec;
  result.points.resize(n_points);

  std::mutex mu;
  std::atomic<std::size_t> next_job{0};
  bool failed = false;

  auto fold = [&](std::size_t p) {
    const WorldConfig& w = worlds[p];
    ScenarioPoint& pt = result.points[p];
    pt.value = values[p / n_variants];
    pt.variant = spec.variants[p % n_variants].label;
    pt.seeds = spec.seeds;
    pt.config_hash = config_hash(w);
    pt.analytic_applicable = analytic_applicable(w);
    for (std::size_t b = 0; b < w.bss.size(); ++b) {
      BssPointStats st;
      st.bss_name = w.bss[b].name;
      st.policy = w.bss[b].policy;
      st.stations = w.bss[b].stations;
      std::vector<double> coll;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const auto& m = reports[p * n_seeds + s]->bss[b];
        st.throughput_per_seed.push_back(m.throughput_mbps);
        st.delay_per_seed.push_back(m.access_delay.mean);
        coll.push_back(m.collision_rate);
      }
      st.throughput_mean = mean_of(st.throughput_per_seed);
      st.throughput_std = sample_std(st.throughput_per_seed);
      st.delay_mean_us = mean_of(st.delay_per_seed);
      st.delay_std_us = sample_std(st.delay_per_seed);
      st.collision_rate_mean = mean_of(coll);
      attach_analytic(w, b, st);
      pt.bss.push_back(std::move(st));
    }
    const std::size_t n_channels = w.channels.channel_count();
    for (std::size_t c = 0; c < n_channels; ++c) {
      std::vector<double> idle;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const auto& r = *reports[p * n_seeds + s];
        idle.push_back(r.channels[c].measured_idle_fraction(r.duration_ns));
      }
      pt.measured_idle_fraction.push_back(mean_of(idle));
    }
    for (std::size_t s = 0; s < n_seeds; ++s) reports[p * n_seeds + s].reset();
  };

  auto worker = [&] {
    while (true) {
      const std::size_t job = next_job.fetch_add(1);
      if (job >= n_jobs) return;
      const std::size_t p = job / n_seeds;
      const std::uint64_t seed = spec.seeds[job % n_seeds];
      {
        std::lock_guard lock(mu);
        if (failed) return;
      }
      try {
        MetricsReport r = sim::run_simulation(worlds[p], duration, seed);
        std::lock_guard lock(mu);
        reports[job] = std::move(r);
        --remaining[p];
        while (next_emit < n_points && remaining[next_emit] == 0) {
          fold(next_emit);
          if (settings.on_point) settings.on_point(result.points[next_emit]);
          ++next_emit;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        errors[job] = std::current_exception();
        failed = true;
      }
    }
  };

  const int threads = std::max(1, std::min<int>(settings.parallelism, static_cast<int>(n_jobs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t job = 0; job < n_jobs; ++job) {
    if (!errors[job]) continue;
    const std::size_t p = job / n_seeds;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(errors[job]);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw ScenarioError("scenario '" + spec.name + "', " +
                        (spec.sweep.param.empty() ? std::string("point") : spec.sweep.param) + "=" +
                        describe(values[p / n_variants]) + ", variant " + spec.variants[p % n_variants].label +
                        ", seed " + std::to_string(spec.seeds[job % n_seeds]) + ": " + what);
  }
  return result;
}

}  // namespace npca
