#include "npca/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "npca/analytic.hpp"
#include "npca/report.hpp"
#include "npca/scenarios.hpp"
#include "npca/simcore.hpp"

#ifndef NPCA_SIM_VERSION
#define NPCA_SIM_VERSION "dev"
#endif

namespace npca {

namespace {

namespace fs = std::filesystem;

constexpr int kManifestVersion = 1;

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int seeds = 0;
  double duration_s = 0;
  std::string out;
  std::string csv;
  std::string trace;
  int parallelism = 1;
  double tolerance = 0.10;
  std::string policy;
  std::string target;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* seeds_opt = nullptr;
  CLI::Option* duration_opt = nullptr;
  CLI::Option* policy_opt = nullptr;
};

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> resolve_seed(const Options& o) {
  if (o.seed_opt && o.seed_opt->count()) return o.seed;
  if (const char* env = std::getenv("NPCA_SIM_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const std::string s(env);
      const auto v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError(std::string("NPCA_SIM_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return std::nullopt;
}

bool is_manifest(const nlohmann::json& j) { return j.is_object() && j.contains("manifest_version"); }

WorldConfig resolve_world(const Options& o) {
  WorldConfig w;
  if (!o.config.empty()) {
    const nlohmann::json doc = read_json_file(o.config);
    try {
      if (is_manifest(doc)) {
        if (!doc.contains("config")) throw ConfigError("manifest has no 'config' section");
        w = world_from_json(doc.at("config"));
      } else {
        w = world_from_json(doc);
      }
    } catch (const ConfigError& e) {
      throw ConfigError("'" + o.config + "': " + e.what());
    }
  }
  w = with_overrides(w, o.sets);
  if (auto s = resolve_seed(o)) w.sim.seed = *s;
  if (o.duration_opt && o.duration_opt->count()) {
    w.sim.duration_s = o.duration_s;
    w.validate();
  }
  return w;
}

std::optional<Policy> resolve_policy(const Options& o) {
  if (!o.policy_opt || !o.policy_opt->count()) return std::nullopt;
  return policy_from_string(o.policy);
}

ScenarioSpec resolve_spec(const Options& o) {
  ScenarioSpec spec;
  const bool from_file = fs::exists(o.target) && fs::is_regular_file(o.target);
  if (from_file) {
    if (resolve_policy(o)) throw UsageError("--policy only applies to presets");
    const nlohmann::json doc = read_json_file(o.target);
    try {
      if (is_manifest(doc)) {
        if (!doc.contains("scenario")) throw ConfigError("manifest has no 'scenario' section");
        spec = scenario_from_json(doc.at("scenario"));
      } else {
        spec = scenario_from_json(doc);
      }
    } catch (const ConfigError& e) {
      throw ConfigError("'" + o.target + "': " + e.what());
    }
  } else {
    spec = preset_by_name(o.target, resolve_policy(o));
  }
  spec.base = with_overrides(spec.base, o.sets);
  const auto seed = resolve_seed(o);
  const bool count_given = o.seeds_opt && o.seeds_opt->count();
  if (count_given && o.seeds < 1) throw UsageError("--seeds must be >= 1");
  if (seed || count_given) {
    const std::uint64_t first = seed.value_or(1);
    const std::size_t n = count_given ? static_cast<std::size_t>(o.seeds) : spec.seeds.size();
    spec.seeds.clear();
    for (std::size_t i = 0; i < n; ++i) spec.seeds.push_back(first + i);
  }
  if (o.duration_opt && o.duration_opt->count()) spec.duration_s = o.duration_s;
  spec.validate();
  return spec;
}

nlohmann::json manifest_base(const std::string& command) {
  return {{"manifest_version", kManifestVersion}, {"tool", "npca-sim"}, {"version", NPCA_SIM_VERSION},
          {"command", command}};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f.flush()) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string num(double v, int prec = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

int cmd_analytic(const Options& o, std::ostream& out) {
  const WorldConfig w = resolve_world(o);
  const auto& lead = w.bss.front();
  int n = 0;
  for (const auto& b : w.bss)
    if (b.channels.front() == lead.channels.front()) n += b.stations;
  if (n < 1) throw ConfigError("analytic: the first BSS's primary has no stations");

  const auto single = analytic::single_channel(n, w.phy);
  const auto br = analytic::npca_from_single(single.mbps, w.channels.primary_idle_prob, w.channels.nonprimary_idle_probs);
  const auto delay = analytic::access_delay(n, w.phy);

  std::vector<std::pair<std::string, double>> rows = {
      {"n", n},
      {"tau", single.bianchi.tau},
      {"p", single.bianchi.p_cond},
      {"P_tr", single.p_tr},
      {"P_s", single.p_s},
      {"S_mbps", single.mbps},
      {"S_leg_mbps", br.s_legacy},
      {"S_npca_mbps", br.s_npca},
      {"S_leg_over_S", single.mbps > 0 ? br.s_legacy / single.mbps : 0.0},
      {"S_npca_over_S", single.mbps > 0 ? br.s_npca / single.mbps : 0.0},
  };
  for (std::size_t i = 0; i < br.per_channel_npca.size(); ++i)
    rows.emplace_back(i == 0 ? std::string("S_npca_pr_mbps") : "S_npca_" + std::to_string(i) + "_mbps",
                      br.per_channel_npca[i]);
  for (std::size_t i = 0; i < br.f_coeffs.size(); ++i) rows.emplace_back("F" + std::to_string(i + 1), br.f_coeffs[i]);
  rows.emplace_back("delay_us", delay.expected_access_delay_us);
  const char* terms[] = {"delay_backoff_us", "delay_other_us", "delay_collision_us", "delay_own_tx_us"};
  for (int k = 0; k < 4; ++k) rows.emplace_back(terms[k], delay.components[k]);

  for (const auto& [k, v] : rows) out << std::left << std::setw(20) << k << num(v) << '\n';
  if (!o.csv.empty()) {
    std::string text = "quantity,value\n";
    for (const auto& [k, v] : rows) text += k + "," + num(v) + "\n";
    write_text(o.csv, text);
  }
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const WorldConfig w = resolve_world(o);
  std::ofstream trace;
  sim::RunOptions ro;
  if (!o.trace.empty()) {
    trace.open(o.trace);
    if (!trace) throw std::runtime_error("cannot open '" + o.trace + "' for writing");
    ro.trace = &trace;
  }
  const MetricsReport r = sim::run_simulation(w, us_to_ns(w.sim.duration_s * 1e6), w.sim.seed, ro);
  const nlohmann::json report = to_json(r);
  out << report.dump(2) << '\n';
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    write_text(dir / "report.json", report.dump(2) + "\n");
    nlohmann::json m = manifest_base("simulate");
    m["config"] = to_json(w);
    m["seed"] = w.sim.seed;
    m["config_hash"] = config_hash(w);
    m["outputs"] = {"report.json"};
    write_text(dir / "manifest.json", m.dump(2) + "\n");
  }
  return kExitOk;
}

int default_parallelism() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// Runs the scenario, streaming CSV rows to `csv_path` as points complete.
ScenarioResult run_with_csv(const ScenarioSpec& spec, const Options& o, const fs::path& csv_path) {
  if (csv_path.has_parent_path()) fs::create_directories(csv_path.parent_path());
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open '" + csv_path.string() + "' for writing");
  csv << csv_header() << '\n' << std::flush;
  RunSettings rs;
  rs.parallelism = o.parallelism;
  rs.on_point = [&](const ScenarioPoint& p) {
    for (const auto& row : csv_rows(p, spec.sweep.param, spec.base.bss.size())) csv << row << '\n';
    csv.flush();
  };
  ScenarioResult result = run_scenario(spec, rs);
  if (!csv) throw std::runtime_error("write to '" + csv_path.string() + "' failed");
  return result;
}

nlohmann::json sweep_manifest(const std::string& command, const ScenarioResult& result,
                              const std::vector<std::string>& outputs) {
  nlohmann::json m = manifest_base(command);
  m["scenario"] = to_json(result.spec);
  m["seeds"] = result.spec.seeds;
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : result.points)
    points.push_back({{"value", p.value}, {"variant", p.variant}, {"config_hash", p.config_hash}});
  m["points"] = points;
  m["config_hash"] = config_hash(to_json(result.spec));
  m["outputs"] = outputs;
  return m;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const ScenarioSpec spec = resolve_spec(o);
  const fs::path dir(o.out.empty() ? "." : o.out);
  const std::string csv_name = spec.name + ".csv";
  const ScenarioResult result = run_with_csv(spec, o, dir / csv_name);
  write_text(dir / (spec.name + ".manifest.json"), sweep_manifest("sweep", result, {csv_name}).dump(2) + "\n");
  print_summary(result, out);
  out << "wrote " << (dir / csv_name).string() << '\n';
  return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const ScenarioSpec spec = resolve_spec(o);
  if (!(o.tolerance > 0)) throw UsageError("--tolerance must be > 0");
  ScenarioResult result;
  std::vector<std::string> outputs;
  if (o.out.empty()) {
    RunSettings rs;
    rs.parallelism = o.parallelism;
    result = run_scenario(spec, rs);
  } else {
    result = run_with_csv(spec, o, fs::path(o.out) / (spec.name + ".csv"));
    outputs.push_back(spec.name + ".csv");
  }
  const auto verdicts = validate(result, Tolerances{o.tolerance});
  print_verdicts(verdicts, out);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    write_text(dir / (spec.name + ".verdicts.json"), to_json(verdicts).dump(2) + "\n");
    outputs.push_back(spec.name + ".verdicts.json");
    nlohmann::json m = sweep_manifest("validate", result, outputs);
    m["tolerance"] = o.tolerance;
    write_text(dir / (spec.name + ".manifest.json"), m.dump(2) + "\n");
  }
  const bool ok = all_pass(verdicts);
  out << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kExitOk : kExitValidationFailed;
}

int cmd_preset(const Options& o, std::ostream& out) {
  const ScenarioSpec spec = preset_by_name(o.target, resolve_policy(o));
  const std::string text = to_json(spec).dump(2) + "\n";
  if (o.out.empty())
    out << text;
  else
    write_text(o.out, text);
  return kExitOk;
}

void add_config_opts(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "Config file (JSON); every field optional");
  app->add_option("--set", o.sets, "Override a config value, dotted.key=value (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
}

void add_run_opts(CLI::App* app, Options& o) {
  o.seed_opt = app->add_option("--seed", o.seed, "Master seed (falls back to NPCA_SIM_SEED)");
  o.duration_opt = app->add_option("--duration-s", o.duration_s, "Simulated seconds per run");
}

void add_sweep_opts(CLI::App* app, Options& o) {
  app->add_option("target", o.target, "Preset name or scenario/manifest file")->required();
  app->add_option("--set", o.sets, "Override a base-world value, dotted.key=value (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  add_run_opts(app, o);
  o.seeds_opt = app->add_option("--seeds", o.seeds, "Number of seeds per point, starting at --seed");
  o.policy_opt = app->add_option("--policy", o.policy, "BSS1 policy for two-bss (legacy|npca)");
  app->add_option("--parallelism", o.parallelism, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-channel CSMA/CA simulator and analytic model for legacy and NPCA access", "npca-sim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NPCA_SIM_VERSION);

  Options oa, os, ow, ov, op;
  ow.parallelism = ov.parallelism = default_parallelism();

  auto* analytic = app.add_subcommand("analytic", "Print closed-form throughput and delay for a config");
  add_config_opts(analytic, oa);
  analytic->add_option("--csv", oa.csv, "Also write the table as CSV");

  auto* simulate = app.add_subcommand("simulate", "Run one simulation and print its report");
  add_config_opts(simulate, os);
  add_run_opts(simulate, os);
  simulate->add_option("--out", os.out, "Directory for report.json and manifest.json");
  simulate->add_option("--trace", os.trace, "Write a line-delimited JSON event trace");

  auto* sweep = app.add_subcommand("sweep", "Run a preset or scenario file and write CSV plot data");
  add_sweep_opts(sweep, ow);
  sweep->add_option("--out", ow.out, "Output directory (default: current directory)");

  auto* validate_cmd = app.add_subcommand("validate", "Run a preset and check it against the model");
  add_sweep_opts(validate_cmd, ov);
  validate_cmd->add_option("--tolerance", ov.tolerance, "Relative throughput tolerance (default 0.10)");
  validate_cmd->add_option("--out", ov.out, "Also write CSV, verdicts and manifest here");

  auto* preset = app.add_subcommand("preset", "Print a preset's scenario spec for editing");
  preset->add_option("name", op.target, "single-bss-occupancy | two-bss | delay-analysis")->required();
  op.policy_opt = preset->add_option("--policy", op.policy, "BSS1 policy for two-bss (legacy|npca)");
  preset->add_option("--out", op.out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    if (app.get_subcommands().empty()) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    }
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*analytic) return cmd_analytic(oa, out);
    if (*simulate) return cmd_simulate(os, out);
    if (*sweep) return cmd_sweep(ow, out);
    if (*validate_cmd) return cmd_validate(ov, out);
    if (*preset) return cmd_preset(op, out);
  } catch (const std::exception& e) {
    err << "npca-sim: error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace npca
