// Plot-data CSV, its parser, and simulation-vs-model verdicts.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "npca/scenarios.hpp"

namespace npca {

/// Fixed CSV header, without the trailing newline.
const std::string& csv_header();

/// Rows for one point: one per BSS. With several BSS the policy column is
/// "<variant>/<bss name>", otherwise just the variant label.
std::vector<std::string> csv_rows(const ScenarioPoint& point, const std::string& sweep_param,
                                  std::size_t bss_count);

void write_csv(const ScenarioResult& result, std::ostream& out);
/// Writes header and rows to `path`. Throws std::runtime_error naming the path on I/O failure.
void emit_csv(const ScenarioResult& result, const std::filesystem::path& path);

struct CsvRow {
  std::string sweep_param;
  double value = 0;
  std::string policy;
  double throughput_mean = 0, throughput_std = 0;
  double delay_mean_us = 0, delay_std_us = 0;
  double analytic_s_leg = 0, analytic_s_npca = 0, analytic_delay_us = 0;
  std::vector<std::uint64_t> seeds;
  std::string config_hash;
};

/// Parses a file written by write_csv. Throws std::runtime_error on a bad header or row.
std::vector<CsvRow> parse_csv(std::istream& in);

enum class VerdictStatus { Pass, Fail, Skip };
std::string_view to_string(VerdictStatus s);

struct Verdict {
  std::string check;  ///< "throughput" or "dominance"
  double value = 0;   ///< sweep value
  std::string variant;
  std::string bss;
  VerdictStatus status = VerdictStatus::Skip;
  double simulated = 0;
  double reference = 0;  ///< analytic value, or the legacy-variant throughput for dominance
  double ratio = 0;      ///< simulated / reference
  std::string note;
};

struct Tolerances {
  double throughput = 0.10;  ///< relative
};

/// Throughput check against the analytic attachment where the model applies,
/// and npca >= legacy for every BSS whose policy differs between an
/// all-legacy variant and another variant at the same sweep value.
std::vector<Verdict> validate(const ScenarioResult& result, const Tolerances& tol = {});

/// True when no verdict failed. Skips do not fail.
bool all_pass(const std::vector<Verdict>& verdicts);

nlohmann::json to_json(const std::vector<Verdict>& verdicts);
void print_verdicts(const std::vector<Verdict>& verdicts, std::ostream& out);
void print_summary(const ScenarioResult& result, std::ostream& out);

}  // namespace npca
