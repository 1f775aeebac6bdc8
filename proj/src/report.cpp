#include "npca/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace npca {

namespace {

std::string fixed6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(seeds[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  if (s == "nan") return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

}  // namespace

const std::string& csv_header() {
  static const std::string h =
      "sweep_param,value,policy,throughput_mean,throughput_std,delay_mean_us,delay_std_us,"
      "analytic_s_leg,analytic_s_npca,analytic_delay_us,seeds,config_hash";
  return h;
}

std::vector<std::string> csv_rows(const ScenarioPoint& point, const std::string& sweep_param,
                                  std::size_t bss_count) {
  std::vector<std::string> rows;
  for (const auto& b : point.bss) {
    const std::string policy = bss_count > 1 ? point.variant + "/" + b.bss_name : point.variant;
    std::string row = sweep_param;
    for (const std::string& f :
         {fixed6(point.value), policy, fixed6(b.throughput_mean), fixed6(b.throughput_std), fixed6(b.delay_mean_us),
          fixed6(b.delay_std_us), fixed6(b.analytic_s_leg), fixed6(b.analytic_s_npca), fixed6(b.analytic_delay_us),
          join_seeds(point.seeds), point.config_hash})
      row += "," + f;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(const ScenarioResult& result, std::ostream& out) {
  out << csv_header() << '\n';
  for (const auto& p : result.points)
    for (const auto& r : csv_rows(p, result.spec.sweep.param, result.spec.base.bss.size())) out << r << '\n';
}

void emit_csv(const ScenarioResult& result, const std::filesystem::path& path) {
  if (result.points.empty()) throw std::runtime_error("'" + path.string() + "': result has no points");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_csv(result, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::vector<CsvRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw std::runtime_error("csv: unexpected header");
  std::vector<CsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 12) throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected 12 fields");
    CsvRow r;
    r.sweep_param = f[0];
    r.value = parse_double(f[1], line_no);
    r.policy = f[2];
    r.throughput_mean = parse_double(f[3], line_no);
    r.throughput_std = parse_double(f[4], line_no);
    r.delay_mean_us = parse_double(f[5], line_no);
    r.delay_std_us = parse_double(f[6], line_no);
    r.analytic_s_leg = parse_double(f[7], line_no);
    r.analytic_s_npca = parse_double(f[8], line_no);
    r.analytic_delay_us = parse_double(f[9], line_no);
    if (!f[10].empty())
      for (const auto& s : split(f[10], ';')) r.seeds.push_back(std::stoull(s));
    r.config_hash = f[11];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass: return "PASS";
    case VerdictStatus::Fail: return "FAIL";
    case VerdictStatus::Skip: return "SKIP";
  }
  return "?";
}

std::vector<Verdict> validate(const ScenarioResult& result, const Tolerances& tol) {
  std::vector<Verdict> out;
  const auto& spec = result.spec;
  for (const auto& p : result.points) {
    for (const auto& b : p.bss) {
      Verdict v;
      v.check = "throughput";
      v.value = p.value;
      v.variant = p.variant;
      v.bss = b.bss_name;
      v.simulated = b.throughput_mean;
      v.reference = b.policy == Policy::Npca ? b.analytic_s_npca : b.analytic_s_leg;
      if (!p.analytic_applicable) {
        v.status = VerdictStatus::Skip;
        v.note = "model assumes an always-idle primary shared by legacy stations only";
      } else if (!(v.reference > 0) || std::isnan(v.reference)) {
        v.status = VerdictStatus::Skip;
        v.note = "no analytic reference";
      } else {
        v.ratio = v.simulated / v.reference;
        v.status = std::fabs(v.simulated - v.reference) / v.reference <= tol.throughput ? VerdictStatus::Pass
                                                                                        : VerdictStatus::Fail;
      }
      out.push_back(std::move(v));
    }
  }

  // Dominance: pair the all-legacy variant with every other variant at the same value.
  const std::size_t n_var = spec.variants.size();
  std::size_t legacy_idx = n_var;
  for (std::size_t i = 0; i < n_var; ++i) {
    bool all_legacy = true;
    for (Policy pol : spec.variants[i].policies) all_legacy = all_legacy && pol == Policy::Legacy;
    if (all_legacy) {
      legacy_idx = i;
      break;
    }
  }
  if (legacy_idx == n_var || n_var < 2) return out;
  for (std::size_t base = 0; base + n_var <= result.points.size(); base += n_var) {
    const auto& lp = result.points[base + legacy_idx];
    for (std::size_t i = 0; i < n_var; ++i) {
      if (i == legacy_idx) continue;
      const auto& np = result.points[base + i];
      for (std::size_t b = 0; b < np.bss.size() && b < lp.bss.size(); ++b) {
        if (np.bss[b].policy != Policy::Npca) continue;
        Verdict v;
        v.check = "dominance";
        v.value = np.value;
        v.variant = np.variant;
        v.bss = np.bss[b].bss_name;
        v.simulated = np.bss[b].throughput_mean;
        v.reference = lp.bss[b].throughput_mean;
        v.ratio = v.reference > 0 ? v.simulated / v.reference : std::nan("");
        v.status = v.simulated >= v.reference ? VerdictStatus::Pass : VerdictStatus::Fail;
        out.push_back(std::move(v));
      }
    }
  }
  return out;
}

bool all_pass(const std::vector<Verdict>& verdicts) {
  for (const auto& v : verdicts)
    if (v.status == VerdictStatus::Fail) return false;
  return true;
}

nlohmann::json to_json(const std::vector<Verdict>& verdicts) {
  nlohmann::json arr = nlohmann::json::array();
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  for (const auto& v : verdicts)
    arr.push_back({{"check", v.check},
                   {"value", v.value},
                   {"variant", v.variant},
                   {"bss", v.bss},
                   {"status", std::string(to_string(v.status))},
                   {"simulated", num(v.simulated)},
                   {"reference", num(v.reference)},
                   {"ratio", num(v.ratio)},
                   {"note", v.note}});
  return {{"verdicts", arr}, {"pass", all_pass(verdicts)}};
}

void print_verdicts(const std::vector<Verdict>& verdicts, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %10s %-8s %-6s %-4s %12s %12s %8s\n", "check", "value", "variant", "bss",
                "res", "sim", "ref", "ratio");
  out << buf;
  std::size_t pass = 0, fail = 0, skip = 0;
  for (const auto& v : verdicts) {
    std::snprintf(buf, sizeof buf, "%-10s %10.4f %-8s %-6s %-4s %12.4f %12.4f %8.4f", v.check.c_str(), v.value,
                  v.variant.c_str(), v.bss.c_str(), std::string(to_string(v.status)).c_str(), v.simulated,
                  v.reference, v.ratio);
    out << buf;
    if (!v.note.empty()) out << "  (" << v.note << ")";
    out << '\n';
    (v.status == VerdictStatus::Pass ? pass : v.status == VerdictStatus::Fail ? fail : skip)++;
  }
  out << pass << " pass, " << fail << " fail, " << skip << " skip\n";
}

void print_summary(const ScenarioResult& result, std::ostream& out) {
  char buf[256];
  out << "scenario " << result.spec.name << " (" << result.spec.seeds.size() << " seeds, "
      << result.spec.duration_s << " s)\n";
  std::snprintf(buf, sizeof buf, "%-28s %10s %-8s %-6s %12s %10s %12s %12s\n", "param", "value", "variant", "bss",
                "thr_mbps", "thr_std", "delay_us", "model_mbps");
  out << buf;
  for (const auto& p : result.points)
    for (const auto& b : p.bss) {
      const double model = b.policy == Policy::Npca ? b.analytic_s_npca : b.analytic_s_leg;
      std::snprintf(buf, sizeof buf, "%-28s %10.4f %-8s %-6s %12.4f %10.4f %12.2f %12.4f\n",
                    result.spec.sweep.param.c_str(), p.value, p.variant.c_str(), b.bss_name.c_str(),
                    b.throughput_mean, b.throughput_std, b.delay_mean_us, model);
      out << buf;
    }
}

}  // namespace npca
