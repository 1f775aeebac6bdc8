// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "npca/analytic.hpp"
#include "npca/report.hpp"
#include "npca/scenarios.hpp"
#include "npca/simcore.hpp"

using namespace npca;

namespace {

constexpr TimeNs kSec = 1'000'000'000;

int failures = 0;

void verdict(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("criterion %2d: %s  %s | %s\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

ScenarioResult run(const ScenarioSpec& s) {
  RunSettings rs;
  rs.parallelism = workers();
  return run_scenario(s, rs);
}

// Monotone in the given direction, tolerating one inversion no larger than
// the combined standard deviation of the two neighbouring values.
bool monotone(const std::vector<double>& v, const std::vector<double>& sd, bool increasing, std::string& note) {
  int inversions = 0;
  bool ok = true;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double step = increasing ? v[i + 1] - v[i] : v[i] - v[i + 1];
    if (step >= 0) continue;
    ++inversions;
    const double tol = std::sqrt(sd[i] * sd[i] + sd[i + 1] * sd[i + 1]);
    if (-step > tol) ok = false;
    note += " inversion@" + std::to_string(i) + "(" + fmt("%.4g", -step) + ">" + fmt("%.4g", tol) + "?)";
  }
  return ok && inversions <= 1;
}

void c1_bianchi() {
  bool ok = true;
  std::string detail;
  for (int n : {5, 10, 20}) {
    WorldConfig w;
    w.bss = {BssConfig{"bss1", {0}, n, Policy::Legacy}};
    double sum = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) sum += sim::run_simulation(w, 30 * kSec, seed).bss[0].throughput_mbps;
    const double simulated = sum / 5;
    const double model = analytic::single_channel_throughput(n, w.phy);
    const double err = std::fabs(simulated - model) / model;
    ok = ok && err <= 0.05;
    detail += "n=" + std::to_string(n) + " sim " + fmt("%.3f", simulated) + " model " + fmt("%.3f", model) +
              " err " + fmt("%.2f%%", 100 * err) + "; ";
  }
  verdict(1, ok, "Bianchi agreement within 5%", detail);
}

void c2_dominance() {
  std::mt19937_64 g(20240601);
  std::uniform_real_distribution<double> u(0.05, 0.99);
  int counterexamples = 0;
  double min_gap = 1e300;
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + i % 3;
    std::vector<double> probs;
    for (int k = 0; k < n; ++k) probs.push_back(u(g));
    const double pr = u(g);
    const auto b = analytic::npca_from_single(1.0, pr, probs);
    if (!(b.s_npca > b.s_legacy)) ++counterexamples;
    min_gap = std::min(min_gap, b.s_npca - b.s_legacy);
  }
  verdict(2, counterexamples == 0, "analytic S_npca > S_leg on 1000 random points",
          std::to_string(counterexamples) + " counterexamples, min gap " + fmt("%.3g", min_gap) + " x S");
}

void c3_telescoping() {
  std::mt19937_64 g(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const int n = i % 6;
    std::vector<double> probs;
    for (int k = 0; k < n; ++k) probs.push_back(1.0 - u(g));
    // Enumerate outcomes: k channels when 1..k-1 are idle and k is busy (or all idle).
    double expected = 0, prefix = 1;
    for (int k = 1; k <= n; ++k) {
      expected += k * prefix * (1 - probs[k - 1]);
      prefix *= probs[k - 1];
    }
    expected += (n + 1) * prefix;
    const double closed = analytic::legacy_from_single(1.0, probs);
    worst = std::max(worst, std::fabs(closed - expected) / expected);
  }
  verdict(3, worst <= 1e-9, "legacy enumeration equals closed form", "max rel err " + fmt("%.3g", worst));
}

void c4_occupancy(const ScenarioResult& r) {
  std::vector<double> ratio, ratio_sd;
  bool dominates = true;
  std::string detail;
  for (std::size_t i = 0; i + 1 < r.points.size(); i += 2) {
    const auto& leg = r.points[i].bss[0];
    const auto& np = r.points[i + 1].bss[0];
    const double q = np.throughput_mean / leg.throughput_mean;
    ratio.push_back(q);
    ratio_sd.push_back(q * std::hypot(np.throughput_std / np.throughput_mean, leg.throughput_std / leg.throughput_mean));
    dominates = dominates && np.throughput_mean > leg.throughput_mean;
    detail += "P=" + fmt("%.1f", r.points[i].value) + " " + fmt("%.2f", leg.throughput_mean) + "->" +
              fmt("%.2f", np.throughput_mean) + " (x" + fmt("%.3f", q) + "); ";
  }
  std::string note;
  const bool mono = monotone(ratio, ratio_sd, false, note);
  const bool gain = !ratio.empty() && ratio.front() >= 1.5;
  verdict(4, dominates && mono && gain, "single-BSS occupancy: npca > legacy, ratio nonincreasing, >=50% gain at 0.1",
          detail + (note.empty() ? "" : "monotone:" + note));
}

void c5_two_bss_legacy(const ScenarioResult& r) {
  bool ok = true;
  std::string detail;
  for (const auto& p : r.points) {
    const double q = p.bss[0].throughput_mean / p.bss[1].throughput_mean;
    ok = ok && q >= 1.8 && q <= 2.2;
    detail += "n=" + fmt("%.0f", p.value) + " " + fmt("%.3f", q) + "; ";
  }
  verdict(5, ok, "two legacy BSSs: BSS1/BSS2 in [1.8, 2.2]", detail);
}

void c6_coexistence(const ScenarioResult& leg, const ScenarioResult& np) {
  bool ok = leg.points.size() == np.points.size() && !leg.points.empty();
  std::string detail;
  for (std::size_t i = 0; ok && i < leg.points.size(); ++i) {
    const auto& a = leg.points[i];
    const auto& b = np.points[i];
    ok = ok && a.seeds == b.seeds && a.value == b.value;
    ok = ok && b.bss[0].throughput_mean > a.bss[0].throughput_mean && b.bss[1].throughput_mean > a.bss[1].throughput_mean;
    detail += "n=" + fmt("%.0f", a.value) + " bss1 " + fmt("%.2f", a.bss[0].throughput_mean) + "->" +
              fmt("%.2f", b.bss[0].throughput_mean) + " bss2 " + fmt("%.2f", a.bss[1].throughput_mean) + "->" +
              fmt("%.2f", b.bss[1].throughput_mean) + "; ";
  }
  verdict(6, ok, "NPCA BSS1 raises both BSS throughputs", detail);
}

void c7_delay(const ScenarioResult& r) {
  const auto& pts = r.points;
  bool ok = pts.size() >= 2;
  std::string detail;
  double legacy10 = 0, npca10 = 0;
  for (const auto& p : pts)
    if (p.value == 10) (p.variant == "legacy" ? legacy10 : npca10) = p.bss[0].delay_mean_us;
  const double ratio = legacy10 > 0 ? npca10 / legacy10 : 1e9;
  ok = ok && ratio <= 0.6;
  detail += "n=10 bss1 delay " + fmt("%.1f", legacy10) + " -> " + fmt("%.1f", npca10) + " us (x" + fmt("%.3f", ratio) + ")";
  for (const std::string variant : {"legacy", "npca"}) {
    for (std::size_t b = 0; b < 2; ++b) {
      std::vector<double> v, sd;
      for (const auto& p : pts)
        if (p.variant == variant) {
          v.push_back(p.bss[b].delay_mean_us);
          sd.push_back(p.bss[b].delay_std_us);
        }
      std::string note;
      const bool mono = monotone(v, sd, true, note);
      ok = ok && mono;
      if (!mono || !note.empty()) detail += "; " + variant + "/bss" + std::to_string(b + 1) + note;
    }
  }
  verdict(7, ok, "NPCA BSS1 delay <= 60% of legacy at n=10, delay increasing in n", detail);
}

void c8_calibration() {
  WorldConfig w;
  w.channels.primary_idle_prob = 0.5;
  w.channels.nonprimary_idle_probs = {0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9};
  w.bss = {BssConfig{"quiet", {0}, 0, Policy::Legacy}};
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = sim::run_simulation(w, 30 * kSec, seed);
    for (const auto& c : r.channels)
      worst = std::max(worst, std::fabs(c.measured_idle_fraction(r.duration_ns) - c.target_idle_prob));
  }
  verdict(8, worst <= 0.01, "OBSS idle fraction within 1% of target (30 s)", "max abs error " + fmt("%.5f", worst));
}

std::string csv_of(const ScenarioSpec& s, int parallelism) {
  RunSettings rs;
  rs.parallelism = parallelism;
  std::ostringstream out;
  write_csv(run_scenario(s, rs), out);
  return out.str();
}

void c9_determinism() {
  bool ok = true;
  std::string detail;
  for (auto s : {preset_single_bss_occupancy(), preset_two_bss(Policy::Legacy), preset_two_bss(Policy::Npca),
                 preset_delay_analysis()}) {
    s.duration_s = 3.0;
    const auto a = csv_of(s, 1);
    const auto b = csv_of(s, 1);
    const auto c = csv_of(s, 4);
    const bool same = a == b && a == c;
    ok = ok && same;
    detail += s.name + (same ? " identical; " : " DIFFERS; ");
  }
  verdict(9, ok, "reruns and parallelism give byte-identical CSV", detail);
}

void c10_delay_formula() {
  double worst = 0;
  for (int payload : {100, 500, 1500, 3000}) {
    for (double slot : {9.0, 20.0}) {
      PhyMacConfig::Params p;
      p.payload_bytes = payload;
      p.slot_us = slot;
      const PhyMacConfig cfg(p);
      for (int n = 1; n <= 50; ++n) {
        const double tau = analytic::solve_bianchi(n, cfg).tau;
        const double ptr = 1.0 - std::pow(1.0 - tau, n);
        const double pkt = payload * 8.0 / cfg.data_rate_mbps();
        const double difs = cfg.sifs_us() + 2 * slot;
        // Another station's success or collision holds the medium equally long.
        const double t_star = pkt + cfg.sifs_us() + cfg.ack_us() + difs;
        const double c_star = t_star;
        const double t = pkt + difs;
        const double oracle = (slot + ptr * c_star) / (tau * (1 - ptr)) + (n - 1) * (t_star - c_star) / (1 - tau) +
                              ptr * t_star / (1 - ptr) + t;
        const double got = analytic::access_delay(n, cfg).expected_access_delay_us;
        worst = std::max(worst, std::fabs(got - oracle) / oracle);
      }
    }
  }
  bool increasing = true;
  double prev = -1;
  for (int n = 1; n <= 50; ++n) {
    const double d = analytic::access_delay(n, default_config()).expected_access_delay_us;
    increasing = increasing && d > prev;
    prev = d;
  }
  verdict(10, worst <= 1e-12 && increasing, "delay formula matches four-term oracle, increasing in n",
          "max rel err " + fmt("%.3g", worst) + (increasing ? ", strictly increasing" : ", NOT increasing"));
}

}  // namespace

int main() {
  c1_bianchi();
  c2_dominance();
  c3_telescoping();
  c4_occupancy(run(preset_single_bss_occupancy()));
  const auto legacy = run(preset_two_bss(Policy::Legacy));
  const auto npca = run(preset_two_bss(Policy::Npca));
  c5_two_bss_legacy(legacy);
  c6_coexistence(legacy, npca);
  c7_delay(run(preset_delay_analysis()));
  c8_calibration();
  c9_determinism();
  c10_delay_formula();
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
