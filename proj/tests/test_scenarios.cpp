#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "npca/analytic.hpp"
#include "npca/scenarios.hpp"

using namespace npca;

namespace {

ScenarioSpec small(ScenarioSpec s, double duration_s, std::size_t seeds) {
  s.duration_s = duration_s;
  s.seeds = default_seeds(seeds);
  return s;
}

}  // namespace

TEST_CASE("single-BSS occupancy preset") {
  const auto s = preset_single_bss_occupancy();
  REQUIRE(s.base.bss.size() == 1);
  CHECK(s.base.bss[0].stations == 10);
  CHECK(s.base.bss[0].channels == std::vector<int>{0, 1});
  CHECK(s.base.channels.nonprimary_idle_probs == std::vector<double>{0.8});
  CHECK(s.sweep.param == "channels.primary_idle_prob");
  CHECK(s.sweep.values == std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5});
  REQUIRE(s.variants.size() == 2);
  CHECK(s.variants[0].policies == std::vector<Policy>{Policy::Legacy});
  CHECK(s.variants[1].policies == std::vector<Policy>{Policy::Npca});
  CHECK(s.duration_s == 30.0);
  CHECK(s.seeds.size() == 5);
  CHECK(s.world_at(0.3, s.variants[1]).channels.primary_idle_prob == 0.3);
}

TEST_CASE("two-BSS presets") {
  const auto leg = preset_two_bss(Policy::Legacy);
  const auto np = preset_two_bss(Policy::Npca);
  CHECK(leg.variants.size() == 1);
  CHECK(leg.variants[0].policies == std::vector<Policy>{Policy::Legacy, Policy::Legacy});
  CHECK(np.variants[0].policies == std::vector<Policy>{Policy::Npca, Policy::Legacy});
  CHECK(leg.base.bss[0].channels == std::vector<int>{0, 1});
  CHECK(leg.base.bss[1].channels == std::vector<int>{0});
  CHECK(leg.base.channels.primary_idle_prob == 1.0);
  CHECK(leg.base.channels.nonprimary_idle_probs == std::vector<double>{1.0});
  CHECK(leg.sweep.values == std::vector<double>{2, 4, 6, 8, 10});
  for (double v : leg.sweep.values) {
    const auto w = np.world_at(v, np.variants[0]);
    CHECK(w.bss[0].stations == static_cast<int>(v));
    CHECK(w.bss[1].stations == static_cast<int>(v));
    CHECK(w.bss[0].policy == Policy::Npca);
  }
  const auto d = preset_delay_analysis();
  CHECK(d.base == leg.base);
  CHECK(d.variants.size() == 2);
  CHECK(d.sweep == leg.sweep);
}

TEST_CASE("presets by name") {
  for (const auto& n : preset_names()) CHECK_NOTHROW(preset_by_name(n));
  CHECK(preset_by_name("two-bss", Policy::Npca).name == "two-bss-npca");
  CHECK(preset_by_name("two-bss").name == "two-bss-legacy");
  CHECK_THROWS_AS(preset_by_name("fig5"), ConfigError);
  CHECK_THROWS_AS(preset_by_name("delay-analysis", Policy::Npca), ConfigError);
}

TEST_CASE("scenario json round trip") {
  for (auto s : {preset_single_bss_occupancy(), preset_two_bss(Policy::Npca), preset_delay_analysis()})
    CHECK(scenario_from_json(to_json(s)) == s);
  auto j = to_json(preset_delay_analysis());
  j["extra"] = 1;
  CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
}

TEST_CASE("scenario validation") {
  auto s = preset_two_bss(Policy::Legacy);
  s.seeds.clear();
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = preset_two_bss(Policy::Legacy);
  s.variants[0].policies = {Policy::Npca};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = preset_single_bss_occupancy();
  s.sweep.values = {0.2, 1.5};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = preset_single_bss_occupancy();
  s.sweep.param = "channels.nope";
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = preset_single_bss_occupancy();
  s.sweep.values.clear();
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("statistics helpers") {
  CHECK(mean_of({}) == 0.0);
  CHECK(sample_std({3.0}) == 0.0);
  CHECK(mean_of({1, 2, 3, 4}) == 2.5);
  CHECK(sample_std({1, 2, 3, 4}) == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("one value, one seed gives one point") {
  auto s = small(preset_two_bss(Policy::Legacy), 0.5, 1);
  s.sweep.values = {4};
  const auto r = run_scenario(s);
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].bss.size() == 2);
  CHECK(r.points[0].bss[0].throughput_std == 0.0);
  CHECK(r.points[0].seeds == std::vector<std::uint64_t>{1});
}

TEST_CASE("aggregation, provenance and analytic attachments") {
  auto s = small(preset_delay_analysis(), 1.0, 5);
  s.sweep.values = {2, 6};
  const auto r = run_scenario(s);
  REQUIRE(r.points.size() == 4);
  CHECK(r.points[0].variant == "legacy");
  CHECK(r.points[1].variant == "npca");
  CHECK(r.points[2].value == 6);
  for (const auto& p : r.points) {
    CHECK(p.seeds.size() == 5);
    CHECK(p.config_hash.size() == 16);
    CHECK(p.measured_idle_fraction.size() == 2);
    for (const auto& b : p.bss) {
      CHECK(b.throughput_std > 0.0);
      const auto [lo, hi] = std::minmax_element(b.throughput_per_seed.begin(), b.throughput_per_seed.end());
      CHECK(b.throughput_mean >= *lo);
      CHECK(b.throughput_mean <= *hi);
      CHECK(b.delay_std_us > 0.0);
    }
  }
  CHECK(r.points[0].config_hash != r.points[1].config_hash);
  CHECK(r.points[0].analytic_applicable);
  CHECK(!r.points[1].analytic_applicable);

  // Two BSSs of n share one primary: each gets S(2n)/2; bss1 bonds an always-idle channel.
  const auto cfg = default_config();
  const double half = analytic::single_channel_throughput(12, cfg) / 2;
  const auto& p = r.points[2];
  CHECK(p.bss[1].analytic_s_leg == doctest::Approx(half).epsilon(1e-12));
  CHECK(p.bss[0].analytic_s_leg == doctest::Approx(2 * half).epsilon(1e-12));
  CHECK(p.bss[0].analytic_s_npca == doctest::Approx(2 * half).epsilon(1e-12));
  CHECK(p.bss[0].analytic_delay_us == doctest::Approx(analytic::access_delay(12, cfg).expected_access_delay_us));
}

TEST_CASE("reruns and parallelism give identical results") {
  auto s = small(preset_single_bss_occupancy(), 0.5, 2);
  s.sweep.values = {0.2, 0.4};
  std::vector<double> order;
  RunSettings one;
  one.on_point = [&](const ScenarioPoint& p) { order.push_back(p.value); };
  const auto a = run_scenario(s, one);
  RunSettings many;
  many.parallelism = 4;
  const auto b = run_scenario(s, many);
  CHECK(order == std::vector<double>{0.2, 0.2, 0.4, 0.4});
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].bss[0].throughput_per_seed == b.points[i].bss[0].throughput_per_seed);
    CHECK(a.points[i].bss[0].delay_per_seed == b.points[i].bss[0].delay_per_seed);
    CHECK(a.points[i].config_hash == b.points[i].config_hash);
  }
}

TEST_CASE("two legacy BSSs split roughly two to one") {
  auto s = small(preset_two_bss(Policy::Legacy), 3.0, 2);
  s.sweep.values = {2, 10};
  RunSettings rs;
  rs.parallelism = 4;
  for (const auto& p : run_scenario(s, rs).points) {
    const double ratio = p.bss[0].throughput_mean / p.bss[1].throughput_mean;
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.2);
  }
}
