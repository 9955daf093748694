#include "core/artifacts.hpp"
#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/tags.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace spsim;

namespace {

std::string config_error(std::string_view text) {
  try {
    RunConfig::parse(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::string data_dir() { return SPSIM_TEST_DATA; }

} // namespace

TEST_CASE("emitted configuration parses back to itself") {
  const RunConfig d;
  CHECK(RunConfig::parse(d.emit()) == d);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 50; ++trial) {
    RunConfig c;
    c.power_mw = 100.0 * u(gen);
    c.gamma_per_ns = u(gen) / 3.0;
    c.shelve_per_ns = u(gen) / 7.0;
    c.jitter_sigma_ns = u(gen);
    c.split_ratio = u(gen);
    c.background_rate_per_s = 1e4 * u(gen);
    c.seed = gen();
    c.excitation_mode = trial % 2 ? "pulsed" : "cw";
    c.estimator = trial % 3 ? "full" : "start-stop";
    c.validate();
    CHECK(RunConfig::parse(c.emit()) == c);
  }
}

TEST_CASE("configuration syntax") {
  const auto c = RunConfig::parse("# comment\n\nseed = 7\n  excitation.power_mw=1.5  # trailing\n");
  CHECK(c.seed == 7);
  CHECK(c.power_mw == 1.5);
  CHECK(c.duration_s == RunConfig{}.duration_s);

  CHECK(config_error("seed = 1\nbogus.key = 3\n").find("bogus.key") != std::string::npos);
  CHECK(config_error("seed = 1\nbogus.key = 3\n").find("test.cfg") != std::string::npos);
  CHECK(config_error("seed = 1\nseed = 2\n").find("twice") != std::string::npos);
  CHECK(!config_error("excitation.power_mw = lots\n").empty());
  CHECK(!config_error("analysis.estimator = magic\n").empty());
  CHECK(!config_error("seed 7\n").empty());
  CHECK(!config_error("detection.split_ratio = 1.5\n").empty());
  CHECK(!config_error("excitation.power_mw = -1\n").empty());
}

TEST_CASE("set and get") {
  RunConfig c;
  c.set("excitation.mode", "pulsed");
  CHECK(c.get("excitation.mode") == "pulsed");
  c.set("excitation.period_ns", "50");
  CHECK(c.excitation().period == doctest::Approx(50e-9));
  CHECK_THROWS_AS(c.set("nope", "1"), ConfigError);
  CHECK_THROWS_AS(c.get("nope"), ConfigError);
  for (const auto& k : config_keys()) CHECK_NOTHROW(c.get(k.key));
}

TEST_CASE("default emitter matches the documented rates") {
  const auto p = RunConfig{}.emitter();
  CHECK(p.gamma == doctest::Approx(1.0 / 25e-9));
  CHECK(p.pump_rate(0.75) == doctest::Approx(p.gamma));
  CHECK(p.shelving_rate(0.0) == doctest::Approx(3.0 * p.deshelving_rate(0.0)));
}

TEST_CASE("histogram csv") {
  CorrelationHistogram h;
  h.spec = BinSpec::centered(300, 400);
  h.counts = {90, 9, 120};
  h.acquisition = {1e4, 1e4, 3000.0};
  const double level = 1e8 * 0.3e-9 * 3000.0;

  const auto plain = histogram_csv(h, std::nullopt);
  CHECK(plain.starts_with("tau_ps,counts,c_normalized\n-450,90,"));
  const auto rows = parse_histogram_csv(plain, "plain");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].tau_ps == -150);
  CHECK(rows[1].counts == 9);
  CHECK(rows[1].c_normalized == doctest::Approx(9.0 / level));
  CHECK(!rows[1].g2_corrected);
  CHECK(zero_delay_row(rows)->tau_ps == -150);

  const auto corrected = histogram_csv(h, 0.8);
  CHECK(corrected.starts_with("tau_ps,counts,c_normalized,g2_corrected\n"));
  const auto crows = parse_histogram_csv(corrected, "corrected");
  REQUIRE(crows[2].g2_corrected);
  CHECK(*crows[2].g2_corrected == doctest::Approx((120.0 / level - 0.36) / 0.64));

  CHECK_THROWS_AS(parse_histogram_csv("tau_ps,counts\n1,2\n", "bad"), DataError);
  CHECK_THROWS_AS(parse_histogram_csv("tau_ps,counts,c_normalized\n1,x,3\n", "bad"), DataError);
}

TEST_CASE("input tables") {
  const auto s = parse_power_series("power_mw,gamma_per_ns,uncertainty_per_ns\n0.5,0.05,0.002\n1,0.06,0.001\n", "s");
  REQUIRE(s.size() == 2);
  CHECK(s[0].gamma == doctest::Approx(5e7));
  CHECK(s[1].uncertainty == doctest::Approx(1e6));
  CHECK(parse_power_series("power_mw,gamma_per_ns\n0.5,0.05\n", "s").at(0).uncertainty == 0.0);
  CHECK_THROWS_AS(parse_power_series("power_mw,gamma_per_ns\n0.5\n", "s"), DataError);
  const auto p = parse_saturation_points("power_mw,rate_per_s\n1,2e4\n", "p");
  CHECK(p.at(0).rate == 2e4);
  CHECK_THROWS_AS(parse_saturation_points("", "p"), DataError);
}

TEST_CASE("run report against golden output") {
  const auto dir = std::filesystem::path(data_dir());
  CHECK(run_report(dir / "data/report_full") == read_file(dir / "golden/report_full.txt"));
  CHECK(run_report(dir / "data/report_partial") == read_file(dir / "golden/report_partial.txt"));
  try {
    run_report(dir / "data/report_empty");
    FAIL("empty directory accepted");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    for (auto a : {kCorrelationArtifact, kLifetimeArtifact, kPulsedSummaryArtifact, kSaturationArtifact, kBudgetArtifact})
      CHECK(msg.find(a) != std::string::npos);
  }
}
