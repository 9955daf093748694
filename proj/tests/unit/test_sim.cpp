#include "core/errors.hpp"
#include "core/model.hpp"
#include "core/sim.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

using namespace spsim;

namespace {

EmitterParams two_level() {
  auto p = nanocrystal_defaults();
  p.shelve_rate = 0.0;
  return p;
}

// Kolmogorov-Smirnov distance of a sample against N(0, sigma).
double ks_normal(std::vector<double> x, double sigma) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 0.5 * std::erfc(-x[i] / (sigma * std::sqrt(2.0)));
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  return d;
}

std::map<std::uint64_t, int> per_window(const std::vector<double>& t, double period) {
  std::map<std::uint64_t, int> n;
  for (double x : t) ++n[static_cast<std::uint64_t>(std::floor(x / period))];
  return n;
}

} // namespace

TEST_CASE("zero power gives no emissions") {
  const auto p = nanocrystal_defaults();
  CHECK(simulate_emission_cw(p, 0.0, 1e-3, 1).empty());
  ExcitationConfig x;
  x.mode = ExcitationMode::Pulsed;
  CHECK(simulate_emission_pulsed(p, x, 1000, 1).empty());
}

TEST_CASE("emission times are increasing and inside the run") {
  const auto t = simulate_emission_cw(nanocrystal_defaults(), 1.0, 1e-3, 5);
  REQUIRE(!t.empty());
  CHECK(t.front() >= 0.0);
  CHECK(t.back() < 1e-3);
  CHECK(std::adjacent_find(t.begin(), t.end(), std::greater_equal<>()) == t.end());
}

TEST_CASE("balanced two-level emitter has mean interval 2/gamma") {
  const auto p = two_level();
  const double power = p.gamma / p.pump_coefficient;
  const double duration = 5e-3;
  const auto t = simulate_emission_cw(p, power, duration, 11);
  std::vector<double> gap(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) gap[i - 1] = t[i] - t[i - 1];
  const double mean = std::accumulate(gap.begin(), gap.end(), 0.0) / gap.size();
  // interval is a sum of two independent exponentials: cv = 1/sqrt(2)
  const double se = (2.0 / p.gamma) / std::sqrt(2.0 * gap.size());
  CHECK(std::abs(mean - 2.0 / p.gamma) < 4.0 * se);
}

TEST_CASE("occupancy fractions match the stationary distribution") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> lg(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    EmitterParams p;
    p.gamma = 1e7 * std::pow(10.0, lg(gen));
    p.pump_coefficient = 1e7 * std::pow(10.0, lg(gen));
    p.shelve_rate = 1e6 * std::pow(10.0, lg(gen));
    p.deshelve_rate_base = 1e6 * std::pow(10.0, lg(gen));
    const double power = 1.0;
    EmissionTrace trace;
    EmissionOptions opt;
    opt.trace = &trace;
    const double duration = 0.05;
    simulate_emission_cw(p, power, duration, 100 + trial, opt);
    const auto pi = steady_state(rate_matrix(p, power));
    const double total = trace.residence[0] + trace.residence[1] + trace.residence[2];
    CHECK(total == doctest::Approx(duration).epsilon(1e-9));
    // the shelf is the slowest component; its dwell sets the sampling error
    const double blocks = duration * p.deshelve_rate_base * pi[kGround];
    for (int s = 0; s < 3; ++s) CHECK(std::abs(trace.residence[s] / total - pi[s]) < 5.0 / std::sqrt(blocks));
  }
}

TEST_CASE("bright and dark periods have the first-passage means") {
  const auto p = nanocrystal_defaults();
  const double power = 1.5;
  EmissionTrace trace;
  EmissionOptions opt;
  opt.trace = &trace;
  simulate_emission_cw(p, power, 0.05, 21, opt);
  const double r = p.pump_rate(power), k = p.shelving_rate(power), g = p.gamma;
  // mean time from the ground state until shelving
  const double t_on = 1.0 / r + (1.0 + g / r) / k;
  const double t_off = 1.0 / p.deshelving_rate(power);
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  REQUIRE(trace.on_durations.size() > 1000);
  REQUIRE(trace.off_durations.size() > 1000);
  // both are close to exponential, so the standard error is mean / sqrt(n)
  CHECK(std::abs(mean(trace.on_durations) - t_on) < 4.0 * t_on / std::sqrt(trace.on_durations.size()));
  CHECK(std::abs(mean(trace.off_durations) - t_off) < 4.0 * t_off / std::sqrt(trace.off_durations.size()));
}

TEST_CASE("burst statistics on a hand-made stream") {
  const std::vector<double> t = {0.0, 1.0, 2.0, 10.0, 11.0, 30.0};
  const auto b = burst_statistics(t, 5.0);
  CHECK(b.bursts == 3);
  CHECK(b.mean_duration == doctest::Approx(1.0));
  CHECK(b.mean_gap == doctest::Approx(13.5));
  CHECK(b.mean_photons == doctest::Approx(2.0));
  CHECK(burst_statistics({}, 1.0).bursts == 0);
}

TEST_CASE("pulsed emission matches the exact photon-number statistics") {
  ExcitationConfig x;
  x.mode = ExcitationMode::Pulsed;
  x.period = 100e-9;
  x.pulse_width = 1.2e-9;
  const std::uint64_t pulses = 400000;

  SUBCASE("saturating pulses almost always emit") {
    const auto p = two_level();
    x.power_mw = 2000.0;
    x.period = 250e-9;
    const auto exact = pulsed_emission_stats(p, x, 1);
    const auto counts = per_window(simulate_emission_pulsed(p, x, pulses, 3), x.period);
    const double emit = static_cast<double>(counts.size()) / pulses;
    CHECK(emit >= 0.99);
    CHECK(std::abs(emit - (1.0 - exact.p_zero)) < 4.0 * std::sqrt(exact.p_zero / pulses) + 1e-12);
  }

  SUBCASE("multi-photon fraction at the 75 mW operating point") {
    const auto p = two_level();
    x.power_mw = 75.0;
    const auto exact = pulsed_emission_stats(p, x, 1);
    const auto counts = per_window(simulate_emission_pulsed(p, x, pulses, 4), x.period);
    std::size_t multi = 0;
    for (const auto& [w, n] : counts) multi += n >= 2;
    const double frac = static_cast<double>(multi) / pulses;
    CHECK(std::abs(frac - exact.p_multi) < 4.0 * std::sqrt(exact.p_multi * (1 - exact.p_multi) / pulses));
    // a second photon needs the first decay inside the pulse
    CHECK(frac < p.gamma * x.pulse_width);
    CHECK(exact.p_multi < p.gamma * x.pulse_width);
  }

  SUBCASE("mean photons per pulse with shelving") {
    const auto p = nanocrystal_defaults();
    x.power_mw = 20.0;
    const auto exact = pulsed_emission_stats(p, x, 1);
    const auto t = simulate_emission_pulsed(p, x, pulses, 5);
    const double mean = static_cast<double>(t.size()) / pulses;
    // blinking correlates pulses over ~10 periods
    CHECK(std::abs(mean - exact.mean_per_period) < 5.0 * std::sqrt(10.0 * exact.mean_per_period / pulses));
  }
}

TEST_CASE("Poisson light stays Poissonian through the detection chain") {
  const auto e = simulate_poisson_cw(2e6, 0.5, 9);
  DetectionParams det;
  det.efficiency_ch1 = 0.3;
  det.efficiency_ch2 = 0.3;
  det.jitter_sigma = 0.0;
  const auto tags = detect(e, det, 0.5, 10);
  const std::uint64_t window = 10'000'000; // 10 us
  std::vector<double> n(tags.duration_ps / window, 0.0);
  for (auto ts : tags.ch1)
    if (ts / window < n.size()) n[ts / window] += 1.0;
  const double m = std::accumulate(n.begin(), n.end(), 0.0) / n.size();
  double var = 0.0;
  for (double v : n) var += (v - m) * (v - m);
  var /= n.size() - 1;
  CHECK(m == doctest::Approx(2e6 * 0.5 * 0.3 * 1e-5).epsilon(0.01));
  CHECK(std::abs(var / m - 1.0) < 4.0 * std::sqrt(2.0 / (n.size() - 1)));
}

TEST_CASE("jitter is Gaussian per channel and sqrt(2) wider across channels") {
  const double spacing = 1e-6;
  const std::size_t n = 40000;
  std::vector<double> e;
  for (std::size_t i = 1; i <= n; ++i) {
    e.push_back(i * spacing);
    e.push_back(i * spacing);
  }
  DetectionParams det;
  det.jitter_sigma = 300e-12;
  const auto tags = detect(e, det, (n + 1) * spacing, 12);
  const std::int64_t grid = 1'000'000;
  auto slot = [&](std::uint64_t ts) { return (static_cast<std::int64_t>(ts) + grid / 2) / grid; };
  auto offset = [&](std::uint64_t ts) { return (static_cast<std::int64_t>(ts) - slot(ts) * grid) * 1e-12; };
  std::vector<double> single;
  for (auto ts : tags.ch1) single.push_back(offset(ts));
  std::map<std::int64_t, std::vector<double>> a, b;
  for (auto ts : tags.ch1) a[slot(ts)].push_back(offset(ts));
  for (auto ts : tags.ch2) b[slot(ts)].push_back(offset(ts));
  std::vector<double> diff;
  for (const auto& [s, va] : a) {
    auto it = b.find(s);
    if (va.size() == 1 && it != b.end() && it->second.size() == 1) diff.push_back(va[0] - it->second[0]);
  }
  REQUIRE(diff.size() > 10000);
  CHECK(ks_normal(single, 300e-12) < 1.95 / std::sqrt(single.size()));
  CHECK(ks_normal(diff, std::sqrt(2.0) * 300e-12) < 1.95 / std::sqrt(diff.size()));
}

TEST_CASE("dead time") {
  const auto e = simulate_poisson_cw(5e6, 0.02, 13);
  DetectionParams det;
  std::size_t last = SIZE_MAX;
  for (double dead : {0.0, 10e-9, 50e-9, 200e-9}) {
    det.dead_time = dead;
    const auto tags = detect(e, det, 0.02, 14);
    const auto dead_ps = static_cast<std::uint64_t>(std::llround(dead * 1e12));
    for (int c = 1; c <= 2; ++c) {
      const auto& v = tags.channel(c);
      for (std::size_t i = 1; i < v.size(); ++i) REQUIRE(v[i] - v[i - 1] >= dead_ps);
    }
    CHECK(tags.size() <= last);
    last = tags.size();
  }
}

TEST_CASE("detected stream is stationary") {
  SimulationRun run;
  run.seed = 31;
  run.excitation.power_mw = 1.0;
  run.emitters = {nanocrystal_defaults()};
  run.detection.background_rate = 3000.0;
  run.duration = 0.2;
  const auto tags = simulate_run(run);
  tags.validate();
  const std::uint64_t half = tags.duration_ps / 2;
  for (int c = 1; c <= 2; ++c) {
    const auto& v = tags.channel(c);
    const double first = std::lower_bound(v.begin(), v.end(), half) - v.begin();
    const double second = v.size() - first;
    // blinking inflates the variance by roughly (1 + 2 k t_corr)
    CHECK(std::abs(first - second) < 5.0 * std::sqrt(8.0 * (first + second)));
  }
}

TEST_CASE("simulation is deterministic and independent of thread count") {
  SimulationRun run;
  run.seed = 77;
  run.excitation.power_mw = 1.0;
  run.emitters = {nanocrystal_defaults(), nanocrystal_defaults(), nanocrystal_defaults()};
  run.duration = 0.01;
  run.threads = 1;
  const auto a = simulate_run(run);
  const auto b = simulate_run(run);
  run.threads = 4;
  const auto c = simulate_run(run);
  CHECK(a == b);
  CHECK(a == c);
  run.seed = 78;
  CHECK(!(simulate_run(run) == a));
}

TEST_CASE("invalid inputs") {
  auto p = nanocrystal_defaults();
  CHECK_THROWS_AS(simulate_emission_cw(p, -1.0, 1e-3, 1), DomainError);
  DetectionParams det;
  det.split_ratio = 1.5;
  CHECK_THROWS(det.validate());
}
