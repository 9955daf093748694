#pragma once

#include "core/correlate.hpp"
#include "core/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spsim {

/// Every knob of a run, in boundary units (ns, mW, s^-1). Defaults describe
/// the nanocrystal under CW excitation at 2.7 mW with count rates scaled down
/// to the observed ones.
struct RunConfig {
  std::uint64_t seed = 1;
  double duration_s = 10.0;
  unsigned threads = 0;

  std::string source_type = "emitter";      // emitter | poisson
  double poisson_rate_per_s = 1e6;
  double poisson_mean_per_pulse = 0.1;
  double poisson_decay_ns = 25.0;

  std::string excitation_mode = "cw";        // cw | pulsed
  double power_mw = 2.7;
  double period_ns = 100.0;
  double pulse_width_ns = 1.2;
  std::uint64_t n_pulses = 1000000;

  std::uint64_t emitter_count = 1;
  double gamma_per_ns = 0.04;
  double pump_per_ns_per_mw = 0.04 / 0.75;
  double shelve_per_ns = 3.0 / 390.0;
  double shelve_per_ns_per_mw = 0.0;
  double deshelve_per_ns = 1.0 / 390.0;
  double deshelve_per_ns_per_mw = 0.0;
  double quantum_efficiency = 1.0;

  double eta_geo = 0.38;
  double eta_opt = 0.25;
  double extra_loss = 1.0 / 15.0;
  double efficiency_ch1 = 0.7;
  double efficiency_ch2 = 0.7;
  double split_ratio = 0.5;
  double jitter_sigma_ns = 0.3;
  double dead_time_ns = 0.0;
  double background_rate_per_s = 2925.0;

  double bin_ns = 0.3;
  double span_ns = 100.0;
  std::string estimator = "start-stop";      // start-stop | full
  double rho = 0.0;                          // 0: no background correction
  std::uint64_t peaks = 15;
  double dip_window_ns = 8.0;
  double lifetime_hint_ns = 25.0;

  std::string output_format = "binary";      // binary | csv

  bool operator==(const RunConfig&) const = default;

  /// Parses key = value text on top of the defaults. Unknown or repeated
  /// keys and malformed values are ConfigErrors naming the line.
  static RunConfig parse(std::string_view text, std::string_view origin = "config");
  static RunConfig load(const std::filesystem::path& path);

  /// Every key in schema order, values in shortest round-trip form.
  std::string emit() const;

  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  /// Cross-field checks; ConfigError naming the offending key.
  void validate() const;

  EmitterParams emitter() const;
  ExcitationConfig excitation() const;
  DetectionParams detection() const;
  SimulationRun simulation_run() const;
  Estimator correlation_estimator() const;
  TagFormat tag_format() const;
};

struct ConfigKey {
  std::string_view key;
  std::string_view unit;
  std::string_view description;
};

/// The schema, in emission order.
const std::vector<ConfigKey>& config_keys();

} // namespace spsim
