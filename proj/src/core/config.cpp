#include "core/config.hpp"

#include "core/errors.hpp"
#include "core/tags.hpp"
#include "core/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <variant>

namespace spsim {

namespace {

using Field = std::variant<double RunConfig::*, std::uint64_t RunConfig::*, unsigned RunConfig::*,
                           std::string RunConfig::*>;

struct Entry {
  ConfigKey doc;
  Field field;
  std::vector<std::string_view> choices; // for string fields
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {{"seed", "", "master seed; every random stream derives from it"}, &RunConfig::seed, {}},
      {{"duration_s", "s", "CW acquisition time"}, &RunConfig::duration_s, {}},
      {{"threads", "", "worker threads for emitters, 0 = hardware"}, &RunConfig::threads, {}},

      {{"source.type", "", "emitter or poisson"}, &RunConfig::source_type, {"emitter", "poisson"}},
      {{"source.poisson_rate_per_s", "s^-1", "CW Poisson photon rate before collection losses"},
       &RunConfig::poisson_rate_per_s, {}},
      {{"source.poisson_mean_per_pulse", "", "pulsed Poisson photons per pulse before collection losses"},
       &RunConfig::poisson_mean_per_pulse, {}},
      {{"source.poisson_decay_ns", "ns", "pulsed Poisson emission delay constant"},
       &RunConfig::poisson_decay_ns, {}},

      {{"excitation.mode", "", "cw or pulsed"}, &RunConfig::excitation_mode, {"cw", "pulsed"}},
      {{"excitation.power_mw", "mW", "CW power, or peak power of the pulses"}, &RunConfig::power_mw, {}},
      {{"excitation.period_ns", "ns", "pulse repetition period"}, &RunConfig::period_ns, {}},
      {{"excitation.pulse_width_ns", "ns", "rectangular pulse width"}, &RunConfig::pulse_width_ns, {}},
      {{"excitation.n_pulses", "", "pulsed acquisition length"}, &RunConfig::n_pulses, {}},

      {{"emitters.count", "", "identical independent emitters"}, &RunConfig::emitter_count, {}},
      {{"emitter.gamma_per_ns", "ns^-1", "radiative decay rate"}, &RunConfig::gamma_per_ns, {}},
      {{"emitter.pump_per_ns_per_mw", "ns^-1 mW^-1", "pump rate per unit power"},
       &RunConfig::pump_per_ns_per_mw, {}},
      {{"emitter.shelve_per_ns", "ns^-1", "excited to shelf rate at zero power"}, &RunConfig::shelve_per_ns, {}},
      {{"emitter.shelve_per_ns_per_mw", "ns^-1 mW^-1", "power slope of the shelving rate"},
       &RunConfig::shelve_per_ns_per_mw, {}},
      {{"emitter.deshelve_per_ns", "ns^-1", "shelf to ground rate at zero power"},
       &RunConfig::deshelve_per_ns, {}},
      {{"emitter.deshelve_per_ns_per_mw", "ns^-1 mW^-1", "power slope of the deshelving rate"},
       &RunConfig::deshelve_per_ns_per_mw, {}},
      {{"emitter.quantum_efficiency", "", "radiative quantum efficiency"}, &RunConfig::quantum_efficiency, {}},

      {{"detection.eta_geo", "", "geometric collection efficiency"}, &RunConfig::eta_geo, {}},
      {{"detection.eta_opt", "", "optical transmission"}, &RunConfig::eta_opt, {}},
      {{"detection.extra_loss", "", "unexplained extra loss factor"}, &RunConfig::extra_loss, {}},
      {{"detection.efficiency_ch1", "", "detector 1 quantum efficiency"}, &RunConfig::efficiency_ch1, {}},
      {{"detection.efficiency_ch2", "", "detector 2 quantum efficiency"}, &RunConfig::efficiency_ch2, {}},
      {{"detection.split_ratio", "", "probability of reaching channel 1"}, &RunConfig::split_ratio, {}},
      {{"detection.jitter_sigma_ns", "ns", "Gaussian timing jitter per detector"},
       &RunConfig::jitter_sigma_ns, {}},
      {{"detection.dead_time_ns", "ns", "per-channel dead time"}, &RunConfig::dead_time_ns, {}},
      {{"detection.background_rate_per_s", "s^-1", "Poisson background ahead of the beamsplitter"},
       &RunConfig::background_rate_per_s, {}},

      {{"analysis.bin_ns", "ns", "correlation bin width"}, &RunConfig::bin_ns, {}},
      {{"analysis.span_ns", "ns", "correlation half span"}, &RunConfig::span_ns, {}},
      {{"analysis.estimator", "", "start-stop or full"}, &RunConfig::estimator, {"start-stop", "full"}},
      {{"analysis.rho", "", "signal fraction for background correction, 0 = none"}, &RunConfig::rho, {}},
      {{"analysis.peaks", "", "pulsed peaks reported on each side of zero"}, &RunConfig::peaks, {}},
      {{"analysis.dip_window_ns", "ns", "half width of the antibunching dip fit"}, &RunConfig::dip_window_ns, {}},
      {{"analysis.lifetime_hint_ns", "ns", "starting decay time of the pulsed peak fit"},
       &RunConfig::lifetime_hint_ns, {}},

      {{"output.format", "", "time-tag file format, binary or csv"}, &RunConfig::output_format, {"binary", "csv"}},
  };
  return table;
}

const Entry& lookup(std::string_view key) {
  for (const auto& e : entries())
    if (e.doc.key == key) return e;
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

struct Setter {
  RunConfig& cfg;
  const Entry& entry;
  std::string_view value;

  [[noreturn]] void bad(std::string_view what) const {
    throw ConfigError(std::string(entry.doc.key) + ": " + std::string(what) + ", got '" + std::string(value) + "'");
  }
  void operator()(double RunConfig::*m) const {
    double v = 0.0;
    if (!text::parse_double(value, v) || !std::isfinite(v)) bad("expected a finite number");
    cfg.*m = v;
  }
  void operator()(std::uint64_t RunConfig::*m) const {
    unsigned long long v = 0;
    if (!text::parse_u64(value, v)) bad("expected a non-negative integer");
    cfg.*m = v;
  }
  void operator()(unsigned RunConfig::*m) const {
    unsigned long long v = 0;
    if (!text::parse_u64(value, v) || v > 4096) bad("expected an integer in [0, 4096]");
    cfg.*m = static_cast<unsigned>(v);
  }
  void operator()(std::string RunConfig::*m) const {
    if (std::find(entry.choices.begin(), entry.choices.end(), value) == entry.choices.end()) {
      std::string allowed;
      for (auto c : entry.choices) allowed += (allowed.empty() ? "" : " | ") + std::string(c);
      bad("expected one of " + allowed);
    }
    cfg.*m = std::string(value);
  }
};

struct Getter {
  const RunConfig& cfg;
  std::string operator()(double RunConfig::*m) const { return text::format_double(cfg.*m); }
  std::string operator()(std::uint64_t RunConfig::*m) const { return std::to_string(cfg.*m); }
  std::string operator()(unsigned RunConfig::*m) const { return std::to_string(cfg.*m); }
  std::string operator()(std::string RunConfig::*m) const { return cfg.*m; }
};

void require(bool ok, std::string_view key, std::string_view what) {
  if (!ok) throw ConfigError(std::string(key) + ": " + std::string(what));
}

bool unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

} // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back(e.doc);
    return out;
  }();
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto& e = lookup(key);
  std::visit(Setter{*this, e, text::trim(value)}, e.field);
}

std::string RunConfig::get(std::string_view key) const {
  const auto& e = lookup(key);
  return std::visit(Getter{*this}, e.field);
}

RunConfig RunConfig::parse(std::string_view text, std::string_view origin) {
  RunConfig cfg;
  std::vector<text::KeyValueLine> lines;
  try {
    lines = text::split_key_values(text);
  } catch (const DataError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  std::set<std::string> seen;
  for (const auto& kv : lines) {
    const std::string where = std::string(origin) + ":" + std::to_string(kv.line) + ": ";
    if (!seen.insert(kv.key).second) throw ConfigError(where + "key '" + kv.key + "' given twice");
    try {
      cfg.set(kv.key, kv.value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse(text, path.string());
}

std::string RunConfig::emit() const {
  std::string out;
  for (const auto& e : entries()) {
    out += e.doc.key;
    out += " = ";
    out += std::visit(Getter{*this}, e.field);
    out += '\n';
  }
  return out;
}

void RunConfig::validate() const {
  require(duration_s > 0.0, "duration_s", "must be positive");
  require(poisson_rate_per_s >= 0.0, "source.poisson_rate_per_s", "must be >= 0");
  require(poisson_mean_per_pulse >= 0.0, "source.poisson_mean_per_pulse", "must be >= 0");
  require(poisson_decay_ns >= 0.0, "source.poisson_decay_ns", "must be >= 0");
  require(power_mw >= 0.0, "excitation.power_mw", "must be >= 0");
  require(period_ns > 0.0, "excitation.period_ns", "must be positive");
  require(pulse_width_ns > 0.0 && pulse_width_ns < period_ns, "excitation.pulse_width_ns",
          "must lie strictly between 0 and the period");
  require(excitation_mode != "pulsed" || n_pulses > 0, "excitation.n_pulses", "must be positive");
  require(gamma_per_ns > 0.0, "emitter.gamma_per_ns", "must be positive");
  require(pump_per_ns_per_mw >= 0.0, "emitter.pump_per_ns_per_mw", "must be >= 0");
  require(shelve_per_ns >= 0.0, "emitter.shelve_per_ns", "must be >= 0");
  require(shelve_per_ns_per_mw >= 0.0, "emitter.shelve_per_ns_per_mw", "must be >= 0");
  require(deshelve_per_ns >= 0.0, "emitter.deshelve_per_ns", "must be >= 0");
  require(deshelve_per_ns_per_mw >= 0.0, "emitter.deshelve_per_ns_per_mw", "must be >= 0");
  require(unit_interval(quantum_efficiency), "emitter.quantum_efficiency", "must lie in [0, 1]");
  require(unit_interval(eta_geo), "detection.eta_geo", "must lie in [0, 1]");
  require(unit_interval(eta_opt), "detection.eta_opt", "must lie in [0, 1]");
  require(unit_interval(extra_loss), "detection.extra_loss", "must lie in [0, 1]");
  require(unit_interval(efficiency_ch1), "detection.efficiency_ch1", "must lie in [0, 1]");
  require(unit_interval(efficiency_ch2), "detection.efficiency_ch2", "must lie in [0, 1]");
  require(unit_interval(split_ratio), "detection.split_ratio", "must lie in [0, 1]");
  require(jitter_sigma_ns >= 0.0, "detection.jitter_sigma_ns", "must be >= 0");
  require(dead_time_ns >= 0.0, "detection.dead_time_ns", "must be >= 0");
  require(background_rate_per_s >= 0.0, "detection.background_rate_per_s", "must be >= 0");
  require(bin_ns > 0.0, "analysis.bin_ns", "must be positive");
  require(std::abs(bin_ns * 1000.0 - std::round(bin_ns * 1000.0)) < 1e-6, "analysis.bin_ns",
          "must be a whole number of picoseconds");
  require(span_ns > 0.0, "analysis.span_ns", "must be positive");
  require(rho >= 0.0 && rho <= 1.0, "analysis.rho", "must lie in [0, 1]");
  require(peaks >= 1 && peaks <= 1000, "analysis.peaks", "must lie in [1, 1000]");
  require(dip_window_ns > 0.0, "analysis.dip_window_ns", "must be positive");
  require(lifetime_hint_ns > 0.0, "analysis.lifetime_hint_ns", "must be positive");
}

EmitterParams RunConfig::emitter() const {
  EmitterParams p;
  p.gamma = gamma_per_ns * 1e9;
  p.pump_coefficient = pump_per_ns_per_mw * 1e9;
  p.shelve_rate = shelve_per_ns * 1e9;
  p.shelve_power_coefficient = shelve_per_ns_per_mw * 1e9;
  p.deshelve_rate_base = deshelve_per_ns * 1e9;
  p.deshelve_power_coefficient = deshelve_per_ns_per_mw * 1e9;
  p.quantum_efficiency = quantum_efficiency;
  return p;
}

ExcitationConfig RunConfig::excitation() const {
  ExcitationConfig e;
  e.mode = excitation_mode == "pulsed" ? ExcitationMode::Pulsed : ExcitationMode::CW;
  e.power_mw = power_mw;
  e.period = period_ns * 1e-9;
  e.pulse_width = pulse_width_ns * 1e-9;
  return e;
}

DetectionParams RunConfig::detection() const {
  DetectionParams d;
  d.split_ratio = split_ratio;
  d.efficiency_ch1 = efficiency_ch1;
  d.efficiency_ch2 = efficiency_ch2;
  d.collection_efficiency = eta_geo * eta_opt * extra_loss;
  d.jitter_sigma = jitter_sigma_ns * 1e-9;
  d.dead_time = dead_time_ns * 1e-9;
  d.background_rate = background_rate_per_s;
  return d;
}

SimulationRun RunConfig::simulation_run() const {
  validate();
  SimulationRun run;
  run.seed = seed;
  run.excitation = excitation();
  run.detection = detection();
  run.duration = duration_s;
  run.n_pulses = n_pulses;
  run.threads = threads;
  run.source = source_type == "poisson" ? SourceKind::Poisson : SourceKind::Emitter;
  run.poisson_rate = poisson_rate_per_s;
  run.poisson_mean_per_pulse = poisson_mean_per_pulse;
  run.poisson_decay = poisson_decay_ns * 1e-9;
  if (run.source == SourceKind::Emitter) run.emitters.assign(emitter_count, emitter());
  return run;
}

Estimator RunConfig::correlation_estimator() const {
  return estimator == "full" ? Estimator::FullCross : Estimator::StartStop;
}

TagFormat RunConfig::tag_format() const { return output_format == "csv" ? TagFormat::Csv : TagFormat::Binary; }

} // namespace spsim
