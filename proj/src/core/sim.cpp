#include "core/sim.hpp"

#include "core/errors.hpp"
#include "core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace spsim {

namespace {

struct Rates {
  std::array<double, 3> out{}; // total exit rate per state
  double decay_fraction = 1.0; // gamma / (gamma + k_es)
  double shelving = 0.0;
};

Rates rates_at(const EmitterParams& p, double power_mw) {
  Rates r;
  r.shelving = p.shelving_rate(power_mw);
  r.out[kGround] = p.pump_rate(power_mw);
  r.out[kExcited] = p.gamma + r.shelving;
  r.out[kShelf] = p.deshelving_rate(power_mw);
  r.decay_fraction = p.gamma / r.out[kExcited];
  return r;
}

int draw_state(Rng& rng, const Eigen::Vector3d& p) {
  const double u = rng.uniform();
  if (u < p(kGround)) return kGround;
  if (u < p(kGround) + p(kExcited)) return kExcited;
  return kShelf;
}

// Gillespie stepper over piecewise-constant rates.
class Chain {
public:
  Chain(Rng& rng, int state, double record_probability, EmissionTrace* trace, bool label_by_pulse)
      : rng_(rng), state_(state), record_p_(record_probability), trace_(trace),
        label_by_pulse_(label_by_pulse) {}

  void set_period(std::uint64_t n) { period_ = n; }

  void run_until(double t_end, const Rates& r) {
    for (;;) {
      const double total = r.out[state_];
      if (total <= 0.0) {
        advance_to(t_end);
        return;
      }
      const double dt = rng_.exponential() / total;
      if (t_ + dt >= t_end) {
        advance_to(t_end);
        return;
      }
      if (trace_) trace_->residence[state_] += dt;
      t_ += dt;
      jump(r);
    }
  }

  std::vector<double>& emissions() { return emissions_; }

private:
  void advance_to(double t_end) {
    if (trace_) trace_->residence[state_] += t_end - t_;
    t_ = t_end;
  }

  void jump(const Rates& r) {
    if (trace_) ++trace_->jumps;
    switch (state_) {
    case kGround:
      state_ = kExcited;
      excited_in_ = period_;
      break;
    case kExcited:
      if (r.decay_fraction >= 1.0 || rng_.uniform() < r.decay_fraction) {
        state_ = kGround;
        if (record_p_ >= 1.0 || rng_.uniform() < record_p_) {
          emissions_.push_back(t_);
          if (trace_) trace_->labels.push_back(label_by_pulse_ ? excited_in_ : bright_);
        }
      } else {
        state_ = kShelf;
        if (trace_) {
          ++trace_->shelvings;
          if (on_valid_) trace_->on_durations.push_back(t_ - on_start_);
          off_start_ = t_;
          off_valid_ = true;
        }
      }
      break;
    default:
      state_ = kGround;
      ++bright_;
      if (trace_) {
        if (off_valid_) trace_->off_durations.push_back(t_ - off_start_);
        on_start_ = t_;
        on_valid_ = true;
      }
      break;
    }
  }

  Rng& rng_;
  int state_;
  double t_ = 0.0;
  double record_p_;
  EmissionTrace* trace_;
  bool label_by_pulse_;
  std::uint64_t period_ = 0;
  std::uint64_t excited_in_ = 0;
  std::uint64_t bright_ = 0;
  double on_start_ = 0.0;
  double off_start_ = 0.0;
  bool on_valid_ = false;
  bool off_valid_ = false;
  std::vector<double> emissions_;
};

double record_probability(const EmitterParams& params, const EmissionOptions& options) {
  if (!(options.collection >= 0.0 && options.collection <= 1.0))
    throw DomainError("emission: collection efficiency must lie in [0, 1]");
  return params.quantum_efficiency * options.collection;
}

void reset_trace(EmissionTrace* trace) {
  if (trace) *trace = EmissionTrace{};
}

} // namespace

void DetectionParams::validate() const {
  auto unit = [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; };
  if (!unit(split_ratio) || !unit(efficiency_ch1) || !unit(efficiency_ch2) || !unit(collection_efficiency))
    throw DomainError("detection: probabilities must lie in [0, 1]");
  if (!(jitter_sigma >= 0.0) || !std::isfinite(jitter_sigma))
    throw DomainError("detection: jitter sigma must be >= 0");
  if (!(dead_time >= 0.0) || !std::isfinite(dead_time)) throw DomainError("detection: dead time must be >= 0");
  if (!(background_rate >= 0.0) || !std::isfinite(background_rate))
    throw DomainError("detection: background rate must be >= 0");
}

std::vector<double> simulate_emission_cw(const EmitterParams& params, double power_mw,
                                         double duration, std::uint64_t seed,
                                         const EmissionOptions& options) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw DomainError("simulate_emission_cw: duration must be positive");
  const Eigen::Matrix3d g = rate_matrix(params, power_mw);
  const Rates r = rates_at(params, power_mw);
  if (r.shelving > 0.0 && r.out[kShelf] <= 0.0)
    throw DomainError("simulate_emission_cw: the shelf can be entered but never left (zero deshelving rate)");

  reset_trace(options.trace);
  Rng rng(seed);
  const int start = draw_state(rng, steady_state(g));
  Chain chain(rng, start, record_probability(params, options), options.trace, false);
  chain.run_until(duration, r);
  return std::move(chain.emissions());
}

std::vector<double> simulate_emission_pulsed(const EmitterParams& params,
                                             const ExcitationConfig& excitation,
                                             std::uint64_t n_pulses, std::uint64_t seed,
                                             const EmissionOptions& options) {
  excitation.validate();
  params.validate();
  if (excitation.mode != ExcitationMode::Pulsed)
    throw DomainError("simulate_emission_pulsed: excitation must be pulsed");
  const Rates on = rates_at(params, excitation.power_mw);
  const Rates off = rates_at(params, 0.0);
  if ((on.shelving > 0.0 || off.shelving > 0.0) && on.out[kShelf] <= 0.0 && off.out[kShelf] <= 0.0)
    throw DomainError("simulate_emission_pulsed: the shelf can be entered but never left (zero deshelving rate)");

  reset_trace(options.trace);
  Rng rng(seed);
  const auto stats = pulsed_emission_stats(params, excitation, 0);
  const int start = draw_state(rng, stats.periodic_state);
  Chain chain(rng, start, record_probability(params, options), options.trace, true);
  for (std::uint64_t n = 0; n < n_pulses; ++n) {
    const double t0 = static_cast<double>(n) * excitation.period;
    chain.set_period(n);
    chain.run_until(t0 + excitation.pulse_width, on);
    chain.run_until(static_cast<double>(n + 1) * excitation.period, off);
  }
  return std::move(chain.emissions());
}

std::vector<double> simulate_poisson_cw(double rate, double duration, std::uint64_t seed) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw DomainError("simulate_poisson_cw: rate must be >= 0");
  if (!(duration > 0.0)) throw DomainError("simulate_poisson_cw: duration must be positive");
  std::vector<double> out;
  if (rate == 0.0) return out;
  out.reserve(static_cast<std::size_t>(rate * duration * 1.01) + 16);
  Rng rng(seed);
  double t = rng.exponential() / rate;
  while (t < duration) {
    out.push_back(t);
    t += rng.exponential() / rate;
  }
  return out;
}

std::vector<double> simulate_poisson_pulsed(double mean_per_pulse, const ExcitationConfig& excitation,
                                            double decay_time, std::uint64_t n_pulses,
                                            std::uint64_t seed) {
  excitation.validate();
  if (excitation.mode != ExcitationMode::Pulsed)
    throw DomainError("simulate_poisson_pulsed: excitation must be pulsed");
  if (!(mean_per_pulse >= 0.0)) throw DomainError("simulate_poisson_pulsed: mean must be >= 0");
  if (!(decay_time >= 0.0)) throw DomainError("simulate_poisson_pulsed: decay time must be >= 0");
  Rng rng(seed);
  std::vector<double> out;
  const double end = static_cast<double>(n_pulses) * excitation.period;
  for (std::uint64_t n = 0; n < n_pulses; ++n) {
    const auto k = rng.poisson(mean_per_pulse);
    const double t0 = static_cast<double>(n) * excitation.period;
    for (std::uint64_t i = 0; i < k; ++i) {
      const double t = t0 + excitation.pulse_width * rng.uniform() + decay_time * rng.exponential();
      if (t < end) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> superpose(std::span<const std::vector<double>> streams) {
  std::vector<double> out;
  for (const auto& s : streams) {
    std::vector<double> merged;
    merged.reserve(out.size() + s.size());
    std::merge(out.begin(), out.end(), s.begin(), s.end(), std::back_inserter(merged));
    out.swap(merged);
  }
  return out;
}

TimeTagStream detect(std::span<const double> emissions, const DetectionParams& det,
                     double duration, std::uint64_t seed) {
  det.validate();
  if (!(duration > 0.0) || !std::isfinite(duration)) throw DomainError("detect: duration must be positive");

  std::vector<double> background;
  if (det.background_rate > 0.0)
    background = simulate_poisson_cw(det.background_rate, duration, derive_seed(seed, StreamKey::Background));
  std::vector<double> photons;
  photons.reserve(emissions.size() + background.size());
  std::merge(emissions.begin(), emissions.end(), background.begin(), background.end(),
             std::back_inserter(photons));

  Rng routing(derive_seed(seed, StreamKey::Routing));
  Rng jitter(derive_seed(seed, StreamKey::Jitter));
  std::array<std::vector<std::int64_t>, 2> ch;
  for (double t : photons) {
    const bool first = routing.uniform() < det.split_ratio;
    const double eff = first ? det.efficiency_ch1 : det.efficiency_ch2;
    if (!(routing.uniform() < eff)) continue;
    const double jittered = det.jitter_sigma > 0.0 ? t + det.jitter_sigma * jitter.normal() : t;
    ch[first ? 0 : 1].push_back(std::llround(jittered * 1e12));
  }

  TimeTagStream out;
  out.duration_ps = static_cast<std::uint64_t>(std::llround(duration * 1e12));
  const auto dead_ps = std::llround(det.dead_time * 1e12);
  const auto end_ps = static_cast<std::int64_t>(out.duration_ps);
  for (int c = 0; c < 2; ++c) {
    auto& v = ch[c];
    std::sort(v.begin(), v.end());
    auto& dst = c == 0 ? out.ch1 : out.ch2;
    dst.reserve(v.size());
    bool any = false;
    std::int64_t last = 0;
    for (auto ts : v) {
      if (any && ts - last < dead_ps) continue;
      any = true;
      last = ts;
      dst.push_back(static_cast<std::uint64_t>(std::clamp<std::int64_t>(ts, 0, end_ps)));
    }
  }
  return out;
}

void SimulationRun::validate() const {
  excitation.validate();
  detection.validate();
  if (excitation.mode == ExcitationMode::CW && (!(duration > 0.0) || !std::isfinite(duration)))
    throw DomainError("simulation: duration must be positive");
  if (excitation.mode == ExcitationMode::Pulsed && n_pulses == 0)
    throw DomainError("simulation: pulsed runs need at least one pulse");
  if (source == SourceKind::Emitter) {
    for (const auto& e : emitters) e.validate();
  } else {
    if (!(poisson_rate >= 0.0) || !(poisson_mean_per_pulse >= 0.0) || !(poisson_decay >= 0.0))
      throw DomainError("simulation: Poisson source parameters must be >= 0");
  }
}

double SimulationRun::acquisition_time() const {
  return excitation.mode == ExcitationMode::CW ? duration
                                               : static_cast<double>(n_pulses) * excitation.period;
}

TimeTagStream simulate_run(const SimulationRun& run) {
  run.validate();
  const double t_acq = run.acquisition_time();
  const bool pulsed = run.excitation.mode == ExcitationMode::Pulsed;
  const double collection = run.detection.collection_efficiency;

  std::vector<std::vector<double>> parts;
  if (run.source == SourceKind::Poisson) {
    const auto seed = derive_seed(run.seed, StreamKey::Source);
    parts.push_back(pulsed ? simulate_poisson_pulsed(run.poisson_mean_per_pulse * collection, run.excitation,
                                                     run.poisson_decay, run.n_pulses, seed)
                           : simulate_poisson_cw(run.poisson_rate * collection, t_acq, seed));
  } else {
    parts.resize(run.emitters.size());
    auto one = [&](std::size_t i) {
      const auto seed = derive_seed(run.seed, StreamKey::Emitter, i);
      const EmissionOptions opts{collection, nullptr};
      parts[i] = pulsed ? simulate_emission_pulsed(run.emitters[i], run.excitation, run.n_pulses, seed, opts)
                        : simulate_emission_cw(run.emitters[i], run.excitation.power_mw, t_acq, seed, opts);
    };
    unsigned workers = run.threads ? run.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(parts.size()));
    if (workers <= 1) {
      for (std::size_t i = 0; i < parts.size(); ++i) one(i);
    } else {
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < parts.size(); i += workers) one(i);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
  }
  const auto emissions = superpose(parts);
  return detect(emissions, run.detection, t_acq, derive_seed(run.seed, StreamKey::Detection));
}

BurstStats burst_statistics(std::span<const double> times, double gap_threshold) {
  BurstStats s;
  if (times.empty()) return s;
  double duration_sum = 0.0;
  double gap_sum = 0.0;
  std::size_t gaps = 0;
  double burst_start = times[0];
  for (std::size_t i = 1; i <= times.size(); ++i) {
    if (i == times.size() || times[i] - times[i - 1] >= gap_threshold) {
      duration_sum += times[i - 1] - burst_start;
      ++s.bursts;
      if (i < times.size()) {
        gap_sum += times[i] - times[i - 1];
        ++gaps;
        burst_start = times[i];
      }
    }
  }
  s.mean_duration = duration_sum / static_cast<double>(s.bursts);
  s.mean_gap = gaps ? gap_sum / static_cast<double>(gaps) : 0.0;
  s.mean_photons = static_cast<double>(times.size()) / static_cast<double>(s.bursts);
  return s;
}

} // namespace spsim
