#pragma once

#include "core/model.hpp"
#include "core/tags.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace spsim {

/// Detection chain between the emitter and the time tagger.
struct DetectionParams {
  double split_ratio = 0.5;           // probability of going to channel 1
  double efficiency_ch1 = 1.0;
  double efficiency_ch2 = 1.0;
  /// Collection and transmission losses ahead of the beamsplitter. Applied
  /// while the emission stream is generated, so undetectable photons are
  /// never stored.
  double collection_efficiency = 1.0;
  double jitter_sigma = 300e-12;      // s, per detector
  double dead_time = 0.0;             // s, per channel
  double background_rate = 0.0;      // s^-1, Poissonian, ahead of the beamsplitter

  void validate() const;
};

/// Optional bookkeeping of one trajectory, filled when requested.
struct EmissionTrace {
  std::array<double, 3> residence{};  // s spent in g, e, s
  std::uint64_t jumps = 0;
  std::uint64_t shelvings = 0;
  std::vector<double> on_durations;   // completed bright periods (shelf exit to shelf entry)
  std::vector<double> off_durations;  // completed shelf periods
  /// Per recorded emission: CW, index of the bright period it belongs to;
  /// pulsed, index of the pulse period in which the emitting excitation happened.
  std::vector<std::uint64_t> labels;
};

struct EmissionOptions {
  /// Extra thinning applied at emission, on top of the quantum efficiency.
  double collection = 1.0;
  EmissionTrace* trace = nullptr;
};

/// Exact continuous-time simulation of the three-level chain under CW pump.
/// Returns strictly increasing emission times (s) in [0, duration). The
/// initial state is drawn from the stationary distribution.
std::vector<double> simulate_emission_cw(const EmitterParams& params, double power_mw,
                                         double duration, std::uint64_t seed,
                                         const EmissionOptions& options = {});

/// Same chain under a rectangular pulse train: pump rate kappa*P during
/// [n*period, n*period + width), zero in between. Starts from the periodic
/// steady state and stops at n_pulses * period.
std::vector<double> simulate_emission_pulsed(const EmitterParams& params,
                                             const ExcitationConfig& excitation,
                                             std::uint64_t n_pulses, std::uint64_t seed,
                                             const EmissionOptions& options = {});

/// Homogeneous Poisson photon stream.
std::vector<double> simulate_poisson_cw(double rate, double duration, std::uint64_t seed);

/// Pulsed Poissonian light: a Poisson number of photons per pulse, each
/// emitted at a uniform time within the pulse plus an exponential delay.
/// Emissions past the end of the last period are dropped.
std::vector<double> simulate_poisson_pulsed(double mean_per_pulse, const ExcitationConfig& excitation,
                                            double decay_time, std::uint64_t n_pulses,
                                            std::uint64_t seed);

/// Merges sorted emission streams.
std::vector<double> superpose(std::span<const std::vector<double>> streams);

/// Background, beamsplitter, per-channel efficiency, Gaussian jitter,
/// integer-picosecond quantisation, re-sort, dead time, clamp to [0, duration].
TimeTagStream detect(std::span<const double> emissions, const DetectionParams& det,
                     double duration, std::uint64_t seed);

enum class SourceKind { Emitter, Poisson };

struct SimulationRun {
  std::uint64_t seed = 1;
  ExcitationConfig excitation;
  std::vector<EmitterParams> emitters;
  DetectionParams detection;
  double duration = 1.0;              // s, CW acquisition time
  std::uint64_t n_pulses = 0;         // pulsed acquisition length
  SourceKind source = SourceKind::Emitter;
  double poisson_rate = 0.0;          // s^-1 (CW Poisson source)
  double poisson_mean_per_pulse = 0.0;
  double poisson_decay = 0.0;         // s
  unsigned threads = 0;               // 0: hardware concurrency

  void validate() const;
  double acquisition_time() const;
};

/// Full chain. Emitters are simulated in parallel; the result is identical
/// for any thread count.
TimeTagStream simulate_run(const SimulationRun& run);

/// Bursts are maximal runs of photons whose successive gaps stay below the
/// threshold.
struct BurstStats {
  std::size_t bursts = 0;
  double mean_duration = 0.0; // first to last photon
  double mean_gap = 0.0;      // last photon of a burst to first of the next
  double mean_photons = 0.0;
};
BurstStats burst_statistics(std::span<const double> times, double gap_threshold);

} // namespace spsim
