#pragma once

#include "core/tags.hpp"

#include <cstdint>
#include <vector>

namespace spsim {

enum class Estimator { StartStop, FullCross };

/// Full-acquisition averages entering the Poisson normalisation.
struct Acquisition {
  double n1 = 0.0;       // s^-1
  double n2 = 0.0;       // s^-1
  double duration = 0.0; // s

  static Acquisition of(const TimeTagStream& stream);
};

/// Uniform delay binning in integer picoseconds, tau = t(ch2) - t(ch1).
struct BinSpec {
  std::int64_t width_ps = 0;
  std::int64_t tau_min_ps = 0;
  std::int64_t tau_max_ps = 0;

  /// Bins centred on zero delay, covering at least [-half_span, half_span].
  static BinSpec centered(std::int64_t width_ps, std::int64_t half_span_ps);
  /// Seconds rounded to the nearest picosecond.
  static BinSpec from_seconds(double width, double tau_min, double tau_max);

  void validate() const;
  std::size_t bins() const { return static_cast<std::size_t>((tau_max_ps - tau_min_ps) / width_ps); }
};

struct CorrelationHistogram {
  BinSpec spec;
  std::vector<std::uint64_t> counts;
  Acquisition acquisition;
  Estimator estimator = Estimator::FullCross;

  double bin_width() const { return static_cast<double>(spec.width_ps) * 1e-12; }
  double tau_min() const { return static_cast<double>(spec.tau_min_ps) * 1e-12; }
  double tau_max() const { return static_cast<double>(spec.tau_max_ps) * 1e-12; }
  double bin_lower(std::size_t i) const;
  double bin_center(std::size_t i) const;
  /// Bin holding delay tau (floor rule: an exact edge belongs to the upper bin),
  /// or -1 outside the span.
  std::ptrdiff_t bin_of(std::int64_t tau_ps) const;
  std::uint64_t total() const;
};

/// TAC/MCA emulation: every channel-1 photon starts a clock stopped by the
/// first channel-2 photon at or after t1 + tau_min (tau_min < 0 acts as a
/// delay line on the stop channel). One count per start whose stop lands
/// before tau_max.
CorrelationHistogram start_stop_histogram(const TimeTagStream& stream, const BinSpec& spec);

/// All channel-1/channel-2 pairs with tau_min <= t2 - t1 < tau_max.
CorrelationHistogram full_cross_histogram(const TimeTagStream& stream, const BinSpec& spec);

CorrelationHistogram correlate(const TimeTagStream& stream, const BinSpec& spec, Estimator estimator);

/// C_N(tau) = c(tau) / (N1 N2 w T). DomainError when any factor is zero.
std::vector<double> normalize_cw(const CorrelationHistogram& hist);

/// Poisson variance of each normalised bin, max(c, 1) / (N1 N2 w T)^2.
std::vector<double> normalized_variance(const CorrelationHistogram& hist);

/// rho = S / (S + B).
double rho_from_sb(double signal, double background);

struct G2Estimate {
  std::vector<double> tau;       // bin centres, s
  double bin_width = 0.0;        // s
  std::vector<double> values;
  std::vector<double> variances;
  std::vector<bool> clamped;     // corrected value was negative and set to 0
  double rho = 1.0;
  bool correction_applied = false;

  /// Index of the bin containing zero delay, or -1.
  std::ptrdiff_t zero_bin() const;
};

/// g2 = [C_N - (1 - rho^2)] / rho^2, clamped at 0 with a per-bin flag.
G2Estimate correct_background(const G2Estimate& normalized, double rho);

/// Uncorrected estimate (C_N values) with delay grid and variances.
G2Estimate g2_estimate(const CorrelationHistogram& hist);

/// Value of the bin containing tau = 0.
double zero_delay_value(const G2Estimate& g2);

} // namespace spsim
