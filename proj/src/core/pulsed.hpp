#pragma once

#include "core/correlate.hpp"
#include "core/fitting.hpp"

#include <vector>

namespace spsim {

struct PeakArea {
  int index = 0;                 // m, peak centred at m * period
  double raw_area = 0.0;         // c(m), counts
  double raw_error = 0.0;
  double normalized_area = 0.0;  // C_N(m), filled by normalize_peak_areas
  double normalized_error = 0.0;
  double fit_rms = 0.0;          // rms Pearson residual over the peak's window
};

struct PulsedPeakReport {
  double period = 0.0;           // s
  std::vector<PeakArea> peaks;   // contiguous indices, ascending
  double shared_lifetime = 0.0;  // s
  double shared_lifetime_error = 0.0;
  Acquisition acquisition;
  double span_counts = 0.0;      // coincidences inside the analysed span
  bool normalized = false;
  FitResult fit;

  const PeakArea* peak(int m) const;
};

/// Fraction of a two-sided exponential peak centred at `center` with decay
/// time tau_f that falls in [lower, upper).
double laplace_bin_fraction(double lower, double upper, double center, double tau_f);

/// Expected counts in [lower, upper) of a train of peaks with areas
/// areas[j] centred at (first_index + j) * period.
double peak_train_bin(double lower, double upper, double period, int first_index,
                      std::span<const double> areas, double tau_f);

/// Joint fit of the peaks of a pulsed correlation histogram.
///
/// The delay between photons from pulses m periods apart is the difference
/// of two exponential emission delays, so each peak is a two-sided
/// exponential of shared decay time tau_f, integrated over every bin. The
/// free parameters are the peak areas themselves (>= 0) and tau_f.
///
/// Peaks whose whole [m - 1/2, m + 1/2] period window lies inside the
/// histogram are reported, limited to |m| <= max_peak. The first peak beyond
/// each end of that span is fitted too, since its tail spills into the
/// span, but it is not reported. Weights come from a first pass with
/// data variances followed by a pass with model variances.
///
/// Throws DomainError for a histogram shorter than five periods and
/// FitError, carrying the last iterate, on non-convergence.
PulsedPeakReport segment_and_fit_peaks(const CorrelationHistogram& hist, double period,
                                       double lifetime_hint, int max_peak = 15);

/// C_N(m) = c(m) / (N1 N2 theta T).
PulsedPeakReport normalize_peak_areas(const PulsedPeakReport& report, const Acquisition& acquisition);

/// 1 + (T_off / T_on) exp(-(1/T_on + 1/T_off) |m| theta), m != 0.
double blinking_peak_area(int m, double period, double t_on, double t_off);

struct BlinkingFit {
  double t_on = 0.0;             // s
  double t_off = 0.0;            // s
  double t_on_error = 0.0;
  double t_off_error = 0.0;
  double ratio = 0.0;            // T_off / T_on
  double ratio_error = 0.0;      // +inf when degenerate
  double residual_rms = 0.0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  bool degenerate = false;       // no bunching: ratio 0, T_on infinite, T_off 0
  FitResult fit;
};

/// Weighted fit of the normalised areas with m != 0. Needs at least six
/// such peaks. When the peaks next to zero show no excess above 1 at the
/// 2 sigma level the result is flagged degenerate instead of fitted.
BlinkingFit fit_blinking(const PulsedPeakReport& report);

struct PhotonBudget {
  double p1 = 0.0;
  double cn0 = 0.0;
  double p2 = 0.0;
  double repetition_rate = 0.0;     // s^-1
  double single_photon_rate = 0.0;  // s^-1
  double two_photon_rate = 0.0;     // s^-1
  bool large_p1 = false;            // p1 > 0.3, where p2 << p1 no longer holds
};

/// p2 = cn0 p1^2 / 2 and the corresponding rates.
PhotonBudget two_photon_budget(double cn0, double p1, double repetition_rate);

/// Detected photons per pulse over both channels, (N1 + N2) theta.
double detected_per_pulse(const Acquisition& acquisition, double period);

} // namespace spsim
