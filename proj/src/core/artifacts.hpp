#pragma once

#include "core/correlate.hpp"
#include "core/fitting.hpp"
#include "core/pulsed.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spsim {

/// Canonical artifact names inside a run directory.
inline constexpr std::string_view kCorrelationArtifact = "correlation.csv";
inline constexpr std::string_view kPulsedPeaksArtifact = "pulsed_peaks.csv";
inline constexpr std::string_view kPulsedSummaryArtifact = "pulsed_summary.txt";
inline constexpr std::string_view kLifetimeArtifact = "lifetime.txt";
inline constexpr std::string_view kSaturationArtifact = "saturation.txt";
inline constexpr std::string_view kBudgetArtifact = "budget.txt";

/// tau_ps (lower bin edge), counts, c_normalized and, with rho, g2_corrected.
std::string histogram_csv(const CorrelationHistogram& hist, std::optional<double> rho);

struct HistogramRow {
  std::int64_t tau_ps = 0;
  std::uint64_t counts = 0;
  double c_normalized = 0.0;
  std::optional<double> g2_corrected;
};

/// Reads back histogram_csv output. DataError with byte offsets.
std::vector<HistogramRow> parse_histogram_csv(std::string_view text, std::string_view origin);

/// Row whose bin contains zero delay; nullopt when absent.
std::optional<HistogramRow> zero_delay_row(const std::vector<HistogramRow>& rows);

/// Peaks table: m, raw_area, raw_error, normalized_area, normalized_error, fit_rms.
std::string pulsed_peaks_csv(const PulsedPeakReport& report);

std::string pulsed_summary_text(const PulsedPeakReport& report, const BlinkingFit& blinking,
                                const PhotonBudget& budget);
std::string lifetime_text(const LifetimeExtrapolation& fit, std::span<const PowerPoint> series);
std::string saturation_text(const FitResult& fit);
std::string budget_text(const PhotonBudget& budget);

/// power_mw,gamma_per_ns[,uncertainty_per_ns] with a header line.
std::vector<PowerPoint> parse_power_series(std::string_view text, std::string_view origin);
/// power_mw,rate_per_s[,uncertainty_per_s] with a header line.
std::vector<SaturationPoint> parse_saturation_points(std::string_view text, std::string_view origin);

/// Human-readable summary of whichever artifacts the directory holds, with
/// a reference column of the published values. Missing artifacts show as
/// "not computed"; a directory with none of them is a DataError naming
/// every missing file.
std::string run_report(const std::filesystem::path& dir);

} // namespace spsim
