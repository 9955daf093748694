#include "spsim/spsim.h"

#include "core/artifacts.hpp"
#include "core/config.hpp"
#include "core/correlate.hpp"
#include "core/errors.hpp"
#include "core/fitting.hpp"
#include "core/plot.hpp"
#include "core/pulsed.hpp"
#include "core/sim.hpp"
#include "core/tags.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>

struct spsim_config {
  spsim::RunConfig cfg;
};

struct spsim_tags {
  spsim::TimeTagStream stream;
};

struct spsim_histogram {
  spsim::CorrelationHistogram hist;
};

struct spsim_pulsed_report {
  spsim::PulsedPeakReport report;
  spsim::BlinkingFit blinking;
  spsim::PhotonBudget budget;
};

namespace {

thread_local std::string g_last_error;

spsim_status fail(spsim_status code, std::string message) {
  g_last_error = std::move(message);
  return code;
}

/// Runs f, translating exceptions to status codes.
template <class F>
spsim_status guarded(F&& f) noexcept {
  try {
    g_last_error.clear();
    return f();
  } catch (const spsim::FitError& e) {
    return fail(SPSIM_ERR_FIT, e.what());
  } catch (const spsim::ConfigError& e) {
    return fail(SPSIM_ERR_CONFIG, e.what());
  } catch (const spsim::DataError& e) {
    return fail(SPSIM_ERR_DATA, e.what());
  } catch (const spsim::IoError& e) {
    return fail(SPSIM_ERR_IO, e.what());
  } catch (const spsim::DomainError& e) {
    return fail(SPSIM_ERR_DOMAIN, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPSIM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPSIM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SPSIM_ERR_INTERNAL, "unknown error");
  }
}

spsim_status copy_text(const std::string& s, char* buf, std::size_t cap, std::size_t* len) {
  if (len) *len = s.size();
  if (buf == nullptr && cap == 0) return SPSIM_OK;
  if (buf == nullptr || cap < s.size() + 1)
    return fail(SPSIM_ERR_BUFFER, "buffer of " + std::to_string(cap) + " bytes is too small for " +
                                      std::to_string(s.size() + 1));
  std::memcpy(buf, s.data(), s.size());
  buf[s.size()] = '\0';
  return SPSIM_OK;
}

#define SPSIM_REQUIRE(cond, what)                                   \
  do {                                                              \
    if (!(cond)) return fail(SPSIM_ERR_ARGUMENT, what);             \
  } while (0)

std::optional<double> rho_option(double rho) {
  if (rho > 0.0) return rho;
  return std::nullopt;
}

spsim::G2Estimate estimate(const spsim::CorrelationHistogram& h, double rho) {
  auto g = spsim::g2_estimate(h);
  if (rho > 0.0) g = spsim::correct_background(g, rho);
  return g;
}

} // namespace

extern "C" {

const char* spsim_last_error(void) { return g_last_error.c_str(); }

const char* spsim_version(void) { return "0.1.0"; }

spsim_status spsim_write_file(const char* path, const char* data, size_t len) {
  SPSIM_REQUIRE(path && (data || len == 0), "spsim_write_file: null argument");
  return guarded([&] {
    spsim::write_file_atomic(path, std::string_view(data ? data : "", len));
    return SPSIM_OK;
  });
}

// --- configuration ----------------------------------------------------------

spsim_status spsim_config_default(spsim_config** out) {
  SPSIM_REQUIRE(out, "spsim_config_default: null output");
  return guarded([&] {
    *out = new spsim_config{};
    return SPSIM_OK;
  });
}

spsim_status spsim_config_parse(const char* text, spsim_config** out) {
  SPSIM_REQUIRE(text && out, "spsim_config_parse: null argument");
  return guarded([&] {
    auto cfg = spsim::RunConfig::parse(text);
    *out = new spsim_config{std::move(cfg)};
    return SPSIM_OK;
  });
}

spsim_status spsim_config_load(const char* path, spsim_config** out) {
  SPSIM_REQUIRE(path && out, "spsim_config_load: null argument");
  return guarded([&] {
    auto cfg = spsim::RunConfig::load(path);
    *out = new spsim_config{std::move(cfg)};
    return SPSIM_OK;
  });
}

spsim_status spsim_config_set(spsim_config* cfg, const char* key, const char* value) {
  SPSIM_REQUIRE(cfg && key && value, "spsim_config_set: null argument");
  return guarded([&] {
    auto copy = cfg->cfg;
    copy.set(key, value);
    copy.validate();
    cfg->cfg = std::move(copy);
    return SPSIM_OK;
  });
}

spsim_status spsim_config_get(const spsim_config* cfg, const char* key, char* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(cfg && key, "spsim_config_get: null argument");
  return guarded([&] { return copy_text(cfg->cfg.get(key), buf, cap, len); });
}

spsim_status spsim_config_emit(const spsim_config* cfg, char* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(cfg, "spsim_config_emit: null config");
  return guarded([&] { return copy_text(cfg->cfg.emit(), buf, cap, len); });
}

void spsim_config_free(spsim_config* cfg) { delete cfg; }

// --- tags ---------------------------------------------------------------------

spsim_status spsim_simulate(const spsim_config* cfg, spsim_tags** out) {
  SPSIM_REQUIRE(cfg && out, "spsim_simulate: null argument");
  return guarded([&] {
    auto stream = spsim::simulate_run(cfg->cfg.simulation_run());
    *out = new spsim_tags{std::move(stream)};
    return SPSIM_OK;
  });
}

spsim_status spsim_tags_read(const char* path, spsim_tags** out) {
  SPSIM_REQUIRE(path && out, "spsim_tags_read: null argument");
  return guarded([&] {
    auto stream = spsim::read_tags(path);
    *out = new spsim_tags{std::move(stream)};
    return SPSIM_OK;
  });
}

spsim_status spsim_tags_write(const spsim_tags* tags, const char* path, spsim_tag_format format,
                              const spsim_config* cfg) {
  SPSIM_REQUIRE(tags && path, "spsim_tags_write: null argument");
  SPSIM_REQUIRE(format == SPSIM_TAGS_BINARY || format == SPSIM_TAGS_CSV, "spsim_tags_write: unknown format");
  return guarded([&] {
    const auto fmt = format == SPSIM_TAGS_CSV ? spsim::TagFormat::Csv : spsim::TagFormat::Binary;
    spsim::write_tags(tags->stream, path, fmt, cfg ? cfg->cfg.seed : 0, cfg ? cfg->cfg.emit() : std::string());
    return SPSIM_OK;
  });
}

spsim_status spsim_tags_from_arrays(const uint64_t* ch1, size_t n1, const uint64_t* ch2, size_t n2,
                                    uint64_t duration_ps, spsim_tags** out) {
  SPSIM_REQUIRE(out && (ch1 || n1 == 0) && (ch2 || n2 == 0), "spsim_tags_from_arrays: null argument");
  return guarded([&] {
    spsim::TimeTagStream s;
    s.ch1.assign(ch1, ch1 + n1);
    s.ch2.assign(ch2, ch2 + n2);
    s.duration_ps = duration_ps;
    s.validate();
    *out = new spsim_tags{std::move(s)};
    return SPSIM_OK;
  });
}

size_t spsim_tags_count(const spsim_tags* tags, int channel) {
  if (!tags || (channel != 1 && channel != 2)) return 0;
  return tags->stream.channel(channel).size();
}

uint64_t spsim_tags_duration_ps(const spsim_tags* tags) { return tags ? tags->stream.duration_ps : 0; }

spsim_status spsim_tags_copy(const spsim_tags* tags, int channel, uint64_t* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(tags && (channel == 1 || channel == 2), "spsim_tags_copy: bad argument");
  const auto& v = tags->stream.channel(channel);
  if (len) *len = v.size();
  if (!buf && cap == 0) return SPSIM_OK;
  if (!buf || cap < v.size()) return fail(SPSIM_ERR_BUFFER, "spsim_tags_copy: buffer too small");
  std::copy(v.begin(), v.end(), buf);
  return SPSIM_OK;
}

void spsim_tags_free(spsim_tags* tags) { delete tags; }

// --- correlation ----------------------------------------------------------------

spsim_status spsim_correlate(const spsim_tags* tags, double bin_ns, double span_ns, spsim_estimator estimator,
                             spsim_histogram** out) {
  SPSIM_REQUIRE(tags && out, "spsim_correlate: null argument");
  SPSIM_REQUIRE(estimator == SPSIM_START_STOP || estimator == SPSIM_FULL_CROSS, "spsim_correlate: unknown estimator");
  SPSIM_REQUIRE(bin_ns > 0.0 && span_ns > 0.0 && std::isfinite(bin_ns) && std::isfinite(span_ns),
                "spsim_correlate: bin width and span must be positive");
  return guarded([&] {
    const auto width = std::llround(bin_ns * 1000.0);
    if (width < 1) throw spsim::DomainError("bin width below one picosecond");
    const auto spec = spsim::BinSpec::centered(width, std::llround(span_ns * 1000.0));
    const auto est = estimator == SPSIM_START_STOP ? spsim::Estimator::StartStop : spsim::Estimator::FullCross;
    *out = new spsim_histogram{spsim::correlate(tags->stream, spec, est)};
    return SPSIM_OK;
  });
}

size_t spsim_histogram_bins(const spsim_histogram* hist) { return hist ? hist->hist.counts.size() : 0; }

spsim_status spsim_histogram_counts(const spsim_histogram* hist, uint64_t* buf, size_t cap) {
  SPSIM_REQUIRE(hist && buf, "spsim_histogram_counts: null argument");
  if (cap < hist->hist.counts.size()) return fail(SPSIM_ERR_BUFFER, "spsim_histogram_counts: buffer too small");
  std::copy(hist->hist.counts.begin(), hist->hist.counts.end(), buf);
  return SPSIM_OK;
}

spsim_status spsim_histogram_values(const spsim_histogram* hist, double rho, double* buf, size_t cap) {
  SPSIM_REQUIRE(hist && buf, "spsim_histogram_values: null argument");
  if (cap < hist->hist.counts.size()) return fail(SPSIM_ERR_BUFFER, "spsim_histogram_values: buffer too small");
  return guarded([&] {
    const auto g = estimate(hist->hist, rho);
    std::copy(g.values.begin(), g.values.end(), buf);
    return SPSIM_OK;
  });
}

spsim_status spsim_histogram_zero_delay(const spsim_histogram* hist, double rho, double* cn0, double* g2) {
  SPSIM_REQUIRE(hist, "spsim_histogram_zero_delay: null histogram");
  return guarded([&] {
    const auto raw = spsim::g2_estimate(hist->hist);
    if (cn0) *cn0 = spsim::zero_delay_value(raw);
    if (g2)
      *g2 = rho > 0.0 ? spsim::zero_delay_value(spsim::correct_background(raw, rho))
                      : std::numeric_limits<double>::quiet_NaN();
    return SPSIM_OK;
  });
}

spsim_status spsim_histogram_csv(const spsim_histogram* hist, double rho, char* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(hist, "spsim_histogram_csv: null histogram");
  return guarded([&] { return copy_text(spsim::histogram_csv(hist->hist, rho_option(rho)), buf, cap, len); });
}

spsim_status spsim_histogram_svg(const spsim_histogram* hist, double rho, char* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(hist, "spsim_histogram_svg: null histogram");
  return guarded([&] {
    const auto g = estimate(hist->hist, rho);
    spsim::PlotSpec plot;
    plot.title = rho > 0.0 ? "background-corrected g2" : "normalised coincidences";
    plot.x_label = "delay (ns)";
    plot.y_label = rho > 0.0 ? "g2" : "C_N";
    spsim::PlotSeries s;
    for (std::size_t i = 0; i < g.tau.size(); ++i) {
      s.x.push_back(g.tau[i] * 1e9);
      s.y.push_back(g.values[i]);
    }
    plot.series.push_back(std::move(s));
    return copy_text(spsim::render_svg(plot), buf, cap, len);
  });
}

void spsim_histogram_free(spsim_histogram* hist) { delete hist; }

spsim_status spsim_histogram_fit_dip(const spsim_histogram* hist, double rho, double window_ns, spsim_dip_fit* out) {
  SPSIM_REQUIRE(hist && out, "spsim_histogram_fit_dip: null argument");
  return guarded([&] {
    const auto fit = spsim::fit_g2_dip(estimate(hist->hist, rho), window_ns * 1e-9);
    out->gamma_per_ns = fit.value("Gamma") * 1e-9;
    out->gamma_error_per_ns = fit.error("Gamma") * 1e-9;
    out->contrast = fit.value("a");
    out->contrast_error = fit.error("a");
    out->residual_rms = fit.residual_rms;
    out->iterations = fit.iterations;
    return SPSIM_OK;
  });
}

// --- pulsed -----------------------------------------------------------------------

spsim_status spsim_analyze_pulsed(const spsim_tags* tags, const spsim_pulsed_options* options,
                                  spsim_pulsed_report** out) {
  SPSIM_REQUIRE(tags && options && out, "spsim_analyze_pulsed: null argument");
  SPSIM_REQUIRE(options->period_ns > 0.0 && options->bin_ns > 0.0 && options->peaks >= 1,
                "spsim_analyze_pulsed: period, bin width and peak count must be positive");
  return guarded([&] {
    const double period = options->period_ns * 1e-9;
    const auto width = std::llround(options->bin_ns * 1000.0);
    if (width < 1) throw spsim::DomainError("bin width below one picosecond");
    // One extra period on each side feeds the edge peaks of the fit.
    const auto half = std::llround((options->peaks + 1.5) * options->period_ns * 1000.0);
    const auto spec = spsim::BinSpec::centered(width, half);
    const auto hist = spsim::full_cross_histogram(tags->stream, spec);
    auto result = std::make_unique<spsim_pulsed_report>();
    const auto raw = spsim::segment_and_fit_peaks(hist, period, options->lifetime_hint_ns * 1e-9, options->peaks);
    result->report = spsim::normalize_peak_areas(raw, hist.acquisition);
    result->blinking = spsim::fit_blinking(result->report);
    const auto* zero = result->report.peak(0);
    const double p1 = spsim::detected_per_pulse(hist.acquisition, period);
    result->budget = spsim::two_photon_budget(zero ? std::max(zero->normalized_area, 0.0) : 0.0, std::min(p1, 1.0),
                                              1.0 / period);
    *out = result.release();
    return SPSIM_OK;
  });
}

spsim_status spsim_pulsed_get_summary(const spsim_pulsed_report* r, spsim_pulsed_summary* out) {
  SPSIM_REQUIRE(r && out, "spsim_pulsed_get_summary: null argument");
  const auto& rep = r->report;
  const auto* zero = rep.peak(0);
  out->period_ns = rep.period * 1e9;
  out->shared_lifetime_ns = rep.shared_lifetime * 1e9;
  out->shared_lifetime_error_ns = rep.shared_lifetime_error * 1e9;
  out->cn0 = zero ? zero->normalized_area : std::numeric_limits<double>::quiet_NaN();
  out->cn0_error = zero ? zero->normalized_error : std::numeric_limits<double>::quiet_NaN();
  out->t_on_ns = r->blinking.t_on * 1e9;
  out->t_on_error_ns = r->blinking.t_on_error * 1e9;
  out->t_off_ns = r->blinking.t_off * 1e9;
  out->t_off_error_ns = r->blinking.t_off_error * 1e9;
  out->blinking_degenerate = r->blinking.degenerate ? 1 : 0;
  out->p1 = r->budget.p1;
  out->p2 = r->budget.p2;
  out->single_photon_rate = r->budget.single_photon_rate;
  out->two_photon_rate = r->budget.two_photon_rate;
  out->span_counts = rep.span_counts;
  double sum = 0.0;
  for (const auto& p : rep.peaks) sum += p.raw_area;
  out->fitted_area_sum = sum;
  return SPSIM_OK;
}

size_t spsim_pulsed_peak_count(const spsim_pulsed_report* r) { return r ? r->report.peaks.size() : 0; }

spsim_status spsim_pulsed_peak(const spsim_pulsed_report* r, size_t i, spsim_peak* out) {
  SPSIM_REQUIRE(r && out, "spsim_pulsed_peak: null argument");
  SPSIM_REQUIRE(i < r->report.peaks.size(), "spsim_pulsed_peak: index out of range");
  const auto& p = r->report.peaks[i];
  *out = {p.index, p.raw_area, p.raw_error, p.normalized_area, p.normalized_error, p.fit_rms};
  return SPSIM_OK;
}

spsim_status spsim_pulsed_peaks_csv(const spsim_pulsed_report* r, char* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(r, "spsim_pulsed_peaks_csv: null report");
  return guarded([&] { return copy_text(spsim::pulsed_peaks_csv(r->report), buf, cap, len); });
}

spsim_status spsim_pulsed_summary_text(const spsim_pulsed_report* r, char* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(r, "spsim_pulsed_summary_text: null report");
  return guarded(
      [&] { return copy_text(spsim::pulsed_summary_text(r->report, r->blinking, r->budget), buf, cap, len); });
}

spsim_status spsim_pulsed_svg(const spsim_pulsed_report* r, char* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(r, "spsim_pulsed_svg: null report");
  return guarded([&] {
    spsim::PlotSpec plot;
    plot.title = "normalised peak areas";
    plot.x_label = "peak index m";
    plot.y_label = "C_N(m)";
    spsim::PlotSeries data;
    data.markers = true;
    data.label = "fitted areas";
    for (const auto& p : r->report.peaks) {
      data.x.push_back(p.index);
      data.y.push_back(p.normalized_area);
    }
    plot.series.push_back(std::move(data));
    if (!r->blinking.degenerate) {
      spsim::PlotSeries model;
      model.label = "blinking model";
      for (const auto& p : r->report.peaks) {
        if (p.index == 0) continue;
        model.x.push_back(p.index);
        model.y.push_back(spsim::blinking_peak_area(p.index, r->report.period, r->blinking.t_on, r->blinking.t_off));
      }
      plot.series.push_back(std::move(model));
    }
    return copy_text(spsim::render_svg(plot), buf, cap, len);
  });
}

void spsim_pulsed_free(spsim_pulsed_report* r) { delete r; }

// --- lifetime / saturation / budget --------------------------------------------------

namespace {

std::vector<spsim::PowerPoint> to_core(const spsim_power_point* points, size_t n) {
  std::vector<spsim::PowerPoint> out;
  for (size_t i = 0; i < n; ++i)
    out.push_back({points[i].power_mw, points[i].gamma_per_ns * 1e9, points[i].uncertainty_per_ns * 1e9});
  return out;
}

} // namespace

spsim_status spsim_read_power_series(const char* path, spsim_power_point* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(path, "spsim_read_power_series: null path");
  return guarded([&] {
    const auto pts = spsim::parse_power_series(spsim::read_file(path), path);
    if (len) *len = pts.size();
    if (!buf) return SPSIM_OK;
    if (cap < pts.size()) return fail(SPSIM_ERR_BUFFER, "spsim_read_power_series: buffer too small");
    for (size_t i = 0; i < pts.size(); ++i)
      buf[i] = {pts[i].power_mw, pts[i].gamma * 1e-9, pts[i].uncertainty * 1e-9};
    return SPSIM_OK;
  });
}

spsim_status spsim_extrapolate_lifetime(const spsim_power_point* points, size_t n, spsim_lifetime_fit* out) {
  SPSIM_REQUIRE(points && out, "spsim_extrapolate_lifetime: null argument");
  return guarded([&] {
    const auto fit = spsim::extrapolate_lifetime(to_core(points, n));
    *out = {fit.gamma0 * 1e-9, fit.gamma0_error * 1e-9, fit.slope * 1e-9,
            fit.slope_error * 1e-9, fit.lifetime * 1e9, fit.lifetime_error * 1e9};
    return SPSIM_OK;
  });
}

spsim_status spsim_lifetime_text(const spsim_power_point* points, size_t n, const spsim_lifetime_fit* fit, char* buf,
                                 size_t cap, size_t* len) {
  SPSIM_REQUIRE((points || n == 0) && fit, "spsim_lifetime_text: null argument");
  return guarded([&] {
    spsim::LifetimeExtrapolation f;
    f.gamma0 = fit->gamma0_per_ns * 1e9;
    f.gamma0_error = fit->gamma0_error_per_ns * 1e9;
    f.slope = fit->slope_per_ns_per_mw * 1e9;
    f.slope_error = fit->slope_error_per_ns_per_mw * 1e9;
    f.lifetime = fit->lifetime_ns * 1e-9;
    f.lifetime_error = fit->lifetime_error_ns * 1e-9;
    return copy_text(spsim::lifetime_text(f, to_core(points, n)), buf, cap, len);
  });
}

spsim_status spsim_read_saturation_points(const char* path, spsim_saturation_point* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(path, "spsim_read_saturation_points: null path");
  return guarded([&] {
    const auto pts = spsim::parse_saturation_points(spsim::read_file(path), path);
    if (len) *len = pts.size();
    if (!buf) return SPSIM_OK;
    if (cap < pts.size()) return fail(SPSIM_ERR_BUFFER, "spsim_read_saturation_points: buffer too small");
    for (size_t i = 0; i < pts.size(); ++i) buf[i] = {pts[i].power_mw, pts[i].rate, pts[i].uncertainty};
    return SPSIM_OK;
  });
}

spsim_status spsim_fit_saturation(const spsim_saturation_point* points, size_t n, spsim_saturation_fit* out) {
  SPSIM_REQUIRE(points && out, "spsim_fit_saturation: null argument");
  return guarded([&] {
    std::vector<spsim::SaturationPoint> pts;
    for (size_t i = 0; i < n; ++i) pts.push_back({points[i].power_mw, points[i].rate_per_s, points[i].uncertainty_per_s});
    const auto fit = spsim::fit_saturation(pts);
    *out = {fit.value("R_inf"), fit.error("R_inf"), fit.value("P_sat"), fit.error("P_sat"),
            fit.value("D"),     fit.error("D"),     fit.residual_rms};
    return SPSIM_OK;
  });
}

spsim_status spsim_saturation_text(const spsim_saturation_fit* fit, char* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(fit, "spsim_saturation_text: null fit");
  return guarded([&] {
    spsim::FitResult r;
    r.names = {"R_inf", "P_sat", "D"};
    r.parameters = Eigen::Vector3d(fit->r_inf_per_s, fit->p_sat_mw, fit->droop_per_mw);
    r.standard_errors = Eigen::Vector3d(fit->r_inf_error_per_s, fit->p_sat_error_mw, fit->droop_error_per_mw);
    r.residual_rms = fit->residual_rms;
    r.converged = true;
    return copy_text(spsim::saturation_text(r), buf, cap, len);
  });
}

spsim_status spsim_two_photon_budget(double cn0, double p1, double repetition_rate, spsim_budget* out) {
  SPSIM_REQUIRE(out, "spsim_two_photon_budget: null output");
  return guarded([&] {
    const auto b = spsim::two_photon_budget(cn0, p1, repetition_rate);
    *out = {b.cn0, b.p1, b.p2, b.repetition_rate, b.single_photon_rate, b.two_photon_rate, b.large_p1 ? 1 : 0};
    return SPSIM_OK;
  });
}

spsim_status spsim_budget_text(const spsim_budget* budget, char* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(budget, "spsim_budget_text: null budget");
  return guarded([&] {
    spsim::PhotonBudget b;
    b.cn0 = budget->cn0;
    b.p1 = budget->p1;
    b.p2 = budget->p2;
    b.repetition_rate = budget->repetition_rate;
    b.single_photon_rate = budget->single_photon_rate;
    b.two_photon_rate = budget->two_photon_rate;
    b.large_p1 = budget->large_p1 != 0;
    return copy_text(spsim::budget_text(b), buf, cap, len);
  });
}

spsim_status spsim_report(const char* run_dir, char* buf, size_t cap, size_t* len) {
  SPSIM_REQUIRE(run_dir, "spsim_report: null directory");
  return guarded([&] { return copy_text(spsim::run_report(run_dir), buf, cap, len); });
}

} // extern "C"
