/* Single-photon source simulation and correlation analysis: C interface.
 *
 * Every function returns an spsim_status. On failure a description is
 * available from spsim_last_error() until the next call on the same thread.
 * Objects are opaque and released with the matching *_free function, which
 * accepts NULL.
 *
 * Functions producing text take (buf, cap, len): the full length excluding
 * the terminator is stored in *len, and the text is copied when it fits in
 * cap bytes including the terminator. Pass buf = NULL, cap = 0 to query the
 * size; a short buffer gives SPSIM_ERR_BUFFER.
 *
 * Units: ns, mW and s^-1 at this boundary.
 */
#ifndef SPSIM_SPSIM_H
#define SPSIM_SPSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SPSIM_BUILDING_LIBRARY)
#    define SPSIM_API __declspec(dllexport)
#  else
#    define SPSIM_API __declspec(dllimport)
#  endif
#else
#  define SPSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spsim_status {
  SPSIM_OK = 0,
  SPSIM_ERR_ARGUMENT = 1,  /* null pointer or out-of-range argument */
  SPSIM_ERR_CONFIG = 2,
  SPSIM_ERR_DATA = 3,      /* malformed input file or unusable data */
  SPSIM_ERR_FIT = 4,       /* fit did not converge */
  SPSIM_ERR_DOMAIN = 5,    /* parameters outside a model's domain */
  SPSIM_ERR_IO = 6,
  SPSIM_ERR_BUFFER = 7,    /* output buffer too small */
  SPSIM_ERR_INTERNAL = 8
} spsim_status;

SPSIM_API const char* spsim_last_error(void);
SPSIM_API const char* spsim_version(void);

/* Atomic file write (temporary file, then rename). */
SPSIM_API spsim_status spsim_write_file(const char* path, const char* data, size_t len);

/* ---- configuration ------------------------------------------------------ */

typedef struct spsim_config spsim_config;

SPSIM_API spsim_status spsim_config_default(spsim_config** out);
SPSIM_API spsim_status spsim_config_parse(const char* text, spsim_config** out);
SPSIM_API spsim_status spsim_config_load(const char* path, spsim_config** out);
SPSIM_API spsim_status spsim_config_set(spsim_config* cfg, const char* key, const char* value);
SPSIM_API spsim_status spsim_config_get(const spsim_config* cfg, const char* key, char* buf, size_t cap, size_t* len);
SPSIM_API spsim_status spsim_config_emit(const spsim_config* cfg, char* buf, size_t cap, size_t* len);
SPSIM_API void spsim_config_free(spsim_config* cfg);

/* ---- time tags ------------------------------------------------------------ */

typedef struct spsim_tags spsim_tags;

typedef enum spsim_tag_format { SPSIM_TAGS_BINARY = 0, SPSIM_TAGS_CSV = 1 } spsim_tag_format;

/* Runs the simulation described by the configuration. */
SPSIM_API spsim_status spsim_simulate(const spsim_config* cfg, spsim_tags** out);
/* Reads a binary or CSV tag file (detected from the content) and its
 * metadata sidecar when present. */
SPSIM_API spsim_status spsim_tags_read(const char* path, spsim_tags** out);
/* Writes the tags plus the sidecar; cfg (may be NULL) is echoed into it. */
SPSIM_API spsim_status spsim_tags_write(const spsim_tags* tags, const char* path, spsim_tag_format format,
                                        const spsim_config* cfg);
SPSIM_API spsim_status spsim_tags_from_arrays(const uint64_t* ch1, size_t n1, const uint64_t* ch2, size_t n2,
                                              uint64_t duration_ps, spsim_tags** out);
SPSIM_API size_t spsim_tags_count(const spsim_tags* tags, int channel);
SPSIM_API uint64_t spsim_tags_duration_ps(const spsim_tags* tags);
/* Copies up to cap timestamps of a channel. */
SPSIM_API spsim_status spsim_tags_copy(const spsim_tags* tags, int channel, uint64_t* buf, size_t cap, size_t* len);
SPSIM_API void spsim_tags_free(spsim_tags* tags);

/* ---- correlation ---------------------------------------------------------- */

typedef struct spsim_histogram spsim_histogram;

typedef enum spsim_estimator { SPSIM_START_STOP = 0, SPSIM_FULL_CROSS = 1 } spsim_estimator;

/* Bins of width bin_ns centred on zero delay covering [-span_ns, span_ns]. */
SPSIM_API spsim_status spsim_correlate(const spsim_tags* tags, double bin_ns, double span_ns,
                                       spsim_estimator estimator, spsim_histogram** out);
SPSIM_API size_t spsim_histogram_bins(const spsim_histogram* hist);
SPSIM_API spsim_status spsim_histogram_counts(const spsim_histogram* hist, uint64_t* buf, size_t cap);
/* C_N per bin; with rho > 0 the background-corrected g2 instead. */
SPSIM_API spsim_status spsim_histogram_values(const spsim_histogram* hist, double rho, double* buf, size_t cap);
/* Value of the bin holding zero delay: C_N, and g2 when rho > 0 (else NaN). */
SPSIM_API spsim_status spsim_histogram_zero_delay(const spsim_histogram* hist, double rho, double* cn0, double* g2);
/* rho <= 0 omits the g2_corrected column. */
SPSIM_API spsim_status spsim_histogram_csv(const spsim_histogram* hist, double rho, char* buf, size_t cap,
                                           size_t* len);
SPSIM_API spsim_status spsim_histogram_svg(const spsim_histogram* hist, double rho, char* buf, size_t cap,
                                           size_t* len);
SPSIM_API void spsim_histogram_free(spsim_histogram* hist);

typedef struct spsim_dip_fit {
  double gamma_per_ns;
  double gamma_error_per_ns;
  double contrast;          /* a in 1 - a exp(-Gamma |tau|) */
  double contrast_error;
  double residual_rms;
  int iterations;
} spsim_dip_fit;

/* Dip fit over |tau| <= window_ns of C_N, or of g2 when rho > 0. */
SPSIM_API spsim_status spsim_histogram_fit_dip(const spsim_histogram* hist, double rho, double window_ns,
                                               spsim_dip_fit* out);

/* ---- pulsed analysis ------------------------------------------------------ */

typedef struct spsim_pulsed_report spsim_pulsed_report;

typedef struct spsim_pulsed_options {
  double period_ns;
  double bin_ns;
  int peaks;                /* reported on each side of zero */
  double lifetime_hint_ns;
} spsim_pulsed_options;

typedef struct spsim_pulsed_summary {
  double period_ns;
  double shared_lifetime_ns;
  double shared_lifetime_error_ns;
  double cn0;
  double cn0_error;
  double t_on_ns;
  double t_on_error_ns;
  double t_off_ns;
  double t_off_error_ns;
  int blinking_degenerate;
  double p1;
  double p2;
  double single_photon_rate;
  double two_photon_rate;
  double span_counts;
  double fitted_area_sum;
} spsim_pulsed_summary;

typedef struct spsim_peak {
  int index;
  double raw_area;
  double raw_error;
  double normalized_area;
  double normalized_error;
  double fit_rms;
} spsim_peak;

/* Full-cross histogram, peak fit, normalisation, blinking fit and budget. */
SPSIM_API spsim_status spsim_analyze_pulsed(const spsim_tags* tags, const spsim_pulsed_options* options,
                                            spsim_pulsed_report** out);
SPSIM_API spsim_status spsim_pulsed_get_summary(const spsim_pulsed_report* report, spsim_pulsed_summary* out);
SPSIM_API size_t spsim_pulsed_peak_count(const spsim_pulsed_report* report);
SPSIM_API spsim_status spsim_pulsed_peak(const spsim_pulsed_report* report, size_t i, spsim_peak* out);
SPSIM_API spsim_status spsim_pulsed_peaks_csv(const spsim_pulsed_report* report, char* buf, size_t cap, size_t* len);
SPSIM_API spsim_status spsim_pulsed_summary_text(const spsim_pulsed_report* report, char* buf, size_t cap,
                                                 size_t* len);
SPSIM_API spsim_status spsim_pulsed_svg(const spsim_pulsed_report* report, char* buf, size_t cap, size_t* len);
SPSIM_API void spsim_pulsed_free(spsim_pulsed_report* report);

/* ---- lifetime, saturation, budget ----------------------------------------- */

typedef struct spsim_power_point {
  double power_mw;
  double gamma_per_ns;
  double uncertainty_per_ns;  /* 0: unweighted */
} spsim_power_point;

typedef struct spsim_lifetime_fit {
  double gamma0_per_ns;
  double gamma0_error_per_ns;
  double slope_per_ns_per_mw;
  double slope_error_per_ns_per_mw;
  double lifetime_ns;
  double lifetime_error_ns;
} spsim_lifetime_fit;

/* Reads power_mw,gamma_per_ns[,uncertainty_per_ns]. *len receives the
 * point count; points are copied when it is <= cap. */
SPSIM_API spsim_status spsim_read_power_series(const char* path, spsim_power_point* buf, size_t cap, size_t* len);
SPSIM_API spsim_status spsim_extrapolate_lifetime(const spsim_power_point* points, size_t n, spsim_lifetime_fit* out);
SPSIM_API spsim_status spsim_lifetime_text(const spsim_power_point* points, size_t n, const spsim_lifetime_fit* fit,
                                           char* buf, size_t cap, size_t* len);

typedef struct spsim_saturation_point {
  double power_mw;
  double rate_per_s;
  double uncertainty_per_s;   /* 0: unweighted */
} spsim_saturation_point;

typedef struct spsim_saturation_fit {
  double r_inf_per_s;
  double r_inf_error_per_s;
  double p_sat_mw;
  double p_sat_error_mw;
  double droop_per_mw;
  double droop_error_per_mw;
  double residual_rms;
} spsim_saturation_fit;

SPSIM_API spsim_status spsim_read_saturation_points(const char* path, spsim_saturation_point* buf, size_t cap,
                                                    size_t* len);
SPSIM_API spsim_status spsim_fit_saturation(const spsim_saturation_point* points, size_t n, spsim_saturation_fit* out);
SPSIM_API spsim_status spsim_saturation_text(const spsim_saturation_fit* fit, char* buf, size_t cap, size_t* len);

typedef struct spsim_budget {
  double cn0;
  double p1;
  double p2;
  double repetition_rate;
  double single_photon_rate;
  double two_photon_rate;
  int large_p1;              /* p1 > 0.3 */
} spsim_budget;

SPSIM_API spsim_status spsim_two_photon_budget(double cn0, double p1, double repetition_rate, spsim_budget* out);
SPSIM_API spsim_status spsim_budget_text(const spsim_budget* budget, char* buf, size_t cap, size_t* len);

/* ---- report --------------------------------------------------------------- */

SPSIM_API spsim_status spsim_report(const char* run_dir, char* buf, size_t cap, size_t* len);

#ifdef __cplusplus
}
#endif

#endif
