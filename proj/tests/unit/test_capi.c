#include <spsim/spsim.h>

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                       \
  do {                                                                     \
    if (!(cond)) {                                                         \
      fprintf(stderr, "%s:%d: expected %s (%s)\n", __FILE__, __LINE__, #cond, \
              spsim_last_error());                                         \
      ++failures;                                                          \
    }                                                                      \
  } while (0)

static void test_config(void) {
  spsim_config* cfg = NULL;
  char buf[64];
  size_t len = 0;
  EXPECT(spsim_config_default(&cfg) == SPSIM_OK);
  EXPECT(spsim_config_set(cfg, "excitation.power_mw", "1.25") == SPSIM_OK);
  EXPECT(spsim_config_get(cfg, "excitation.power_mw", buf, sizeof buf, &len) == SPSIM_OK);
  EXPECT(strcmp(buf, "1.25") == 0 && len == 4);

  EXPECT(spsim_config_set(cfg, "no.such.key", "1") == SPSIM_ERR_CONFIG);
  EXPECT(strstr(spsim_last_error(), "no.such.key") != NULL);
  /* a rejected value leaves the configuration unchanged */
  EXPECT(spsim_config_set(cfg, "detection.split_ratio", "2") == SPSIM_ERR_CONFIG);
  EXPECT(spsim_config_get(cfg, "detection.split_ratio", buf, sizeof buf, &len) == SPSIM_OK);
  EXPECT(strcmp(buf, "0.5") == 0);

  /* size query, short buffer, then full copy */
  EXPECT(spsim_config_emit(cfg, NULL, 0, &len) == SPSIM_OK);
  EXPECT(len > 100);
  EXPECT(spsim_config_emit(cfg, buf, sizeof buf, &len) == SPSIM_ERR_BUFFER);
  char* text = malloc(len + 1);
  EXPECT(spsim_config_emit(cfg, text, len + 1, &len) == SPSIM_OK);
  EXPECT(strlen(text) == len);

  spsim_config* again = NULL;
  EXPECT(spsim_config_parse(text, &again) == SPSIM_OK);
  EXPECT(spsim_config_get(again, "excitation.power_mw", buf, sizeof buf, &len) == SPSIM_OK);
  EXPECT(strcmp(buf, "1.25") == 0);
  free(text);
  spsim_config_free(again);
  spsim_config_free(cfg);

  EXPECT(spsim_config_parse("seed = 1\nseed = 2\n", &cfg) == SPSIM_ERR_CONFIG);
  EXPECT(spsim_config_default(NULL) == SPSIM_ERR_ARGUMENT);
  spsim_config_free(NULL);
}

static void test_pipeline(const char* dir) {
  spsim_config* cfg = NULL;
  spsim_tags* tags = NULL;
  spsim_histogram* hist = NULL;
  EXPECT(spsim_config_default(&cfg) == SPSIM_OK);
  EXPECT(spsim_config_set(cfg, "duration_s", "0.05") == SPSIM_OK);
  EXPECT(spsim_config_set(cfg, "detection.extra_loss", "1") == SPSIM_OK);
  EXPECT(spsim_simulate(cfg, &tags) == SPSIM_OK);
  EXPECT(spsim_tags_count(tags, 1) > 100);
  EXPECT(spsim_tags_duration_ps(tags) == 50000000000ULL);

  EXPECT(spsim_correlate(tags, 1.0, 50.0, SPSIM_FULL_CROSS, &hist) == SPSIM_OK);
  EXPECT(spsim_histogram_bins(hist) == 101);
  double cn0 = -1.0, g2 = -1.0;
  EXPECT(spsim_histogram_zero_delay(hist, 0.0, &cn0, &g2) == SPSIM_OK);
  EXPECT(cn0 >= 0.0 && cn0 < 0.5);
  EXPECT(isnan(g2));
  size_t len = 0;
  EXPECT(spsim_histogram_csv(hist, 0.9, NULL, 0, &len) == SPSIM_OK);
  char* csv = malloc(len + 1);
  EXPECT(spsim_histogram_csv(hist, 0.9, csv, len + 1, &len) == SPSIM_OK);
  EXPECT(strncmp(csv, "tau_ps,counts,c_normalized,g2_corrected\n", 40) == 0);
  free(csv);

  char path[512];
  snprintf(path, sizeof path, "%s/capi_tags.ptag", dir);
  EXPECT(spsim_tags_write(tags, path, SPSIM_TAGS_BINARY, cfg) == SPSIM_OK);
  spsim_tags* back = NULL;
  EXPECT(spsim_tags_read(path, &back) == SPSIM_OK);
  EXPECT(spsim_tags_count(back, 1) == spsim_tags_count(tags, 1));
  EXPECT(spsim_tags_count(back, 2) == spsim_tags_count(tags, 2));
  EXPECT(spsim_tags_duration_ps(back) == spsim_tags_duration_ps(tags));
  size_t n = spsim_tags_count(tags, 2);
  uint64_t* a = malloc(n * sizeof *a);
  uint64_t* b = malloc(n * sizeof *b);
  EXPECT(spsim_tags_copy(tags, 2, a, n, &len) == SPSIM_OK && len == n);
  EXPECT(spsim_tags_copy(back, 2, b, n, &len) == SPSIM_OK);
  EXPECT(memcmp(a, b, n * sizeof *a) == 0);
  free(a);
  free(b);
  remove(path);
  snprintf(path, sizeof path, "%s/capi_tags.ptag.meta", dir);
  remove(path);

  EXPECT(spsim_tags_read("/nonexistent/x.ptag", &back) == SPSIM_ERR_IO);
  spsim_tags_free(back);
  spsim_histogram_free(hist);
  spsim_tags_free(tags);
  spsim_config_free(cfg);
}

static void test_arrays_and_budget(void) {
  const uint64_t ch1[] = {100, 50};
  const uint64_t ch2[] = {75};
  spsim_tags* tags = NULL;
  EXPECT(spsim_tags_from_arrays(ch1, 2, ch2, 1, 1000, &tags) == SPSIM_ERR_DATA);
  EXPECT(tags == NULL);
  const uint64_t ok1[] = {50, 100};
  EXPECT(spsim_tags_from_arrays(ok1, 2, ch2, 1, 1000, &tags) == SPSIM_OK);
  spsim_histogram* hist = NULL;
  EXPECT(spsim_correlate(tags, 0.0, 1.0, SPSIM_START_STOP, &hist) == SPSIM_ERR_ARGUMENT);
  spsim_tags_free(tags);

  spsim_budget b;
  EXPECT(spsim_two_photon_budget(0.21, 2e-3, 1e7, &b) == SPSIM_OK);
  EXPECT(fabs(b.two_photon_rate - 4.2) < 1e-9);
  EXPECT(spsim_two_photon_budget(0.21, 2.0, 1e7, &b) == SPSIM_ERR_DOMAIN);

  spsim_power_point pts[3] = {{0.5, 0.04 + 0.5 * 0.0133, 0}, {1.0, 0.04 + 0.0133, 0}, {2.0, 0.04 + 2 * 0.0133, 0}};
  spsim_lifetime_fit lf;
  EXPECT(spsim_extrapolate_lifetime(pts, 3, &lf) == SPSIM_OK);
  EXPECT(fabs(lf.lifetime_ns - 25.0) < 1e-9);
  EXPECT(spsim_extrapolate_lifetime(pts, 2, &lf) != SPSIM_OK);
  EXPECT(spsim_version() != NULL && strlen(spsim_version()) > 0);
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : ".";
  test_config();
  test_pipeline(dir);
  test_arrays_and_budget();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}
