// spsim command-line front end. Uses only the C interface.
#include "spsim/spsim.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kFit = 4 };

struct Failure {
  int code;
  std::string message;
};

int exit_code(spsim_status s) {
  switch (s) {
  case SPSIM_OK: return kOk;
  case SPSIM_ERR_ARGUMENT:
  case SPSIM_ERR_CONFIG: return kConfig;
  case SPSIM_ERR_DATA:
  case SPSIM_ERR_DOMAIN:
  case SPSIM_ERR_IO: return kData;
  case SPSIM_ERR_FIT: return kFit;
  default: return kInternal;
  }
}

void check(spsim_status s, const std::string& context) {
  if (s != SPSIM_OK) throw Failure{exit_code(s), context + ": " + spsim_last_error()};
}

// Calls a (buf, cap, len) text producer twice: size query, then copy.
std::string text_of(const std::function<spsim_status(char*, size_t, size_t*)>& f, const std::string& context) {
  size_t len = 0;
  check(f(nullptr, 0, &len), context);
  std::string out(len + 1, '\0');
  check(f(out.data(), out.size(), &len), context);
  out.resize(len);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  check(spsim_write_file(path.string().c_str(), text.data(), text.size()), "writing " + path.string());
}

bool is_dir_target(const std::string& out) {
  return !out.empty() && (out.back() == '/' || fs::is_directory(out));
}

fs::path output_path(const std::string& out, const char* canonical) {
  if (out.empty()) return canonical;
  if (is_dir_target(out)) {
    fs::create_directories(out);
    return fs::path(out) / canonical;
  }
  return out;
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Config = Handle<spsim_config, spsim_config_free>;
using Tags = Handle<spsim_tags, spsim_tags_free>;
using Histogram = Handle<spsim_histogram, spsim_histogram_free>;
using Pulsed = Handle<spsim_pulsed_report, spsim_pulsed_free>;

void load_config(Config& cfg, const std::string& path) {
  if (path.empty())
    check(spsim_config_default(cfg.out()), "config");
  else
    check(spsim_config_load(path.c_str(), cfg.out()), "config");
}

double config_double(const Config& cfg, const char* key) {
  const auto s = text_of([&](char* b, size_t c, size_t* l) { return spsim_config_get(cfg.get(), key, b, c, l); },
                         key);
  return std::stod(s);
}

std::string config_string(const Config& cfg, const char* key) {
  return text_of([&](char* b, size_t c, size_t* l) { return spsim_config_get(cfg.get(), key, b, c, l); }, key);
}

spsim_estimator estimator_of(const std::string& name) {
  if (name == "start-stop") return SPSIM_START_STOP;
  if (name == "full") return SPSIM_FULL_CROSS;
  throw Failure{kConfig, "unknown estimator '" + name + "' (start-stop|full)"};
}

void read_tags(Tags& tags, const std::string& path) { check(spsim_tags_read(path.c_str(), tags.out()), path); }

// "path@power_mw" -> (path, power)
std::pair<std::string, double> tagged_input(const std::string& arg) {
  const auto at = arg.rfind('@');
  if (at == std::string::npos || at == 0 || at + 1 == arg.size())
    throw Failure{kConfig, "expected TAGS@POWER_MW, got '" + arg + "'"};
  try {
    size_t used = 0;
    const double p = std::stod(arg.substr(at + 1), &used);
    if (used != arg.size() - at - 1 || !(p > 0.0)) throw std::invalid_argument("power");
    return {arg.substr(0, at), p};
  } catch (const std::exception&) {
    throw Failure{kConfig, "bad power in '" + arg + "'"};
  }
}

bool looks_like_tag_inputs(const std::vector<std::string>& inputs) {
  return !(inputs.size() == 1 && inputs[0].find('@') == std::string::npos);
}

// ---------------------------------------------------------------------------

struct Common {
  std::string config;
  std::string out;
  std::string svg;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const Common& c, const std::vector<std::string>& overrides) {
  Config cfg;
  load_config(cfg, c.config);
  if (c.seed) check(spsim_config_set(cfg.get(), "seed", std::to_string(*c.seed).c_str()), "--seed");
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Failure{kConfig, "--set expects key=value, got '" + kv + "'"};
    check(spsim_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "--set " + kv);
  }
  const auto format = config_string(cfg, "output.format") == "csv" ? SPSIM_TAGS_CSV : SPSIM_TAGS_BINARY;
  const fs::path path = output_path(c.out, format == SPSIM_TAGS_CSV ? "tags.csv" : "tags.ptag");
  Tags tags;
  check(spsim_simulate(cfg.get(), tags.out()), "simulate");
  check(spsim_tags_write(tags.get(), path.string().c_str(), format, cfg.get()), "writing " + path.string());
  std::printf("wrote %s: ch1=%zu ch2=%zu duration_s=%.6g\n", path.string().c_str(), spsim_tags_count(tags.get(), 1),
              spsim_tags_count(tags.get(), 2), static_cast<double>(spsim_tags_duration_ps(tags.get())) * 1e-12);
  return kOk;
}

struct CorrelateArgs {
  std::string input;
  std::optional<double> bin_ns, span_ns, rho;
  std::optional<std::string> estimator;
};

int cmd_correlate(const Common& c, const CorrelateArgs& a) {
  Config cfg;
  load_config(cfg, c.config);
  const double bin = a.bin_ns.value_or(config_double(cfg, "analysis.bin_ns"));
  const double span = a.span_ns.value_or(config_double(cfg, "analysis.span_ns"));
  const auto est = estimator_of(a.estimator.value_or(config_string(cfg, "analysis.estimator")));
  const double rho = a.rho.value_or(config_double(cfg, "analysis.rho"));
  if (a.rho && !(rho > 0.0 && rho <= 1.0)) throw Failure{kConfig, "--rho must be in (0, 1]"};

  Tags tags;
  read_tags(tags, a.input);
  Histogram hist;
  check(spsim_correlate(tags.get(), bin, span, est, hist.out()), "correlate");
  const auto csv = text_of(
      [&](char* b, size_t cap, size_t* l) { return spsim_histogram_csv(hist.get(), rho, b, cap, l); }, "csv");
  const fs::path path = output_path(c.out, "correlation.csv");
  write_text(path, csv);
  if (!c.svg.empty())
    write_text(c.svg, text_of([&](char* b, size_t cap, size_t* l) { return spsim_histogram_svg(hist.get(), rho, b, cap, l); },
                              "svg"));
  double cn0 = 0.0, g2 = 0.0;
  check(spsim_histogram_zero_delay(hist.get(), rho, &cn0, &g2), "zero delay");
  std::printf("wrote %s: bins=%zu C_N(0)=%.4g", path.string().c_str(), spsim_histogram_bins(hist.get()), cn0);
  if (rho > 0.0) std::printf(" g2(0)=%.4g", g2);
  std::printf("\n");
  return kOk;
}

struct PulsedArgs {
  std::string input;
  std::optional<double> period_ns, bin_ns, lifetime_hint_ns;
  std::optional<int> peaks;
};

int cmd_analyze_pulsed(const Common& c, const PulsedArgs& a) {
  Config cfg;
  load_config(cfg, c.config);
  spsim_pulsed_options opt{};
  opt.period_ns = a.period_ns.value_or(config_double(cfg, "excitation.period_ns"));
  opt.bin_ns = a.bin_ns.value_or(config_double(cfg, "analysis.bin_ns"));
  opt.peaks = a.peaks.value_or(static_cast<int>(config_double(cfg, "analysis.peaks")));
  opt.lifetime_hint_ns = a.lifetime_hint_ns.value_or(config_double(cfg, "analysis.lifetime_hint_ns"));

  Tags tags;
  read_tags(tags, a.input);
  Pulsed rep;
  check(spsim_analyze_pulsed(tags.get(), &opt, rep.out()), "analyze-pulsed");
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  write_text(dir / "pulsed_peaks.csv",
             text_of([&](char* b, size_t cap, size_t* l) { return spsim_pulsed_peaks_csv(rep.get(), b, cap, l); },
                     "peaks"));
  const auto summary = text_of(
      [&](char* b, size_t cap, size_t* l) { return spsim_pulsed_summary_text(rep.get(), b, cap, l); }, "summary");
  write_text(dir / "pulsed_summary.txt", summary);
  if (!c.svg.empty())
    write_text(c.svg,
               text_of([&](char* b, size_t cap, size_t* l) { return spsim_pulsed_svg(rep.get(), b, cap, l); }, "svg"));
  std::fputs(summary.c_str(), stdout);
  return kOk;
}

struct FitArgs {
  std::vector<std::string> inputs;
  std::optional<double> bin_ns, span_ns, rho, window_ns;
  std::optional<std::string> estimator;
};

int cmd_fit_lifetime(const Common& c, const FitArgs& a) {
  std::vector<spsim_power_point> points;
  if (!looks_like_tag_inputs(a.inputs)) {
    size_t n = 0;
    check(spsim_read_power_series(a.inputs[0].c_str(), nullptr, 0, &n), a.inputs[0]);
    points.resize(n);
    check(spsim_read_power_series(a.inputs[0].c_str(), points.data(), points.size(), &n), a.inputs[0]);
  } else {
    Config cfg;
    load_config(cfg, c.config);
    const double bin = a.bin_ns.value_or(config_double(cfg, "analysis.bin_ns"));
    const double span = a.span_ns.value_or(config_double(cfg, "analysis.span_ns"));
    const double window = a.window_ns.value_or(config_double(cfg, "analysis.dip_window_ns"));
    const double rho = a.rho.value_or(config_double(cfg, "analysis.rho"));
    const auto est = estimator_of(a.estimator.value_or(config_string(cfg, "analysis.estimator")));
    for (const auto& arg : a.inputs) {
      const auto [path, power] = tagged_input(arg);
      Tags tags;
      read_tags(tags, path);
      Histogram hist;
      check(spsim_correlate(tags.get(), bin, span, est, hist.out()), path);
      spsim_dip_fit dip{};
      check(spsim_histogram_fit_dip(hist.get(), rho, window, &dip), "dip fit " + path);
      points.push_back({power, dip.gamma_per_ns, dip.gamma_error_per_ns});
      std::printf("%s: P=%.4g mW Gamma=%.5g +/- %.2g ns^-1\n", path.c_str(), power, dip.gamma_per_ns,
                  dip.gamma_error_per_ns);
    }
  }
  spsim_lifetime_fit fit{};
  check(spsim_extrapolate_lifetime(points.data(), points.size(), &fit), "fit-lifetime");
  const auto text = text_of(
      [&](char* b, size_t cap, size_t* l) { return spsim_lifetime_text(points.data(), points.size(), &fit, b, cap, l); },
      "lifetime");
  write_text(output_path(c.out, "lifetime.txt"), text);
  std::fputs(text.c_str(), stdout);
  return kOk;
}

int cmd_fit_saturation(const Common& c, const FitArgs& a) {
  std::vector<spsim_saturation_point> points;
  if (!looks_like_tag_inputs(a.inputs)) {
    size_t n = 0;
    check(spsim_read_saturation_points(a.inputs[0].c_str(), nullptr, 0, &n), a.inputs[0]);
    points.resize(n);
    check(spsim_read_saturation_points(a.inputs[0].c_str(), points.data(), points.size(), &n), a.inputs[0]);
  } else {
    for (const auto& arg : a.inputs) {
      const auto [path, power] = tagged_input(arg);
      Tags tags;
      read_tags(tags, path);
      const double t = static_cast<double>(spsim_tags_duration_ps(tags.get())) * 1e-12;
      if (!(t > 0.0)) throw Failure{kData, path + ": zero acquisition time"};
      const double n = static_cast<double>(spsim_tags_count(tags.get(), 1) + spsim_tags_count(tags.get(), 2));
      points.push_back({power, n / t, std::sqrt(std::max(n, 1.0)) / t});
    }
  }
  spsim_saturation_fit fit{};
  check(spsim_fit_saturation(points.data(), points.size(), &fit), "fit-saturation");
  const auto text =
      text_of([&](char* b, size_t cap, size_t* l) { return spsim_saturation_text(&fit, b, cap, l); }, "saturation");
  write_text(output_path(c.out, "saturation.txt"), text);
  if (!c.svg.empty()) std::fprintf(stderr, "note: fit-saturation does not plot\n");
  std::fputs(text.c_str(), stdout);
  return kOk;
}

struct BudgetArgs {
  double cn0 = 0.0;
  std::optional<double> p1, single_rate, period_ns;
};

int cmd_budget(const Common& c, const BudgetArgs& a) {
  if (a.p1.has_value() == a.single_rate.has_value()) throw Failure{kConfig, "give exactly one of --p1 and --single-rate"};
  double period_ns = 100.0;
  if (a.period_ns) {
    period_ns = *a.period_ns;
  } else if (!c.config.empty()) {
    Config cfg;
    load_config(cfg, c.config);
    period_ns = config_double(cfg, "excitation.period_ns");
  }
  if (!(period_ns > 0.0)) throw Failure{kConfig, "--period-ns must be positive"};
  const double p1 = a.p1 ? *a.p1 : *a.single_rate * period_ns * 1e-9;
  spsim_budget b{};
  check(spsim_two_photon_budget(a.cn0, p1, 1e9 / period_ns, &b), "budget");
  const auto text = text_of([&](char* buf, size_t cap, size_t* l) { return spsim_budget_text(&b, buf, cap, l); }, "budget");
  write_text(output_path(c.out, "budget.txt"), text);
  std::fputs(text.c_str(), stdout);
  if (b.large_p1) std::fprintf(stderr, "warning: p1 > 0.3, the p2 << p1 approximation does not hold\n");
  return kOk;
}

int cmd_report(const Common& c, const std::string& dir) {
  const auto text =
      text_of([&](char* b, size_t cap, size_t* l) { return spsim_report(dir.c_str(), b, cap, l); }, "report");
  if (!c.out.empty()) write_text(c.out, text);
  std::fputs(text.c_str(), stdout);
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon source simulation and correlation analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(spsim_version()));

  Common common;
  auto add_common = [&](CLI::App* sub, bool svg) {
    sub->add_option("--config", common.config, "key=value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output file or directory");
    if (svg) sub->add_option("--svg", common.svg, "also write an SVG plot here");
  };

  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  auto* sim = app.add_subcommand("simulate", "simulate a time-tag stream from a configuration");
  add_common(sim, false);
  auto* seed_opt = sim->add_option("--seed", seed, "override the configured seed");
  sim->add_option("--set", overrides, "override a configuration key (key=value)");

  CorrelateArgs corr;
  auto* cor = app.add_subcommand("correlate", "build a coincidence histogram");
  add_common(cor, true);
  cor->add_option("tags", corr.input, "time-tag file")->required();
  cor->add_option("--bin-ns", corr.bin_ns, "bin width, ns");
  cor->add_option("--span-ns", corr.span_ns, "half span, ns");
  cor->add_option("--estimator", corr.estimator, "start-stop | full")
      ->check(CLI::IsMember({"start-stop", "full"}));
  cor->add_option("--rho", corr.rho, "signal fraction S/(S+B) for background correction");

  PulsedArgs pul;
  auto* ap = app.add_subcommand("analyze-pulsed", "fit pulsed correlation peaks and the blinking model");
  add_common(ap, true);
  ap->add_option("tags", pul.input, "time-tag file")->required();
  ap->add_option("--period-ns", pul.period_ns, "repetition period, ns");
  ap->add_option("--bin-ns", pul.bin_ns, "bin width, ns");
  ap->add_option("--peaks", pul.peaks, "peaks reported on each side of zero");
  ap->add_option("--lifetime-hint-ns", pul.lifetime_hint_ns, "starting peak decay time, ns");

  FitArgs lt;
  auto* fl = app.add_subcommand("fit-lifetime", "extrapolate the dip rate to zero power");
  add_common(fl, false);
  fl->add_option("inputs", lt.inputs, "power-series CSV, or TAGS@POWER_MW ...")->required();
  fl->add_option("--bin-ns", lt.bin_ns, "bin width, ns");
  fl->add_option("--span-ns", lt.span_ns, "half span, ns");
  fl->add_option("--window-ns", lt.window_ns, "dip fit window, ns");
  fl->add_option("--estimator", lt.estimator, "start-stop | full")->check(CLI::IsMember({"start-stop", "full"}));
  fl->add_option("--rho", lt.rho, "signal fraction for background correction");

  FitArgs st;
  auto* fsat = app.add_subcommand("fit-saturation", "fit count rate against power");
  add_common(fsat, false);
  fsat->add_option("inputs", st.inputs, "rate CSV, or TAGS@POWER_MW ...")->required();

  BudgetArgs bud;
  auto* bg = app.add_subcommand("budget", "single- and two-photon rates from C_N(0) and p1");
  add_common(bg, false);
  bg->add_option("--cn0", bud.cn0, "normalised zero-delay peak area")->required()->check(CLI::NonNegativeNumber);
  bg->add_option("--p1", bud.p1, "detected photons per pulse");
  bg->add_option("--single-rate", bud.single_rate, "detected single-photon rate, s^-1");
  bg->add_option("--period-ns", bud.period_ns, "repetition period, ns");

  std::string report_dir;
  auto* rp = app.add_subcommand("report", "summarise the artifacts of a run directory");
  add_common(rp, false);
  rp->add_option("dir", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*seed_opt) common.seed = seed;
    if (*sim) return cmd_simulate(common, overrides);
    if (*cor) return cmd_correlate(common, corr);
    if (*ap) return cmd_analyze_pulsed(common, pul);
    if (*fl) return cmd_fit_lifetime(common, lt);
    if (*fsat) return cmd_fit_saturation(common, st);
    if (*bg) return cmd_budget(common, bud);
    if (*rp) return cmd_report(common, report_dir);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInternal;
  }
  return kInternal;
}
