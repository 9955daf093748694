#include "core/artifacts.hpp"

#include "core/errors.hpp"
#include "core/tags.hpp"
#include "core/text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>

namespace spsim {

namespace {

using text::format_double;

std::string kv(std::string_view key, double v) { return std::string(key) + " = " + format_double(v) + "\n"; }
std::string kv(std::string_view key, std::string_view v) { return std::string(key) + " = " + std::string(v) + "\n"; }

struct CsvLine {
  std::vector<std::string_view> fields;
  std::size_t offset = 0;
};

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(text::trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

/// Header fields plus the non-blank data lines.
std::pair<std::vector<std::string_view>, std::vector<CsvLine>> read_csv(std::string_view in, std::string_view origin) {
  std::vector<std::string_view> header;
  std::vector<CsvLine> rows;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < in.size()) {
    auto end = in.find('\n', pos);
    if (end == std::string_view::npos) end = in.size();
    const auto line = text::trim(in.substr(pos, end - pos));
    if (!line.empty() && line.front() != '#') {
      if (!have_header) {
        header = split_commas(line);
        have_header = true;
      } else {
        rows.push_back({split_commas(line), pos});
      }
    }
    pos = end + 1;
  }
  if (!have_header) throw DataError(std::string(origin) + ": byte 0: missing header line");
  return {header, rows};
}

[[noreturn]] void bad_field(std::string_view origin, std::size_t offset, std::string_view what) {
  throw DataError(std::string(origin) + ": byte " + std::to_string(offset) + ": " + std::string(what));
}

double number(const CsvLine& row, std::size_t i, std::string_view origin) {
  double v = 0.0;
  if (!text::parse_double(row.fields[i], v))
    bad_field(origin, row.offset, "malformed number '" + std::string(row.fields[i]) + "'");
  return v;
}

/// Two or three columns: abscissa, value, optional uncertainty.
std::vector<std::array<double, 3>> read_triples(std::string_view in, std::string_view origin,
                                                std::string_view c0, std::string_view c1, std::string_view c2) {
  const auto [header, rows] = read_csv(in, origin);
  const bool three = header.size() == 3;
  if (!(header.size() == 2 || three) || header[0] != c0 || header[1] != c1 || (three && header[2] != c2))
    throw DataError(std::string(origin) + ": byte 0: expected header '" + std::string(c0) + "," + std::string(c1) +
                    "[," + std::string(c2) + "]'");
  std::vector<std::array<double, 3>> out;
  for (const auto& row : rows) {
    if (row.fields.size() != header.size())
      bad_field(origin, row.offset, "expected " + std::to_string(header.size()) + " fields");
    out.push_back({number(row, 0, origin), number(row, 1, origin), three ? number(row, 2, origin) : 0.0});
  }
  return out;
}

std::string fmt(double v, int digits = 4) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

} // namespace

std::string histogram_csv(const CorrelationHistogram& hist, std::optional<double> rho) {
  const auto g2 = g2_estimate(hist);
  std::optional<G2Estimate> corrected;
  if (rho) corrected = correct_background(g2, *rho);
  std::string out = rho ? "tau_ps,counts,c_normalized,g2_corrected\n" : "tau_ps,counts,c_normalized\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out += std::to_string(hist.spec.tau_min_ps + static_cast<std::int64_t>(i) * hist.spec.width_ps);
    out += ',';
    out += std::to_string(hist.counts[i]);
    out += ',';
    out += format_double(g2.values[i]);
    if (corrected) {
      out += ',';
      out += format_double(corrected->values[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<HistogramRow> parse_histogram_csv(std::string_view in, std::string_view origin) {
  const auto [header, rows] = read_csv(in, origin);
  const bool with_g2 = header.size() == 4;
  if (!(header.size() == 3 || with_g2) || header[0] != "tau_ps" || header[1] != "counts" ||
      header[2] != "c_normalized" || (with_g2 && header[3] != "g2_corrected"))
    throw DataError(std::string(origin) + ": byte 0: expected header 'tau_ps,counts,c_normalized[,g2_corrected]'");
  std::vector<HistogramRow> out;
  for (const auto& row : rows) {
    if (row.fields.size() != header.size())
      bad_field(origin, row.offset, "expected " + std::to_string(header.size()) + " fields");
    HistogramRow r;
    long long tau = 0;
    unsigned long long c = 0;
    if (!text::parse_i64(row.fields[0], tau)) bad_field(origin, row.offset, "malformed tau_ps");
    if (!text::parse_u64(row.fields[1], c)) bad_field(origin, row.offset, "malformed counts");
    r.tau_ps = tau;
    r.counts = c;
    r.c_normalized = number(row, 2, origin);
    if (with_g2) r.g2_corrected = number(row, 3, origin);
    if (!out.empty() && r.tau_ps <= out.back().tau_ps) bad_field(origin, row.offset, "tau_ps must increase");
    out.push_back(r);
  }
  return out;
}

std::optional<HistogramRow> zero_delay_row(const std::vector<HistogramRow>& rows) {
  if (rows.size() < 2) return std::nullopt;
  const std::int64_t w = rows[1].tau_ps - rows[0].tau_ps;
  for (const auto& r : rows)
    if (r.tau_ps <= 0 && r.tau_ps + w > 0) return r;
  return std::nullopt;
}

std::string pulsed_peaks_csv(const PulsedPeakReport& report) {
  std::string out = "m,raw_area,raw_error,normalized_area,normalized_error,fit_rms\n";
  for (const auto& p : report.peaks) {
    out += std::to_string(p.index) + "," + format_double(p.raw_area) + "," + format_double(p.raw_error) + "," +
           format_double(p.normalized_area) + "," + format_double(p.normalized_error) + "," +
           format_double(p.fit_rms) + "\n";
  }
  return out;
}

std::string pulsed_summary_text(const PulsedPeakReport& report, const BlinkingFit& blinking,
                                const PhotonBudget& budget) {
  double area_sum = 0.0;
  for (const auto& p : report.peaks) area_sum += p.raw_area;
  const auto* zero = report.peak(0);
  std::string out = "# pulsed correlation analysis\n";
  out += kv("period_ns", report.period * 1e9);
  out += kv("peaks", static_cast<double>(report.peaks.size()));
  out += kv("shared_lifetime_ns", report.shared_lifetime * 1e9);
  out += kv("shared_lifetime_error_ns", report.shared_lifetime_error * 1e9);
  out += kv("span_counts", report.span_counts);
  out += kv("fitted_area_sum", area_sum);
  out += kv("n1_per_s", report.acquisition.n1);
  out += kv("n2_per_s", report.acquisition.n2);
  out += kv("duration_s", report.acquisition.duration);
  out += kv("cn0", zero ? zero->normalized_area : std::nan(""));
  out += kv("cn0_error", zero ? zero->normalized_error : std::nan(""));
  out += kv("t_on_ns", blinking.t_on * 1e9);
  out += kv("t_on_error_ns", blinking.t_on_error * 1e9);
  out += kv("t_off_ns", blinking.t_off * 1e9);
  out += kv("t_off_error_ns", blinking.t_off_error * 1e9);
  out += kv("t_off_over_t_on", blinking.ratio);
  out += kv("blinking_degenerate", blinking.degenerate ? "true" : "false");
  out += kv("blinking_residual_rms", blinking.residual_rms);
  out += kv("p1", budget.p1);
  out += kv("p2", budget.p2);
  out += kv("repetition_rate_per_s", budget.repetition_rate);
  out += kv("single_photon_rate_per_s", budget.single_photon_rate);
  out += kv("two_photon_rate_per_s", budget.two_photon_rate);
  return out;
}

std::string lifetime_text(const LifetimeExtrapolation& fit, std::span<const PowerPoint> series) {
  std::string out = "# lifetime extrapolation to zero pump power\n";
  out += kv("points", static_cast<double>(series.size()));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto idx = std::to_string(i);
    out += kv("point." + idx + ".power_mw", series[i].power_mw);
    out += kv("point." + idx + ".gamma_per_ns", series[i].gamma * 1e-9);
    out += kv("point." + idx + ".uncertainty_per_ns", series[i].uncertainty * 1e-9);
  }
  out += kv("gamma0_per_ns", fit.gamma0 * 1e-9);
  out += kv("gamma0_error_per_ns", fit.gamma0_error * 1e-9);
  out += kv("slope_per_ns_per_mw", fit.slope * 1e-9);
  out += kv("slope_error_per_ns_per_mw", fit.slope_error * 1e-9);
  out += kv("lifetime_ns", fit.lifetime * 1e9);
  out += kv("lifetime_error_ns", fit.lifetime_error * 1e9);
  return out;
}

std::string saturation_text(const FitResult& fit) {
  std::string out = "# saturation fit R(P) = R_inf P / (P + P_sat + D P^2)\n";
  out += kv("r_inf_per_s", fit.value("R_inf"));
  out += kv("r_inf_error_per_s", fit.error("R_inf"));
  out += kv("p_sat_mw", fit.value("P_sat"));
  out += kv("p_sat_error_mw", fit.error("P_sat"));
  out += kv("droop_per_mw", fit.value("D"));
  out += kv("droop_error_per_mw", fit.error("D"));
  out += kv("residual_rms", fit.residual_rms);
  out += kv("converged", fit.converged ? "true" : "false");
  return out;
}

std::string budget_text(const PhotonBudget& b) {
  std::string out = "# two-photon budget\n";
  out += kv("cn0", b.cn0);
  out += kv("p1", b.p1);
  out += kv("p2", b.p2);
  out += kv("repetition_rate_per_s", b.repetition_rate);
  out += kv("single_photon_rate_per_s", b.single_photon_rate);
  out += kv("two_photon_rate_per_s", b.two_photon_rate);
  out += kv("large_p1", b.large_p1 ? "true" : "false");
  return out;
}

std::vector<PowerPoint> parse_power_series(std::string_view in, std::string_view origin) {
  std::vector<PowerPoint> out;
  for (const auto& t : read_triples(in, origin, "power_mw", "gamma_per_ns", "uncertainty_per_ns"))
    out.push_back({t[0], t[1] * 1e9, t[2] * 1e9});
  return out;
}

std::vector<SaturationPoint> parse_saturation_points(std::string_view in, std::string_view origin) {
  std::vector<SaturationPoint> out;
  for (const auto& t : read_triples(in, origin, "power_mw", "rate_per_s", "uncertainty_per_s"))
    out.push_back({t[0], t[1], t[2]});
  return out;
}

namespace {

using Values = std::map<std::string, std::string>;

struct Row {
  std::string quantity;
  std::string value;
  std::string reference;
};

double lookup_double(const Values& v, const std::string& key, const std::string& artifact) {
  const auto it = v.find(key);
  if (it == v.end()) throw DataError(artifact + ": missing key '" + key + "'");
  double d = 0.0;
  if (!text::parse_double(it->second, d)) throw DataError(artifact + ": malformed value for '" + key + "'");
  return d;
}

std::string lookup_number(const Values& v, const std::string& key, const std::string& artifact) {
  return fmt(lookup_double(v, key, artifact));
}

std::string with_error(const Values& v, const std::string& key, const std::string& err_key,
                       const std::string& unit, const std::string& artifact) {
  std::string s = lookup_number(v, key, artifact);
  if (v.count(err_key)) s += " +/- " + fmt(lookup_double(v, err_key, artifact), 2);
  if (!unit.empty()) s += " " + unit;
  return s;
}

} // namespace

std::string run_report(const std::filesystem::path& dir) {
  const std::vector<std::string_view> artifacts = {kCorrelationArtifact, kLifetimeArtifact, kPulsedSummaryArtifact,
                                                   kSaturationArtifact, kBudgetArtifact};
  std::vector<std::string> missing;
  std::vector<std::string> present;
  for (auto a : artifacts) {
    if (std::filesystem::is_regular_file(dir / a))
      present.emplace_back(a);
    else
      missing.emplace_back(a);
  }
  if (present.empty()) {
    std::string msg = "no analysis artifacts in '" + dir.string() + "'; missing:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }
  auto has = [&](std::string_view a) { return std::find(present.begin(), present.end(), a) != present.end(); };
  auto values = [&](std::string_view a) { return text::parse_key_values(read_file(dir / a), a); };
  const std::string nc = "not computed";

  std::vector<Row> rows;
  if (has(kCorrelationArtifact)) {
    const auto table = parse_histogram_csv(read_file(dir / kCorrelationArtifact), kCorrelationArtifact);
    const auto zero = zero_delay_row(table);
    if (!zero) throw DataError(std::string(kCorrelationArtifact) + ": no bin contains zero delay");
    rows.push_back({"C_N(0)", fmt(zero->c_normalized), "0.17"});
    rows.push_back({"g2(0)", zero->g2_corrected ? fmt(*zero->g2_corrected) : nc + " (no rho)", "0.13"});
  } else {
    rows.push_back({"C_N(0)", nc, "0.17"});
    rows.push_back({"g2(0)", nc, "0.13"});
  }

  if (has(kLifetimeArtifact)) {
    const auto v = values(kLifetimeArtifact);
    const std::string a(kLifetimeArtifact);
    rows.push_back({"tau_nc", with_error(v, "lifetime_ns", "lifetime_error_ns", "ns", a), "25 +/- 4 ns"});
    rows.push_back({"pump_slope", with_error(v, "slope_per_ns_per_mw", "slope_error_per_ns_per_mw", "ns^-1 mW^-1", a), "-"});
  } else {
    rows.push_back({"tau_nc", nc, "25 +/- 4 ns"});
    rows.push_back({"pump_slope", nc, "-"});
  }

  if (has(kPulsedSummaryArtifact)) {
    const auto v = values(kPulsedSummaryArtifact);
    const std::string a(kPulsedSummaryArtifact);
    rows.push_back({"tau_f", with_error(v, "shared_lifetime_ns", "shared_lifetime_error_ns", "ns", a), "25 ns"});
    rows.push_back({"C_N(0) pulsed", with_error(v, "cn0", "cn0_error", "", a), "0.21"});
    const bool degenerate = v.count("blinking_degenerate") && v.at("blinking_degenerate") == "true";
    rows.push_back({"T_on", degenerate ? nc + " (no bunching)" : with_error(v, "t_on_ns", "t_on_error_ns", "ns", a), "460 ns"});
    rows.push_back({"T_off", degenerate ? nc + " (no bunching)" : with_error(v, "t_off_ns", "t_off_error_ns", "ns", a), "390 ns"});
  } else {
    rows.push_back({"tau_f", nc, "25 ns"});
    rows.push_back({"C_N(0) pulsed", nc, "0.21"});
    rows.push_back({"T_on", nc, "460 ns"});
    rows.push_back({"T_off", nc, "390 ns"});
  }

  if (has(kSaturationArtifact)) {
    const auto v = values(kSaturationArtifact);
    const std::string a(kSaturationArtifact);
    rows.push_back({"R_inf", with_error(v, "r_inf_per_s", "r_inf_error_per_s", "s^-1", a), "4.4e+04 s^-1"});
    rows.push_back({"P_sat", with_error(v, "p_sat_mw", "p_sat_error_mw", "mW", a), "-"});
  } else {
    rows.push_back({"R_inf", nc, "4.4e+04 s^-1"});
    rows.push_back({"P_sat", nc, "-"});
  }

  if (has(kBudgetArtifact)) {
    const auto v = values(kBudgetArtifact);
    const std::string a(kBudgetArtifact);
    rows.push_back({"p1", lookup_number(v, "p1", a), "0.002"});
    rows.push_back({"p2", lookup_number(v, "p2", a), "-"});
    rows.push_back({"single_photon_rate", lookup_number(v, "single_photon_rate_per_s", a) + " s^-1", "2e+04 s^-1"});
    rows.push_back({"two_photon_rate", lookup_number(v, "two_photon_rate_per_s", a) + " s^-1", "4 s^-1"});
  } else {
    rows.push_back({"p1", nc, "0.002"});
    rows.push_back({"p2", nc, "-"});
    rows.push_back({"single_photon_rate", nc, "2e+04 s^-1"});
    rows.push_back({"two_photon_rate", nc, "4 s^-1"});
  }

  std::size_t w0 = 8, w1 = 5;
  for (const auto& r : rows) {
    w0 = std::max(w0, r.quantity.size());
    w1 = std::max(w1, r.value.size());
  }
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size() + 2, ' '); };
  std::string out = "run report\n\n";
  out += pad("quantity", w0) + pad("value", w1) + "reference\n";
  out += std::string(w0 + w1 + 4 + 9, '-') + "\n";
  for (const auto& r : rows) out += pad(r.quantity, w0) + pad(r.value, w1) + r.reference + "\n";
  out += "\nartifacts read:";
  for (const auto& p : present) out += " " + p;
  out += "\n";
  if (!missing.empty()) {
    out += "not computed:";
    for (const auto& m : missing) out += " " + m;
    out += "\n";
  }
  return out;
}

} // namespace spsim
