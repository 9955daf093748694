#include "core/correlate.hpp"

#include "core/errors.hpp"

#include <cmath>
#include <numeric>

namespace spsim {

Acquisition Acquisition::of(const TimeTagStream& stream) {
  return {stream.rate(1), stream.rate(2), stream.duration()};
}

BinSpec BinSpec::centered(std::int64_t width_ps, std::int64_t half_span_ps) {
  if (width_ps <= 0) throw DomainError("bin width must be positive");
  if (half_span_ps < 0) throw DomainError("span must be >= 0");
  const std::int64_t below = width_ps / 2;      // part of the centre bin below zero
  const std::int64_t above = width_ps - below;  // and above
  std::int64_t n = 0;
  if (half_span_ps > above) n = (half_span_ps - above + width_ps - 1) / width_ps;
  return {width_ps, -below - n * width_ps, above + n * width_ps};
}

BinSpec BinSpec::from_seconds(double width, double tau_min, double tau_max) {
  BinSpec s{std::llround(width * 1e12), std::llround(tau_min * 1e12), std::llround(tau_max * 1e12)};
  s.validate();
  return s;
}

void BinSpec::validate() const {
  if (width_ps <= 0) throw DomainError("bin width must be positive");
  if (tau_max_ps <= tau_min_ps) throw DomainError("delay span must satisfy tau_min < tau_max");
  if ((tau_max_ps - tau_min_ps) % width_ps != 0)
    throw DomainError("delay span must be an integral number of bins");
}

double CorrelationHistogram::bin_lower(std::size_t i) const {
  return static_cast<double>(spec.tau_min_ps + static_cast<std::int64_t>(i) * spec.width_ps) * 1e-12;
}

double CorrelationHistogram::bin_center(std::size_t i) const {
  return bin_lower(i) + 0.5 * bin_width();
}

std::ptrdiff_t CorrelationHistogram::bin_of(std::int64_t tau_ps) const {
  if (tau_ps < spec.tau_min_ps || tau_ps >= spec.tau_max_ps) return -1;
  return static_cast<std::ptrdiff_t>((tau_ps - spec.tau_min_ps) / spec.width_ps);
}

std::uint64_t CorrelationHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

namespace {

CorrelationHistogram empty_histogram(const TimeTagStream& stream, const BinSpec& spec, Estimator est) {
  spec.validate();
  CorrelationHistogram h;
  h.spec = spec;
  h.counts.assign(spec.bins(), 0);
  h.acquisition = Acquisition::of(stream);
  h.estimator = est;
  return h;
}

} // namespace

CorrelationHistogram start_stop_histogram(const TimeTagStream& stream, const BinSpec& spec) {
  auto h = empty_histogram(stream, spec, Estimator::StartStop);
  const auto& starts = stream.ch1;
  const auto& stops = stream.ch2;
  std::size_t lo = 0;
  for (const auto t1u : starts) {
    const auto t1 = static_cast<std::int64_t>(t1u);
    const std::int64_t lower = t1 + spec.tau_min_ps;
    while (lo < stops.size() && static_cast<std::int64_t>(stops[lo]) < lower) ++lo;
    if (lo == stops.size()) break;
    const std::int64_t delay = static_cast<std::int64_t>(stops[lo]) - t1;
    if (delay < spec.tau_max_ps) ++h.counts[static_cast<std::size_t>((delay - spec.tau_min_ps) / spec.width_ps)];
  }
  return h;
}

CorrelationHistogram full_cross_histogram(const TimeTagStream& stream, const BinSpec& spec) {
  auto h = empty_histogram(stream, spec, Estimator::FullCross);
  const auto& a = stream.ch1;
  const auto& b = stream.ch2;
  std::size_t lo = 0;
  for (const auto t1u : a) {
    const auto t1 = static_cast<std::int64_t>(t1u);
    const std::int64_t lower = t1 + spec.tau_min_ps;
    const std::int64_t upper = t1 + spec.tau_max_ps;
    while (lo < b.size() && static_cast<std::int64_t>(b[lo]) < lower) ++lo;
    for (std::size_t j = lo; j < b.size(); ++j) {
      const auto t2 = static_cast<std::int64_t>(b[j]);
      if (t2 >= upper) break;
      ++h.counts[static_cast<std::size_t>((t2 - t1 - spec.tau_min_ps) / spec.width_ps)];
    }
  }
  return h;
}

CorrelationHistogram correlate(const TimeTagStream& stream, const BinSpec& spec, Estimator estimator) {
  return estimator == Estimator::StartStop ? start_stop_histogram(stream, spec)
                                           : full_cross_histogram(stream, spec);
}

namespace {

double poisson_level(const CorrelationHistogram& h) {
  const auto& a = h.acquisition;
  if (!(a.n1 > 0.0) || !(a.n2 > 0.0) || !(a.duration > 0.0) || !(h.bin_width() > 0.0))
    throw DomainError("normalisation needs positive N1, N2, bin width and acquisition time");
  return a.n1 * a.n2 * h.bin_width() * a.duration;
}

} // namespace

std::vector<double> normalize_cw(const CorrelationHistogram& hist) {
  const double level = poisson_level(hist);
  std::vector<double> out(hist.counts.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(hist.counts[i]) / level;
  return out;
}

std::vector<double> normalized_variance(const CorrelationHistogram& hist) {
  const double level = poisson_level(hist);
  std::vector<double> out(hist.counts.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::max<double>(static_cast<double>(hist.counts[i]), 1.0) / (level * level);
  return out;
}

double rho_from_sb(double signal, double background) {
  if (!(signal >= 0.0) || !(background >= 0.0) || !(signal + background > 0.0))
    throw DomainError("rho_from_sb: need S >= 0, B >= 0 and S + B > 0");
  return signal / (signal + background);
}

std::ptrdiff_t G2Estimate::zero_bin() const {
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double lower = tau[i] - 0.5 * bin_width;
    // Half-picosecond slack absorbs the rounding of centres to seconds.
    if (lower <= 0.5e-12 && lower + bin_width > 0.5e-12) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

G2Estimate correct_background(const G2Estimate& normalized, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("correct_background: rho must lie in (0, 1]");
  G2Estimate out = normalized;
  const double r2 = rho * rho;
  out.clamped.assign(out.values.size(), false);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    double v = (normalized.values[i] - (1.0 - r2)) / r2;
    if (v < 0.0) {
      v = 0.0;
      out.clamped[i] = true;
    }
    out.values[i] = v;
    if (i < out.variances.size()) out.variances[i] = normalized.variances[i] / (r2 * r2);
  }
  out.rho = rho;
  out.correction_applied = true;
  return out;
}

G2Estimate g2_estimate(const CorrelationHistogram& hist) {
  G2Estimate g;
  g.values = normalize_cw(hist);
  g.variances = normalized_variance(hist);
  g.bin_width = hist.bin_width();
  g.tau.resize(hist.counts.size());
  for (std::size_t i = 0; i < g.tau.size(); ++i) g.tau[i] = hist.bin_center(i);
  g.clamped.assign(g.values.size(), false);
  return g;
}

double zero_delay_value(const G2Estimate& g2) {
  const auto i = g2.zero_bin();
  if (i < 0) throw DomainError("the delay grid does not contain tau = 0");
  return g2.values[static_cast<std::size_t>(i)];
}

} // namespace spsim
