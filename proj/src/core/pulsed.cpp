#include "core/pulsed.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace spsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// CDF of the unit-area two-sided exponential centred at zero.
double laplace_cdf(double x, double tau) {
  return x < 0.0 ? 0.5 * std::exp(x / tau) : 1.0 - 0.5 * std::exp(-x / tau);
}

} // namespace

const PeakArea* PulsedPeakReport::peak(int m) const {
  for (const auto& p : peaks)
    if (p.index == m) return &p;
  return nullptr;
}

double laplace_bin_fraction(double lower, double upper, double center, double tau_f) {
  const double a = lower - center;
  const double b = upper - center;
  // Subtract on the side where both CDF values are small to keep precision.
  if (b <= 0.0) return 0.5 * (std::exp(b / tau_f) - std::exp(a / tau_f));
  if (a >= 0.0) return 0.5 * (std::exp(-a / tau_f) - std::exp(-b / tau_f));
  return laplace_cdf(b, tau_f) - laplace_cdf(a, tau_f);
}

double peak_train_bin(double lower, double upper, double period, int first_index,
                      std::span<const double> areas, double tau_f) {
  double sum = 0.0;
  for (std::size_t j = 0; j < areas.size(); ++j) {
    const double center = (first_index + static_cast<int>(j)) * period;
    sum += areas[j] * laplace_bin_fraction(lower, upper, center, tau_f);
  }
  return sum;
}

PulsedPeakReport segment_and_fit_peaks(const CorrelationHistogram& hist, double period,
                                       double lifetime_hint, int max_peak) {
  if (!(period > 0.0)) throw DomainError("peak analysis: period must be positive");
  if (max_peak < 0) throw DomainError("peak analysis: peak limit must be >= 0");
  hist.spec.validate();
  const double tmin = hist.tau_min();
  const double tmax = hist.tau_max();
  if (tmax - tmin < 5.0 * period * (1.0 - 1e-12))
    throw DomainError("peak analysis: histogram spans less than five periods");

  // Reported peaks: period windows fully inside the histogram.
  const double eps = 1e-9 * period;
  int m_lo = static_cast<int>(std::ceil((tmin + 0.5 * period - eps) / period));
  int m_hi = static_cast<int>(std::floor((tmax - 0.5 * period + eps) / period));
  m_lo = std::max(m_lo, -max_peak);
  m_hi = std::min(m_hi, max_peak);
  if (m_hi < m_lo) throw DomainError("peak analysis: no complete period window in the histogram");

  const double span_lo = (m_lo - 0.5) * period;
  const double span_hi = (m_hi + 0.5) * period;
  std::vector<double> lower, upper, data;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double c = hist.bin_center(i);
    if (c < span_lo || c >= span_hi) continue;
    lower.push_back(hist.bin_lower(i));
    upper.push_back(hist.bin_lower(i) + hist.bin_width());
    data.push_back(static_cast<double>(hist.counts[i]));
  }
  // Areas of m_lo..m_hi are free. The peaks just outside the span spill
  // their tails into it and reuse the area of their reported neighbour.
  const int first = m_lo - 1;
  const int n_rep = m_hi - m_lo + 1;
  const int n_peaks = n_rep + 2;
  const auto k = static_cast<Eigen::Index>(n_rep + 1);
  const auto nb = static_cast<Eigen::Index>(data.size());

  double span_counts = 0.0;
  Eigen::VectorXd initial = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < data.size(); ++i) {
    span_counts += data[i];
    const double c = 0.5 * (lower[i] + upper[i]);
    const int m = std::clamp(static_cast<int>(std::floor(c / period + 0.5)), m_lo, m_hi);
    initial[m - m_lo] += data[i];
  }
  initial[k - 1] = lifetime_hint > 0.0 ? lifetime_hint : 0.1 * period;

  // Bin fractions of every peak, nuisance columns folded into the edges.
  auto fractions = [&](double tau) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(nb, n_rep);
    for (Eigen::Index i = 0; i < nb; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      for (int j = 0; j < n_peaks; ++j)
        f(i, std::clamp(j - 1, 0, n_rep - 1)) += laplace_bin_fraction(lower[ui], upper[ui], (first + j) * period, tau);
    }
    return f;
  };
  const VectorModel model = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return fractions(p[k - 1]) * p.head(n_rep);
  };

  std::vector<std::string> names;
  for (int m = m_lo; m <= m_hi; ++m) names.push_back("c(" + std::to_string(m) + ")");
  names.push_back("tau_f");

  FitOptions opt;
  opt.max_iterations = 400;
  opt.lower = Eigen::VectorXd::Zero(k);
  opt.lower[k - 1] = 1e-3 * hist.bin_width();
  opt.upper = Eigen::VectorXd::Constant(k, kInf);
  opt.upper[k - 1] = 10.0 * period;
  opt.jacobian = [&](const Eigen::VectorXd& p) {
    const double tau = p[k - 1];
    const double h = 1e-6 * tau;
    Eigen::MatrixXd jac(nb, k);
    jac.leftCols(n_rep) = fractions(tau);
    const Eigen::VectorXd areas = p.head(n_rep);
    jac.col(k - 1) = (fractions(tau + h) * areas - fractions(tau - h) * areas) / (2.0 * h);
    return jac;
  };

  std::vector<double> w(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) w[i] = 1.0 / std::max(data[i], 1.0);
  auto fit = nls_fit(model, data, w, initial, names, opt);
  if (fit.converged) {
    const Eigen::VectorXd mu = model(fit.parameters);
    for (std::size_t i = 0; i < data.size(); ++i) w[i] = 1.0 / std::max(mu[static_cast<Eigen::Index>(i)], 0.1);
    fit = nls_fit(model, data, w, fit.parameters, names, opt);
  }
  if (!fit.converged) throw FitError("peak fit did not converge: " + fit.message, fit);

  PulsedPeakReport report;
  report.period = period;
  report.shared_lifetime = fit.parameters[k - 1];
  report.shared_lifetime_error = fit.standard_errors[k - 1];
  report.acquisition = hist.acquisition;
  report.span_counts = span_counts;

  const Eigen::VectorXd mu = model(fit.parameters);
  for (int m = m_lo; m <= m_hi; ++m) {
    PeakArea pa;
    pa.index = m;
    pa.raw_area = fit.parameters[m - m_lo];
    pa.raw_error = fit.standard_errors[m - m_lo];
    double ss = 0.0;
    std::size_t nb = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double c = 0.5 * (lower[i] + upper[i]);
      if (c < (m - 0.5) * period || c >= (m + 0.5) * period) continue;
      const double e = mu[static_cast<Eigen::Index>(i)];
      ss += (data[i] - e) * (data[i] - e) / std::max(e, 1.0);
      ++nb;
    }
    pa.fit_rms = nb ? std::sqrt(ss / static_cast<double>(nb)) : 0.0;
    report.peaks.push_back(pa);
  }
  report.fit = std::move(fit);
  return report;
}

PulsedPeakReport normalize_peak_areas(const PulsedPeakReport& report, const Acquisition& acquisition) {
  const double level = acquisition.n1 * acquisition.n2 * report.period * acquisition.duration;
  if (!(level > 0.0) || !std::isfinite(level))
    throw DomainError("peak normalisation needs positive N1, N2, period and acquisition time");
  PulsedPeakReport out = report;
  out.acquisition = acquisition;
  for (auto& p : out.peaks) {
    p.normalized_area = p.raw_area / level;
    p.normalized_error = p.raw_error / level;
  }
  out.normalized = true;
  return out;
}

double blinking_peak_area(int m, double period, double t_on, double t_off) {
  if (!(t_on > 0.0) || !(t_off >= 0.0)) throw DomainError("blinking model: need T_on > 0, T_off >= 0");
  if (t_off == 0.0) return 1.0;
  const double rate = 1.0 / t_on + 1.0 / t_off;
  return 1.0 + (t_off / t_on) * std::exp(-rate * std::abs(m) * period);
}

BlinkingFit fit_blinking(const PulsedPeakReport& report) {
  if (!report.normalized) throw DomainError("blinking fit needs normalised peak areas");
  std::vector<double> ms, y, w;
  for (const auto& p : report.peaks) {
    if (p.index == 0) continue;
    ms.push_back(p.index);
    y.push_back(p.normalized_area);
    const double err = p.normalized_error;
    w.push_back(err > 0.0 && std::isfinite(err) ? 1.0 / (err * err) : 1.0);
  }
  if (ms.size() < 6)
    throw DomainError("blinking fit needs at least six peaks with m != 0, have " + std::to_string(ms.size()));
  const double theta = report.period;

  BlinkingFit out;
  // Excess of the innermost peaks (|m| = 1) over the Poisson level.
  double sw = 0.0, swx = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i)
    if (std::abs(ms[i]) == 1.0) {
      sw += w[i];
      swx += w[i] * (y[i] - 1.0);
    }
  const double excess = sw > 0.0 ? swx / sw : 0.0;
  const double excess_err = sw > 0.0 ? 1.0 / std::sqrt(sw) : kInf;
  if (!(excess > 2.0 * excess_err)) {
    out.degenerate = true;
    out.t_on = kInf;
    out.t_off = 0.0;
    out.t_on_error = kInf;
    out.t_off_error = kInf;
    out.ratio = 0.0;
    out.ratio_error = kInf;
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) ss += w[i] * (y[i] - 1.0) * (y[i] - 1.0);
    out.residual_rms = std::sqrt(ss / static_cast<double>(y.size()));
    out.covariance.setConstant(kInf);
    return out;
  }

  // Start from a log-linear fit of the excess on the peaks that show one.
  std::vector<double> lx, ly, lw;
  for (std::size_t i = 0; i < ms.size(); ++i)
    if (y[i] - 1.0 > 2.0 / std::sqrt(w[i])) {
      lx.push_back(std::abs(ms[i]) * theta);
      ly.push_back(std::log(y[i] - 1.0));
      lw.push_back(w[i] * (y[i] - 1.0) * (y[i] - 1.0));
    }
  double amp = excess;
  double rate = 3.0 / theta;
  if (std::adjacent_find(lx.begin(), lx.end(), std::not_equal_to<>()) != lx.end()) {
    const auto lin = weighted_linear_fit(lx, ly, lw);
    if (lin.slope < 0.0) {
      amp = std::exp(lin.intercept);
      rate = -lin.slope;
    }
  }
  const double t_on0 = (1.0 + 1.0 / amp) / rate;
  const double t_off0 = amp * t_on0;

  const PointModel model = [theta](double m, const Eigen::VectorXd& p) {
    const double r = 1.0 / p[0] + 1.0 / p[1];
    return 1.0 + (p[1] / p[0]) * std::exp(-r * std::abs(m) * theta);
  };
  FitOptions opt;
  opt.lower = Eigen::Vector2d(1e-6 * theta, 1e-6 * theta);
  opt.upper = Eigen::Vector2d(1e6 * theta, 1e6 * theta);
  opt.max_iterations = 500;
  auto fit = nls_fit(model, ms, y, w, Eigen::Vector2d(t_on0, t_off0), {"T_on", "T_off"}, opt);
  if (!fit.converged) throw FitError("blinking fit did not converge: " + fit.message, fit);

  out.t_on = fit.parameters[0];
  out.t_off = fit.parameters[1];
  out.t_on_error = fit.standard_errors[0];
  out.t_off_error = fit.standard_errors[1];
  out.covariance = fit.covariance;
  out.ratio = out.t_off / out.t_on;
  // Delta method on T_off / T_on.
  const Eigen::Vector2d grad(-out.t_off / (out.t_on * out.t_on), 1.0 / out.t_on);
  out.ratio_error = std::sqrt(std::max(0.0, grad.dot(out.covariance * grad)));
  out.residual_rms = fit.residual_rms;
  out.fit = std::move(fit);
  return out;
}

PhotonBudget two_photon_budget(double cn0, double p1, double repetition_rate) {
  if (!(cn0 >= 0.0)) throw DomainError("two-photon budget: C_N(0) must be >= 0");
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("two-photon budget: p1 must lie in [0, 1]");
  if (!(repetition_rate >= 0.0)) throw DomainError("two-photon budget: repetition rate must be >= 0");
  PhotonBudget b;
  b.cn0 = cn0;
  b.p1 = p1;
  b.p2 = cn0 * p1 * p1 / 2.0;
  b.repetition_rate = repetition_rate;
  b.single_photon_rate = p1 * repetition_rate;
  b.two_photon_rate = b.p2 * repetition_rate;
  b.large_p1 = p1 > 0.3;
  return b;
}

double detected_per_pulse(const Acquisition& acquisition, double period) {
  if (!(period > 0.0)) throw DomainError("period must be positive");
  return (acquisition.n1 + acquisition.n2) * period;
}

} // namespace spsim
