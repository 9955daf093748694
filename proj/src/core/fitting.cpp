#include "core/fitting.hpp"

#include "core/errors.hpp"
#include "core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDiffStep = 6.0554544523933395e-6; // cbrt(machine epsilon)

std::size_t index_of(const std::vector<std::string>& names, std::string_view name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DomainError("no fit parameter named '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::VectorXd clamp(const Eigen::VectorXd& p) const { return p.cwiseMax(lower).cwiseMin(upper); }
};

Eigen::MatrixXd jacobian(const VectorModel& model, const Eigen::VectorXd& p, const Eigen::VectorXd& typical,
                         const Bounds& bounds, const Eigen::VectorXd& f0) {
  const auto k = p.size();
  Eigen::MatrixXd jac(f0.size(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double h = kDiffStep * std::max(std::abs(p[j]), 1e-3 * typical[j]);
    Eigen::VectorXd hi = p;
    Eigen::VectorXd lo = p;
    const bool up_ok = p[j] + h <= bounds.upper[j];
    const bool down_ok = p[j] - h >= bounds.lower[j];
    if (up_ok && down_ok) {
      hi[j] += h;
      lo[j] -= h;
      jac.col(j) = (model(hi) - model(lo)) / (2.0 * h);
    } else if (up_ok) {
      hi[j] += h;
      jac.col(j) = (model(hi) - f0) / h;
    } else {
      lo[j] -= h;
      jac.col(j) = (f0 - model(lo)) / h;
    }
  }
  return jac;
}

Eigen::VectorXd typical_scale(const Eigen::VectorXd& p) {
  Eigen::VectorXd t(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) t[j] = p[j] != 0.0 ? std::abs(p[j]) : 1.0;
  return t;
}

} // namespace

double FitResult::value(std::string_view name) const { return parameters[static_cast<Eigen::Index>(index_of(names, name))]; }

double FitResult::error(std::string_view name) const {
  return standard_errors[static_cast<Eigen::Index>(index_of(names, name))];
}

Eigen::MatrixXd numeric_jacobian(const VectorModel& model, const Eigen::VectorXd& p) {
  const Bounds free{Eigen::VectorXd::Constant(p.size(), -kInf), Eigen::VectorXd::Constant(p.size(), kInf)};
  return jacobian(model, p, typical_scale(p), free, model(p));
}

FitResult nls_fit(const VectorModel& model, std::span<const double> y, std::span<const double> weights,
                  const Eigen::VectorXd& initial, std::vector<std::string> names, const FitOptions& options) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto k = initial.size();
  if (weights.size() != y.size()) throw DomainError("nls_fit: weights and data differ in length");
  if (n < k) throw DomainError("nls_fit: fewer data points than parameters");
  if (names.size() != static_cast<std::size_t>(k)) throw DomainError("nls_fit: one name per parameter");
  if (!all_finite(initial)) throw DomainError("nls_fit: initial parameters must be finite");

  Bounds bounds{options.lower.size() ? options.lower : Eigen::VectorXd::Constant(k, -kInf),
                options.upper.size() ? options.upper : Eigen::VectorXd::Constant(k, kInf)};
  if (bounds.lower.size() != k || bounds.upper.size() != k)
    throw DomainError("nls_fit: bounds must match the parameter count");

  Eigen::VectorXd sw(n);
  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = weights[static_cast<std::size_t>(i)];
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("nls_fit: weights must be positive and finite");
    sw[i] = std::sqrt(w);
    yv[i] = y[static_cast<std::size_t>(i)];
  }
  const double data_norm = std::max((sw.cwiseProduct(yv)).norm(), std::numeric_limits<double>::min());

  const Eigen::VectorXd typical = typical_scale(initial);
  const VectorModel weighted = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return sw.cwiseProduct(model(p));
  };

  FitResult result;
  result.names = std::move(names);
  result.points = static_cast<std::size_t>(n);

  Eigen::VectorXd p = bounds.clamp(initial);
  Eigen::VectorXd f = weighted(p);
  if (!all_finite(f)) throw DomainError("nls_fit: model is not finite at the initial parameters");
  Eigen::VectorXd r = sw.cwiseProduct(yv) - f;
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) throw DomainError("nls_fit: residuals overflow at the initial parameters");
  double lambda = 1e-3;

  auto scaled_gradient = [&](const Eigen::MatrixXd& jac, const Eigen::VectorXd& g) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double col = jac.col(j).norm();
      if (col > 0.0) worst = std::max(worst, std::abs(g[j]) / col);
    }
    return worst / data_norm;
  };

  auto weighted_jacobian = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& f_at) -> Eigen::MatrixXd {
    if (options.jacobian) return sw.asDiagonal() * options.jacobian(at);
    return jacobian(weighted, at, typical, bounds, f_at);
  };

  // Parameters pinned at a bound with the gradient pointing outwards.
  auto active_set = [&](const Eigen::VectorXd& g) {
    std::vector<bool> active(static_cast<std::size_t>(k), false);
    for (Eigen::Index j = 0; j < k; ++j)
      active[static_cast<std::size_t>(j)] =
          (p[j] <= bounds.lower[j] && g[j] < 0.0) || (p[j] >= bounds.upper[j] && g[j] > 0.0);
    return active;
  };

  Eigen::MatrixXd jac;
  // One undamped Gauss-Newton step, kept when it does not raise the cost.
  auto polish = [&] {
    jac = weighted_jacobian(p, f);
    Eigen::VectorXd gn = jac.transpose() * r;
    const auto pinned = active_set(gn);
    Eigen::MatrixXd normal = jac.transpose() * jac;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!pinned[static_cast<std::size_t>(j)]) continue;
      normal.row(j).setZero();
      normal.col(j).setZero();
      normal(j, j) = 1.0;
      gn[j] = 0.0;
    }
    const Eigen::VectorXd trial = bounds.clamp(p + normal.ldlt().solve(gn));
    if (!all_finite(trial)) return;
    const Eigen::VectorXd f_trial = weighted(trial);
    const Eigen::VectorXd r_trial = sw.cwiseProduct(yv) - f_trial;
    if (!all_finite(f_trial) || !(r_trial.squaredNorm() <= cost)) return;
    p = trial;
    f = f_trial;
    r = r_trial;
    cost = r_trial.squaredNorm();
  };

  for (int it = 1; it <= options.max_iterations; ++it) {
    result.iterations = it;
    jac = weighted_jacobian(p, f);
    Eigen::VectorXd g = jac.transpose() * r;
    const auto active = active_set(g);
    for (Eigen::Index j = 0; j < k; ++j)
      if (active[static_cast<std::size_t>(j)]) g[j] = 0.0;
    Eigen::MatrixXd a = jac.transpose() * jac;
    if (cost == 0.0 || scaled_gradient(jac, g) < options.gradient_tolerance) {
      if (cost > 0.0) polish();
      result.converged = true;
      result.message = "gradient below tolerance";
      break;
    }

    Eigen::VectorXd diag = a.diagonal();
    const double floor = std::max(diag.maxCoeff() * 1e-15, std::numeric_limits<double>::min());
    diag = diag.cwiseMax(floor);
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!active[static_cast<std::size_t>(j)]) continue;
      a.row(j).setZero();
      a.col(j).setZero();
      a(j, j) = 1.0;
      diag[j] = 0.0;
    }

    bool accepted = false;
    bool small_step = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd delta = damped.ldlt().solve(g);
      const Eigen::VectorXd trial = bounds.clamp(p + delta);
      if (!all_finite(trial)) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd f_trial = weighted(trial);
      const Eigen::VectorXd r_trial = sw.cwiseProduct(yv) - f_trial;
      const double cost_trial = r_trial.squaredNorm();
      if (!std::isfinite(cost_trial) || cost_trial >= cost) {
        lambda *= 10.0;
        continue;
      }
      // A tiny step forced by heavy damping says nothing about convergence.
      small_step = lambda <= 1.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        const double scale = std::max(std::abs(trial[j]), 1e-12 * typical[j]);
        if (std::abs(trial[j] - p[j]) > options.step_tolerance * scale) small_step = false;
      }
      p = trial;
      f = f_trial;
      r = r_trial;
      cost = cost_trial;
      lambda = std::max(lambda / 10.0, 1e-12);
      accepted = true;
      break;
    }
    if (accepted && small_step) {
      polish();
      result.converged = true;
      result.message = "relative step below tolerance";
      break;
    }
    if (!accepted) {
      result.converged = scaled_gradient(jac, g) < 1e-6;
      result.message = result.converged ? "no further decrease; gradient small" : "stalled";
      break;
    }
    if (it == options.max_iterations) result.message = "iteration limit reached";
  }

  jac = weighted_jacobian(p, f);
  // Invert with unit column norms so that parameter units do not matter.
  Eigen::VectorXd unit(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double c = jac.col(j).norm();
    unit[j] = c > 0.0 ? 1.0 / c : 1.0;
  }
  const Eigen::MatrixXd js = jac * unit.asDiagonal();
  const Eigen::MatrixXd a = js.transpose() * js;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (lu.isInvertible() && jac.colwise().norm().minCoeff() > 0.0) {
    result.covariance = unit.asDiagonal() * lu.inverse() * unit.asDiagonal();
  } else {
    result.covariance = Eigen::MatrixXd::Zero(k, k);
    result.covariance.diagonal().setConstant(kInf);
  }
  if (options.scale_covariance && n > k) {
    const double factor = cost / static_cast<double>(n - k);
    result.covariance = result.covariance.unaryExpr([factor](double c) { return std::isfinite(c) ? c * factor : c; });
  }

  result.parameters = p;
  result.standard_errors = result.covariance.diagonal().cwiseAbs().cwiseSqrt();
  result.chi2 = cost;
  result.residual_rms = std::sqrt(cost / static_cast<double>(n));
  return result;
}

FitResult nls_fit(const PointModel& model, std::span<const double> x, std::span<const double> y,
                  std::span<const double> weights, const Eigen::VectorXd& initial, std::vector<std::string> names,
                  const FitOptions& options) {
  if (x.size() != y.size()) throw DomainError("nls_fit: x and y differ in length");
  const VectorModel vm = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) out[static_cast<Eigen::Index>(i)] = model(x[i], p);
    return out;
  };
  return nls_fit(vm, y, weights, initial, std::move(names), options);
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> weights) {
  if (x.size() != y.size() || x.size() != weights.size())
    throw DomainError("linear fit: inputs differ in length");
  if (x.size() < 2) throw DomainError("linear fit: need at least two points");
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = weights[i];
    if (!(w > 0.0)) throw DomainError("linear fit: weights must be positive");
    s += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = s * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw DomainError("linear fit: abscissae are degenerate");
  LinearFit out;
  out.slope = (s * sxy - sx * sy) / det;
  out.intercept = (sxx * sy - sx * sxy) / det;
  out.intercept_error = std::sqrt(sxx / det);
  out.slope_error = std::sqrt(s / det);
  out.covariance = -sx / det;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = y[i] - out.intercept - out.slope * x[i];
    out.chi2 += weights[i] * d * d;
  }
  return out;
}

// --- dip ----------------------------------------------------------------------

double mean_abs_exp(double gamma, double lower, double upper) {
  const double w = upper - lower;
  if (!(w > 0.0)) return std::exp(-gamma * std::abs(lower));
  // integral_0^t exp(-gamma s) ds, signed in t
  auto prim = [gamma](double t) {
    const double s = std::abs(t);
    const double v = gamma * s > 1e-8 ? -std::expm1(-gamma * s) / gamma : s * (1.0 - 0.5 * gamma * s);
    return t < 0 ? -v : v;
  };
  return (prim(upper) - prim(lower)) / w;
}

double dip_model(double tau, double bin_width, double a, double gamma) {
  return 1.0 - a * mean_abs_exp(gamma, tau - 0.5 * bin_width, tau + 0.5 * bin_width);
}

FitResult fit_g2_dip(const G2Estimate& g2, double tau_window) {
  if (!(tau_window > 0.0)) throw DomainError("dip fit: window must be positive");
  std::vector<double> x, y, w;
  for (std::size_t i = 0; i < g2.tau.size(); ++i) {
    if (std::abs(g2.tau[i]) > tau_window) continue;
    x.push_back(g2.tau[i]);
    y.push_back(g2.values[i]);
    const double var = i < g2.variances.size() ? g2.variances[i] : 0.0;
    w.push_back(var > 0.0 ? 1.0 / var : 1.0);
  }
  if (x.size() < 5)
    throw DomainError("dip fit: only " + std::to_string(x.size()) + " bins inside the window, need 5");

  const double lowest = *std::min_element(y.begin(), y.end());
  const double a0 = std::clamp(1.0 - lowest, 0.05, 2.0);
  const double target = 1.0 - a0 / std::exp(1.0);
  double crossing = kInf;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) > 0.5 * g2.bin_width && y[i] >= target) crossing = std::min(crossing, std::abs(x[i]));
  const double gamma0 = std::isfinite(crossing) ? 1.0 / crossing : 3.0 / tau_window;

  const double width = g2.bin_width;
  const PointModel model = [width](double t, const Eigen::VectorXd& p) { return dip_model(t, width, p[0], p[1]); };
  FitOptions opt;
  opt.lower = Eigen::Vector2d(-kInf, 1e-6 / tau_window);
  opt.upper = Eigen::Vector2d(kInf, kInf);
  auto fit = nls_fit(model, x, y, w, Eigen::Vector2d(a0, gamma0), {"a", "Gamma"}, opt);
  if (!fit.converged) throw FitError("dip fit did not converge: " + fit.message, fit);
  return fit;
}

// --- lifetime -----------------------------------------------------------------

LifetimeExtrapolation extrapolate_lifetime(std::span<const PowerPoint> series) {
  if (series.size() < 3) throw DomainError("lifetime extrapolation needs at least three powers");
  std::vector<PowerPoint> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end(), [](const PowerPoint& a, const PowerPoint& b) {
    return a.power_mw < b.power_mw || (a.power_mw == b.power_mw && a.gamma < b.gamma);
  });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i].power_mw > 0.0)) throw DomainError("lifetime extrapolation: powers must be positive");
    if (i > 0 && sorted[i].power_mw == sorted[i - 1].power_mw)
      throw DomainError("lifetime extrapolation: powers must be distinct");
  }
  std::vector<double> x, y, w;
  for (const auto& pt : sorted) {
    x.push_back(pt.power_mw);
    y.push_back(pt.gamma);
    w.push_back(pt.uncertainty > 0.0 ? 1.0 / (pt.uncertainty * pt.uncertainty) : 1.0);
  }
  const auto lin = weighted_linear_fit(x, y, w);
  LifetimeExtrapolation out;
  out.gamma0 = lin.intercept;
  out.slope = lin.slope;
  const bool weighted = std::any_of(sorted.begin(), sorted.end(), [](const PowerPoint& p) { return p.uncertainty > 0.0; });
  // Without uncertainties the scatter about the line sets the error scale.
  const double scale = weighted ? 1.0 : std::sqrt(lin.chi2 / static_cast<double>(x.size() - 2));
  out.gamma0_error = lin.intercept_error * scale;
  out.slope_error = lin.slope_error * scale;
  if (!(out.gamma0 > 0.0))
    throw DomainError("lifetime extrapolation: zero-power intercept " + std::to_string(out.gamma0) +
                      " s^-1 is not positive");
  out.lifetime = 1.0 / out.gamma0;
  out.lifetime_error = out.gamma0_error / (out.gamma0 * out.gamma0);
  return out;
}

// --- saturation ---------------------------------------------------------------

double saturation_model(double power_mw, double r_inf, double p_sat, double droop) {
  return r_inf * power_mw / (power_mw + p_sat + droop * power_mw * power_mw);
}

SaturationParameters saturation_parameters(const EmitterParams& params, double efficiency) {
  params.validate();
  if (params.deshelve_power_coefficient != 0.0)
    throw DomainError("saturation parameters need power-independent deshelving");
  if (!(params.pump_coefficient > 0.0)) throw DomainError("saturation parameters need a pump coefficient");
  const double k0 = params.shelve_rate;
  const double alpha = params.shelve_power_coefficient;
  const double q = params.deshelve_rate_base;
  if ((k0 > 0.0 || alpha > 0.0) && !(q > 0.0))
    throw DomainError("saturation parameters: shelf without a way out");
  const double kappa = params.pump_coefficient;
  const double a = 1.0 + alpha / kappa + (q > 0.0 ? k0 / q : 0.0);
  SaturationParameters out;
  out.r_inf = params.gamma * params.quantum_efficiency * efficiency / a;
  out.p_sat = (params.gamma + k0) / (kappa * a);
  out.droop = q > 0.0 ? alpha / (q * a) : 0.0;
  return out;
}

FitResult fit_saturation(std::span<const SaturationPoint> points) {
  if (points.size() < 4) throw DomainError("saturation fit needs at least four points");
  std::vector<double> x, y, w;
  for (const auto& pt : points) {
    if (!(pt.power_mw > 0.0)) throw DomainError("saturation fit: powers must be positive");
    x.push_back(pt.power_mw);
    y.push_back(pt.rate);
    w.push_back(pt.uncertainty > 0.0 ? 1.0 / (pt.uncertainty * pt.uncertainty) : 1.0);
  }
  const bool weighted = std::any_of(points.begin(), points.end(), [](const SaturationPoint& p) { return p.uncertainty > 0.0; });

  // Start: R_inf from the largest rate, P_sat where the rate first passes half of it.
  const auto top = std::max_element(y.begin(), y.end());
  const double r0 = *top * 1.2;
  double p0 = x[static_cast<std::size_t>(top - y.begin())];
  double best = kInf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::abs(y[i] - 0.5 * r0);
    if (d < best) {
      best = d;
      p0 = x[i];
    }
  }
  const PointModel model = [](double p, const Eigen::VectorXd& q) { return saturation_model(p, q[0], q[1], q[2]); };
  FitOptions opt;
  opt.lower = Eigen::Vector3d(0.0, 0.0, 0.0);
  opt.upper = Eigen::Vector3d(kInf, kInf, kInf);
  opt.scale_covariance = !weighted;
  opt.max_iterations = 500;
  auto fit = nls_fit(model, x, y, w, Eigen::Vector3d(r0, p0, 0.0), {"R_inf", "P_sat", "D"}, opt);
  if (!fit.converged) throw FitError("saturation fit did not converge: " + fit.message, fit);
  return fit;
}

// --- linescan -----------------------------------------------------------------

double gaussian_linescan_model(double x, double b, double s, double x0, double sigma) {
  const double z = (x - x0) / sigma;
  return b + s * std::exp(-0.5 * z * z);
}

std::vector<double> synthetic_linescan(std::span<const double> position, double signal, double background,
                                       double center, double fwhm, std::uint64_t seed, bool noisy) {
  if (!(fwhm > 0.0)) throw DomainError("linescan: FWHM must be positive");
  if (!(signal >= 0.0) || !(background >= 0.0)) throw DomainError("linescan: levels must be >= 0");
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(position.size());
  for (double x : position) {
    const double mean = gaussian_linescan_model(x, background, signal, center, fwhm / 2.3548200450309493);
    out.push_back(noisy ? static_cast<double>(rng.poisson(mean)) : mean);
  }
  return out;
}

LinescanFit fit_gaussian_linescan(std::span<const double> position, std::span<const double> counts) {
  if (position.size() != counts.size()) throw DomainError("linescan: positions and counts differ in length");
  if (position.size() < 5) throw DomainError("linescan fit needs at least five points");

  const auto [lo_it, hi_it] = std::minmax_element(counts.begin(), counts.end());
  const auto [xmin_it, xmax_it] = std::minmax_element(position.begin(), position.end());
  const double span = *xmax_it - *xmin_it;
  LinescanFit out;
  if (!(span > 0.0)) throw DomainError("linescan: positions must not all coincide");

  const double b0 = *lo_it;
  const double s0 = *hi_it - *lo_it;
  const double x00 = position[static_cast<std::size_t>(hi_it - counts.begin())];
  // Width from the half-maximum crossings around the peak.
  double above = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] - b0 >= 0.5 * s0) above += 1.0;
  const double pitch = span / static_cast<double>(position.size() - 1);
  const double sigma0 = std::max(above * pitch, pitch) / 2.3548200450309493;

  std::vector<double> w(counts.size(), 1.0);
  const PointModel model = [](double x, const Eigen::VectorXd& p) {
    return gaussian_linescan_model(x, p[0], p[1], p[2], p[3]);
  };
  FitOptions opt;
  opt.scale_covariance = true;
  opt.lower = Eigen::Vector4d(-kInf, -kInf, *xmin_it - span, 1e-6 * span);
  opt.upper = Eigen::Vector4d(kInf, kInf, *xmax_it + span, 10.0 * span);
  out.fit = nls_fit(model, position, counts, w, Eigen::Vector4d(b0, s0, x00, sigma0), {"B", "S", "x0", "sigma"}, opt);

  out.background = out.fit.parameters[0];
  out.signal = out.fit.parameters[1];
  out.center = out.fit.parameters[2];
  out.fwhm = 2.3548200450309493 * out.fit.parameters[3];
  const double s_err = out.fit.standard_errors[1];
  const double level = std::max(std::abs(out.background), std::abs(out.signal));
  out.degenerate = !(s0 > 0.0) || !(out.signal > 3.0 * s_err) || out.signal <= 1e-9 * level;
  if (!out.fit.converged && !out.degenerate) throw FitError("linescan fit did not converge: " + out.fit.message, out.fit);
  out.background_free = !out.degenerate && std::abs(out.background) <= 1e-9 * std::abs(out.signal);
  if (out.degenerate)
    out.sb_ratio = 0.0;
  else
    out.sb_ratio = out.background_free || out.background <= 0.0 ? kInf : out.signal / out.background;
  return out;
}

} // namespace spsim
