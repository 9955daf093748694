#pragma once

#include "core/correlate.hpp"
#include "core/model.hpp"

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spsim {

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd parameters;
  Eigen::VectorXd standard_errors;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;          // weighted sum of squared residuals
  double residual_rms = 0.0;  // sqrt(chi2 / points)
  std::size_t points = 0;
  int iterations = 0;
  bool converged = false;
  std::string message;

  double value(std::string_view name) const;
  double error(std::string_view name) const;
};

/// Thrown by the fitting front ends when the optimiser gives up. Carries the
/// last iterate.
class FitError : public std::runtime_error {
public:
  FitError(const std::string& what, FitResult result)
      : std::runtime_error(what), result_(std::move(result)) {}
  const FitResult& result() const noexcept { return result_; }

private:
  FitResult result_;
};

struct FitOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-8;     // relative parameter step
  double gradient_tolerance = 1e-10;
  /// Box constraints, enforced by projection. Empty means unbounded; use
  /// +-infinity for one-sided bounds.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  /// Multiply the covariance by chi2 / (n - k). For fits whose weights are
  /// not actual inverse variances.
  bool scale_covariance = false;
  /// Unweighted d model / d p; numeric central differences when empty.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& p)> jacobian;
};

/// Model predictions for every data point at parameter vector p.
using VectorModel = std::function<Eigen::VectorXd(const Eigen::VectorXd& p)>;
/// Prediction at a single abscissa.
using PointModel = std::function<double(double x, const Eigen::VectorXd& p)>;

/// Central-difference Jacobian d model / d p, one column per parameter.
Eigen::MatrixXd numeric_jacobian(const VectorModel& model, const Eigen::VectorXd& p);

/// Weighted Levenberg-Marquardt minimising sum w_i (y_i - f_i(p))^2.
///
/// Converged when an accepted step changes every parameter by less than
/// step_tolerance relative, or when the gradient, scaled per parameter by
/// its column norm and by the weighted data norm, drops below
/// gradient_tolerance. Running out of iterations, or stalling with no
/// cost-reducing step while the scaled gradient is still above 1e-6, gives
/// converged = false. Parameters never become NaN: non-finite trial points
/// are rejected like uphill steps.
FitResult nls_fit(const VectorModel& model, std::span<const double> y, std::span<const double> weights,
                  const Eigen::VectorXd& initial, std::vector<std::string> names,
                  const FitOptions& options = {});

FitResult nls_fit(const PointModel& model, std::span<const double> x, std::span<const double> y,
                  std::span<const double> weights, const Eigen::VectorXd& initial,
                  std::vector<std::string> names, const FitOptions& options = {});

/// Closed-form weighted straight line y = intercept + slope * x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_error = 0.0;
  double slope_error = 0.0;
  double covariance = 0.0;    // cov(intercept, slope)
  double chi2 = 0.0;
};
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> weights);

// --- antibunching dip -------------------------------------------------------

/// Mean of exp(-gamma |tau|) over [lower, upper].
double mean_abs_exp(double gamma, double lower, double upper);

/// 1 - a exp(-Gamma |tau|), averaged over each bin of width w centred at tau.
double dip_model(double tau, double bin_width, double a, double gamma);

/// Fits the bins with |tau| <= tau_window. Parameters "a" and "Gamma" (s^-1).
/// Weights are inverse variances; bins with zero variance get unit weight.
/// Initial Gamma from the 1 - a/e crossing. Throws DomainError with fewer
/// than 5 bins in the window and FitError on non-convergence.
FitResult fit_g2_dip(const G2Estimate& g2, double tau_window);

// --- lifetime extrapolation -------------------------------------------------

struct PowerPoint {
  double power_mw = 0.0;
  double gamma = 0.0;       // fitted dip rate, s^-1
  double uncertainty = 0.0; // s^-1; 0 means unweighted
};

struct LifetimeExtrapolation {
  double gamma0 = 0.0;        // s^-1
  double gamma0_error = 0.0;
  double slope = 0.0;         // s^-1 mW^-1
  double slope_error = 0.0;
  double lifetime = 0.0;      // s
  double lifetime_error = 0.0;
};

/// Gamma(P) = gamma0 + slope P. Needs at least three distinct positive
/// powers. DomainError when gamma0 <= 0.
LifetimeExtrapolation extrapolate_lifetime(std::span<const PowerPoint> series);

// --- saturation ---------------------------------------------------------------

/// R(P) = R_inf P / (P + P_sat + D P^2).
///
/// This is gamma * eta * pi_e(P) of the three-level chain rewritten in three
/// identifiable combinations, valid with power-independent deshelving:
/// R_inf is the saturated rate, P_sat the half-saturation power when D = 0,
/// and D > 0 the droop from power-driven shelving.
double saturation_model(double power_mw, double r_inf, double p_sat, double droop);

struct SaturationPoint {
  double power_mw = 0.0;
  double rate = 0.0;        // s^-1
  double uncertainty = 0.0; // s^-1; 0 means Poisson-free, unit weights
};

/// Parameters "R_inf" (s^-1), "P_sat" (mW), "D" (mW^-1), with P_sat, D >= 0.
/// Needs at least 4 points. Throws FitError on non-convergence.
FitResult fit_saturation(std::span<const SaturationPoint> points);

/// Closed-form R_inf, P_sat, D implied by emitter parameters and a
/// detection efficiency (zero deshelving power coefficient required).
struct SaturationParameters {
  double r_inf = 0.0;
  double p_sat = 0.0;
  double droop = 0.0;
};
SaturationParameters saturation_parameters(const EmitterParams& params, double efficiency);

// --- Gaussian linescan --------------------------------------------------------

struct LinescanFit {
  FitResult fit;              // "B", "S", "x0", "sigma"
  double signal = 0.0;        // S
  double background = 0.0;    // B
  double center = 0.0;
  double fwhm = 0.0;
  double sb_ratio = 0.0;      // S / B, +inf when background-free
  bool background_free = false;
  bool degenerate = false;    // no significant peak
};

double gaussian_linescan_model(double x, double b, double s, double x0, double sigma);

/// Synthetic confocal linescan: expected counts B + S exp(-(x - x0)^2 / 2 s^2)
/// with the width given as FWHM, Poisson-sampled unless `noisy` is false.
std::vector<double> synthetic_linescan(std::span<const double> position, double signal, double background,
                                       double center, double fwhm, std::uint64_t seed, bool noisy = true);

/// Unit weights, covariance scaled by the residual variance. A flat scan is
/// returned flagged as degenerate rather than thrown.
LinescanFit fit_gaussian_linescan(std::span<const double> position, std::span<const double> counts);

} // namespace spsim
