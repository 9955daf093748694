#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace spsim {

/// Indices of the three effective levels: ground, excited, metastable shelf.
enum State : int { kGround = 0, kExcited = 1, kShelf = 2 };

/// Rates of the three-level emitter. All rates in s^-1, power coefficients in
/// s^-1 per mW.
///
/// Transitions: g->e at r = pump_coefficient * P, e->g at gamma,
/// e->s at shelve_rate + shelve_power_coefficient * P,
/// s->g at deshelve_rate_base + deshelve_power_coefficient * P.
struct EmitterParams {
  double gamma = 0.0;
  double pump_coefficient = 0.0;
  double shelve_rate = 0.0;
  double shelve_power_coefficient = 0.0;
  double deshelve_rate_base = 0.0;
  double deshelve_power_coefficient = 0.0;
  double quantum_efficiency = 1.0;

  void validate() const;

  double pump_rate(double power_mw) const { return pump_coefficient * power_mw; }
  double shelving_rate(double power_mw) const {
    return shelve_rate + shelve_power_coefficient * power_mw;
  }
  double deshelving_rate(double power_mw) const {
    return deshelve_rate_base + deshelve_power_coefficient * power_mw;
  }
  double lifetime() const { return 1.0 / gamma; }

  /// Same emitter with the shelf switched off.
  EmitterParams without_shelving() const;
};

/// Nanocrystal reference parameters:
///   gamma = 1/(25 ns); pump coefficient so that r = gamma at 0.75 mW;
///   deshelving 1/(390 ns); shelving three times faster, which puts the
///   saturated excited population at 0.25. No power dependence, unity
///   quantum efficiency.
EmitterParams nanocrystal_defaults();

enum class Geometry { Bulk, NanocrystalOnSubstrate };

struct OpticalEnvironment {
  double bulk_lifetime = 11.6e-9; // s
  double diamond_index = 2.4;
  double substrate_index = 1.45;
  Geometry geometry = Geometry::NanocrystalOnSubstrate;

  void validate() const;
};

/// Factors of the overall detection efficiency and the saturated population.
struct DetectionBudget {
  double eta_geo = 0.38;
  double eta_opt = 0.25;
  double eta_det = 0.7;
  double sigma2_inf = 0.25;

  void validate() const;
  double total_efficiency() const { return eta_geo * eta_opt * eta_det; }
};

enum class ExcitationMode { CW, Pulsed };

/// CW: power is the mean power. Pulsed: power is the peak power of
/// rectangular pulses of width pulse_width starting every period.
struct ExcitationConfig {
  ExcitationMode mode = ExcitationMode::CW;
  double power_mw = 0.0;
  double period = 100e-9;     // s
  double pulse_width = 1.2e-9; // s

  void validate() const;
  double mean_power_mw() const;
};

/// 3x3 generator (column convention, dp/dt = G p) at the given pump power.
/// Throws DomainError for negative power.
Eigen::Matrix3d rate_matrix(const EmitterParams& params, double power_mw);

/// Stationary occupancy (pi_g, pi_e, pi_s) of a generator.
Eigen::Vector3d steady_state(const Eigen::Matrix3d& generator);

/// Excited population in the infinite-pump limit at fixed shelving rates.
double saturated_population(const EmitterParams& params, double power_mw);

/// Stationary rate of recorded photons, gamma * QE * pi_e.
double emission_rate_cw(const EmitterParams& params, double power_mw);

/// Intensity correlation of the emitted light under CW pumping,
/// g2(tau) = P(e at tau | g at 0) / pi_e, via the matrix exponential.
std::vector<double> analytic_g2_cw(const EmitterParams& params, double power_mw,
                                   std::span<const double> tau);

/// Zero-delay correlation of p identical independent emitters, 1 - 1/p.
double multi_emitter_dip(int emitters);

/// Radiative lifetime in the given optical environment.
double lifetime_scaling(const OpticalEnvironment& env);

/// eta_geo * eta_opt * eta_det * sigma2_inf / lifetime.
double saturated_rate_cw(const DetectionBudget& budget, double lifetime);

/// eta_T * [t_on / (t_on + t_off)] / period.
///
/// Applied exactly as written: eta_T = 0.0665, t_on = 460 ns, t_off = 390 ns
/// and a 100 ns period give 3.6e5 s^-1, not 1.4e5 s^-1. No extra factor is
/// inserted to bridge the two.
double saturated_rate_pulsed(const DetectionBudget& budget, double t_on, double t_off,
                             double period);

/// Photons detected within one lifetime, rate * lifetime.
double photons_per_lifetime(double rate, double lifetime);

/// Photon-number statistics of one emitter under a periodic pulse train,
/// evaluated exactly with matrix exponentials in the periodic steady state.
/// Photons are counted in windows [n period, (n+1) period).
struct PulsedEmissionStats {
  Eigen::Vector3d periodic_state;     // occupancy at the start of a pulse
  double mean_per_period = 0.0;       // E[N]
  double factorial_moment2 = 0.0;     // E[N (N - 1)]
  double cn0 = 0.0;                   // E[N (N - 1)] / E[N]^2
  std::vector<double> cn;             // cn[m - 1] = E[N_0 N_m] / E[N]^2
  double p_zero = 0.0;
  double p_one = 0.0;
  double p_multi = 0.0;               // P(N >= 2)
};

PulsedEmissionStats pulsed_emission_stats(const EmitterParams& params,
                                          const ExcitationConfig& excitation, int max_lag);

} // namespace spsim
