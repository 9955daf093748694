#include "core/model.hpp"

#include "core/errors.hpp"
#include "core/linalg.hpp"

#include <cmath>
#include <string>

namespace spsim {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

bool in_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

} // namespace

void EmitterParams::validate() const {
  require(std::isfinite(gamma) && gamma > 0.0, "emitter: gamma must be positive");
  require(finite_nonneg(pump_coefficient), "emitter: pump coefficient must be >= 0");
  require(finite_nonneg(shelve_rate), "emitter: shelving rate must be >= 0");
  require(finite_nonneg(shelve_power_coefficient), "emitter: shelving power coefficient must be >= 0");
  require(finite_nonneg(deshelve_rate_base), "emitter: deshelving rate must be >= 0");
  require(finite_nonneg(deshelve_power_coefficient), "emitter: deshelving power coefficient must be >= 0");
  require(in_unit(quantum_efficiency), "emitter: quantum efficiency must lie in [0, 1]");
}

EmitterParams EmitterParams::without_shelving() const {
  EmitterParams p = *this;
  p.shelve_rate = 0.0;
  p.shelve_power_coefficient = 0.0;
  return p;
}

EmitterParams nanocrystal_defaults() {
  EmitterParams p;
  p.gamma = 1.0 / 25e-9;
  p.pump_coefficient = p.gamma / 0.75;
  p.deshelve_rate_base = 1.0 / 390e-9;
  p.shelve_rate = 3.0 * p.deshelve_rate_base;
  p.quantum_efficiency = 1.0;
  return p;
}

void OpticalEnvironment::validate() const {
  require(std::isfinite(bulk_lifetime) && bulk_lifetime > 0.0, "environment: bulk lifetime must be positive");
  require(std::isfinite(diamond_index) && diamond_index >= 1.0, "environment: diamond index must be >= 1");
  require(std::isfinite(substrate_index) && substrate_index >= 1.0, "environment: substrate index must be >= 1");
}

void DetectionBudget::validate() const {
  require(in_unit(eta_geo) && in_unit(eta_opt) && in_unit(eta_det) && in_unit(sigma2_inf),
          "budget: every factor must lie in [0, 1]");
}

void ExcitationConfig::validate() const {
  require(finite_nonneg(power_mw), "excitation: power must be >= 0");
  if (mode == ExcitationMode::Pulsed) {
    require(std::isfinite(period) && period > 0.0, "excitation: period must be positive");
    require(std::isfinite(pulse_width) && pulse_width > 0.0 && pulse_width < period,
            "excitation: pulse width must satisfy 0 < width < period");
  }
}

double ExcitationConfig::mean_power_mw() const {
  return mode == ExcitationMode::CW ? power_mw : power_mw * pulse_width / period;
}

Eigen::Matrix3d rate_matrix(const EmitterParams& params, double power_mw) {
  params.validate();
  if (!(power_mw >= 0.0) || !std::isfinite(power_mw))
    throw DomainError("rate_matrix: power must be >= 0, got " + std::to_string(power_mw));

  const double r = params.pump_rate(power_mw);
  const double k_es = params.shelving_rate(power_mw);
  const double k_sg = params.deshelving_rate(power_mw);

  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  // g(to, from)
  g(kExcited, kGround) = r;
  g(kGround, kExcited) = params.gamma;
  g(kShelf, kExcited) = k_es;
  g(kGround, kShelf) = k_sg;
  g(kGround, kGround) = -r;
  g(kExcited, kExcited) = -(params.gamma + k_es);
  g(kShelf, kShelf) = -k_sg;
  return g;
}

Eigen::Vector3d steady_state(const Eigen::Matrix3d& generator) {
  const Eigen::MatrixXd g = generator;
  return linalg::stationary(g);
}

double saturated_population(const EmitterParams& params, double power_mw) {
  params.validate();
  const double k_es = params.shelving_rate(power_mw);
  const double k_sg = params.deshelving_rate(power_mw);
  if (k_es == 0.0) return 1.0;
  if (k_sg == 0.0) return 0.0;
  return 1.0 / (1.0 + k_es / k_sg);
}

double emission_rate_cw(const EmitterParams& params, double power_mw) {
  const Eigen::Vector3d pi = steady_state(rate_matrix(params, power_mw));
  return params.gamma * params.quantum_efficiency * pi(kExcited);
}

std::vector<double> analytic_g2_cw(const EmitterParams& params, double power_mw,
                                   std::span<const double> tau) {
  if (!(power_mw > 0.0)) throw DomainError("analytic_g2_cw: power must be positive");
  const Eigen::Matrix3d g = rate_matrix(params, power_mw);
  const Eigen::Vector3d pi = steady_state(g);
  if (!(pi(kExcited) > 0.0)) throw DomainError("analytic_g2_cw: excited state never populated");

  std::vector<double> out;
  out.reserve(tau.size());
  double previous = 0.0;
  for (double t : tau) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("analytic_g2_cw: delays must be finite and >= 0");
    if (t < previous) throw DomainError("analytic_g2_cw: delay grid must be sorted");
    previous = t;
    const Eigen::MatrixXd u = linalg::expm(Eigen::MatrixXd(g * t));
    const double v = u(kExcited, kGround) / pi(kExcited);
    out.push_back(v < 0.0 ? 0.0 : v);
  }
  return out;
}

double multi_emitter_dip(int emitters) {
  if (emitters < 1) throw DomainError("multi_emitter_dip: need at least one emitter");
  return 1.0 - 1.0 / static_cast<double>(emitters);
}

double lifetime_scaling(const OpticalEnvironment& env) {
  env.validate();
  if (env.geometry == Geometry::Bulk) return env.bulk_lifetime;
  // Half space in air, half in the substrate, against a bulk host of index n_d.
  return env.bulk_lifetime * (2.0 * env.diamond_index / (1.0 + env.substrate_index));
}

double saturated_rate_cw(const DetectionBudget& budget, double lifetime) {
  budget.validate();
  require(std::isfinite(lifetime) && lifetime > 0.0, "saturated_rate_cw: lifetime must be positive");
  return budget.total_efficiency() * budget.sigma2_inf / lifetime;
}

double saturated_rate_pulsed(const DetectionBudget& budget, double t_on, double t_off,
                             double period) {
  budget.validate();
  require(std::isfinite(t_on) && t_on > 0.0, "saturated_rate_pulsed: t_on must be positive");
  require(finite_nonneg(t_off), "saturated_rate_pulsed: t_off must be >= 0");
  require(std::isfinite(period) && period > 0.0, "saturated_rate_pulsed: period must be positive");
  return budget.total_efficiency() * (t_on / (t_on + t_off)) / period;
}

double photons_per_lifetime(double rate, double lifetime) {
  require(finite_nonneg(rate), "photons_per_lifetime: rate must be >= 0");
  require(std::isfinite(lifetime) && lifetime > 0.0, "photons_per_lifetime: lifetime must be positive");
  return rate * lifetime;
}

namespace {

// Propagators of one constant-rate segment of length t.
struct Segment {
  Eigen::Matrix3d u; // state propagator
  Eigen::Matrix3d k; // first-moment (one marked jump) propagator
  Eigen::Matrix3d l; // ordered second-moment propagator
  Eigen::Matrix3d z; // no-emission propagator
  Eigen::Matrix3d y; // exactly-one-emission propagator
};

Segment propagate(const Eigen::Matrix3d& a, const Eigen::Matrix3d& jump, double t) {
  Segment s;
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(9, 9);
  for (int b = 0; b < 3; ++b) big.block(3 * b, 3 * b, 3, 3) = a * t;
  big.block(0, 3, 3, 3) = jump * t;
  big.block(3, 6, 3, 3) = jump * t;
  const Eigen::MatrixXd e = linalg::expm(big);
  s.u = e.block(0, 0, 3, 3);
  s.k = e.block(0, 3, 3, 3);
  s.l = e.block(0, 6, 3, 3);

  const Eigen::Matrix3d a0 = a - jump;
  const auto c = linalg::convolution_exp(a0, jump, a0, t);
  s.z = c.left;
  s.y = c.coupled;
  return s;
}

} // namespace

PulsedEmissionStats pulsed_emission_stats(const EmitterParams& params,
                                          const ExcitationConfig& excitation, int max_lag) {
  params.validate();
  excitation.validate();
  if (excitation.mode != ExcitationMode::Pulsed)
    throw DomainError("pulsed_emission_stats: excitation must be pulsed");
  if (max_lag < 0) throw DomainError("pulsed_emission_stats: max_lag must be >= 0");

  Eigen::Matrix3d jump = Eigen::Matrix3d::Zero();
  jump(kGround, kExcited) = params.gamma * params.quantum_efficiency;

  const Segment on = propagate(rate_matrix(params, excitation.power_mw), jump, excitation.pulse_width);
  const Segment off = propagate(rate_matrix(params, 0.0), jump, excitation.period - excitation.pulse_width);

  const Eigen::Matrix3d u = off.u * on.u;
  const Eigen::Matrix3d k = off.u * on.k + off.k * on.u;
  const Eigen::Matrix3d l = off.u * on.l + off.k * on.k + off.l * on.u;
  const Eigen::Matrix3d z = off.z * on.z;
  const Eigen::Matrix3d y = off.z * on.y + off.y * on.z;

  PulsedEmissionStats out;
  out.periodic_state = linalg::stationary(Eigen::MatrixXd(u - Eigen::Matrix3d::Identity()));
  const Eigen::Vector3d& p0 = out.periodic_state;
  const Eigen::RowVector3d ones = Eigen::RowVector3d::Ones();

  out.mean_per_period = (ones * k * p0).value();
  out.factorial_moment2 = 2.0 * (ones * l * p0).value();
  out.p_zero = (ones * z * p0).value();
  out.p_one = (ones * y * p0).value();
  out.p_multi = std::max(0.0, 1.0 - out.p_zero - out.p_one);

  const double mu2 = out.mean_per_period * out.mean_per_period;
  if (mu2 > 0.0) {
    out.cn0 = out.factorial_moment2 / mu2;
    Eigen::Vector3d v = k * p0; // unnormalized state after a marked window
    out.cn.reserve(static_cast<std::size_t>(max_lag));
    for (int m = 1; m <= max_lag; ++m) {
      out.cn.push_back((ones * k * v).value() / mu2);
      v = u * v;
    }
  } else {
    out.cn.assign(static_cast<std::size_t>(max_lag), 0.0);
  }
  return out;
}

} // namespace spsim
