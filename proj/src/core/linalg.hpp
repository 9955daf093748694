#pragma once

#include <Eigen/Dense>

namespace spsim::linalg {

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant (Higham 2005). Relative accuracy ~1e-15 for the small,
/// well-conditioned generators used here.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// Stationary distribution of a transition-rate matrix in column convention
/// (dp/dt = G p, columns summing to zero): the unique p >= 0 with G p = 0 and
/// sum(p) = 1. Also works for (U - I) with U column-stochastic.
/// Throws DomainError when the stationary distribution is not unique.
Eigen::VectorXd stationary(const Eigen::MatrixXd& generator);

/// Upper-right block of exp(t * [[a, b], [0, c]]), i.e.
/// integral_0^t exp(a (t - s)) b exp(c s) ds, together with the diagonal blocks.
struct BlockExp {
  Eigen::MatrixXd left;    // exp(a t)
  Eigen::MatrixXd coupled; // the convolution integral
  Eigen::MatrixXd right;   // exp(c t)
};
BlockExp convolution_exp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::MatrixXd& c, double t);

} // namespace spsim::linalg
