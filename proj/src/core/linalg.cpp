#include "core/linalg.hpp"

#include "core/errors.hpp"

#include <array>
#include <cmath>

namespace spsim::linalg {

namespace {

constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

// Largest 1-norm for which the unscaled degree-13 approximant is accurate to
// double precision.
constexpr double kTheta13 = 5.371920351148152;

} // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  if (n != a.cols()) throw DomainError("expm: matrix must be square");
  if (n == 0) return a;
  if (!a.allFinite()) throw DomainError("expm: non-finite matrix entries");

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const Eigen::MatrixXd x = a / std::ldexp(1.0, squarings);

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd x2 = x * x;
  const Eigen::MatrixXd x4 = x2 * x2;
  const Eigen::MatrixXd x6 = x4 * x2;
  const auto& b = kPade13;

  const Eigen::MatrixXd u_inner = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 +
                                  b[5] * x4 + b[3] * x2 + b[1] * id;
  const Eigen::MatrixXd u = x * u_inner;
  const Eigen::MatrixXd v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 +
                            b[4] * x4 + b[2] * x2 + b[0] * id;

  Eigen::MatrixXd r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

Eigen::VectorXd stationary(const Eigen::MatrixXd& generator) {
  const auto n = generator.rows();
  if (n == 0 || n != generator.cols()) throw DomainError("stationary: matrix must be square");
  if (!generator.allFinite()) throw DomainError("stationary: non-finite entries");

  const double scale = generator.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    if (n == 1) return Eigen::VectorXd::Ones(1);
    throw DomainError("stationary: all rates zero, stationary distribution not unique");
  }
  const Eigen::MatrixXd g = generator / scale;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  lu.setThreshold(1e-12);
  if (lu.rank() != n - 1)
    throw DomainError("stationary: chain is reducible, stationary distribution not unique");

  Eigen::MatrixXd m = g;
  m.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd p = m.fullPivLu().solve(rhs);

  for (Eigen::Index i = 0; i < n; ++i) {
    if (p(i) < -1e-10) throw DomainError("stationary: solution has negative mass; not a valid generator");
    if (p(i) < 0.0) p(i) = 0.0;
  }
  p /= p.sum();
  return p;
}

BlockExp convolution_exp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::MatrixXd& c, double t) {
  const auto n = a.rows();
  const auto m = c.rows();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n + m, n + m);
  big.topLeftCorner(n, n) = a * t;
  big.topRightCorner(n, m) = b * t;
  big.bottomRightCorner(m, m) = c * t;
  const Eigen::MatrixXd e = expm(big);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m), e.bottomRightCorner(m, m)};
}

} // namespace spsim::linalg
