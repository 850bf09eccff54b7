#include "ttpc/quadrature.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ttpc {

namespace {

void check_mode(std::size_t mode, std::size_t n_modes, const char* what) {
  if (mode >= n_modes) {
    std::ostringstream msg;
    msg << what << ": mode " << mode << " out of range for " << n_modes << " modes";
    throw std::invalid_argument(msg.str());
  }
}

void check_pair(std::size_t i, std::size_t j, std::size_t n_modes, const char* what) {
  check_mode(i, n_modes, what);
  check_mode(j, n_modes, what);
  if (i == j) throw std::invalid_argument(std::string(what) + ": modes must differ");
}

std::string label(const char* name, std::initializer_list<double> params,
                  std::initializer_list<std::size_t> modes) {
  std::ostringstream out;
  out << name << '(';
  const char* sep = "";
  for (double p : params) { out << sep << p; sep = ","; }
  for (auto m : modes) { out << sep << m; sep = ","; }
  out << ')';
  return out.str();
}

}  // namespace

Matrix symplectic_form(std::size_t n_modes) {
  Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    omega(x_index(k), y_index(k)) = 1.0;
    omega(y_index(k), x_index(k)) = -1.0;
  }
  return omega;
}

GaussianState::GaussianState(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0 || mean_.size() % 2 != 0)
    throw std::invalid_argument("GaussianState: mean must have even, nonzero length");
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw std::invalid_argument("GaussianState: covariance shape does not match mean");
  if (!cov_.allFinite() || !mean_.allFinite())
    throw std::invalid_argument("GaussianState: non-finite moments");
  for (Eigen::Index i = 0; i < cov_.rows(); ++i)
    for (Eigen::Index j = i + 1; j < cov_.cols(); ++j)
      if (cov_(i, j) != cov_(j, i)) throw std::invalid_argument("GaussianState: covariance not symmetric");
}

double GaussianState::uncertainty_margin() const {
  const auto n = cov_.rows();
  Eigen::MatrixXcd h(n, n);
  const Matrix omega = symplectic_form(n_modes());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) h(i, j) = {cov_(i, j), omega(i, j)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

GaussianState vacuum_state(std::size_t n_modes) {
  if (n_modes == 0) throw std::invalid_argument("vacuum_state: n_modes must be >= 1");
  const auto dim = static_cast<Eigen::Index>(2 * n_modes);
  return GaussianState(Vector::Zero(dim), Matrix::Identity(dim, dim));
}

double SymplecticOp::symplectic_defect() const {
  const Matrix omega = symplectic_form(n_modes());
  return (matrix * omega * matrix.transpose() - omega).cwiseAbs().maxCoeff();
}

SymplecticOp SymplecticOp::after(const SymplecticOp& first) const {
  if (first.matrix.rows() != matrix.rows())
    throw std::invalid_argument("SymplecticOp::after: dimension mismatch");
  return {matrix * first.matrix, description + " * " + first.description};
}

SymplecticOp SymplecticOp::inverse() const {
  // S^{-1} = -Omega S^T Omega for symplectic S.
  const Matrix omega = symplectic_form(n_modes());
  return {-omega * matrix.transpose() * omega, "inv(" + description + ")"};
}

SymplecticOp identity_op(std::size_t n_modes) {
  if (n_modes == 0) throw std::invalid_argument("identity_op: n_modes must be >= 1");
  const auto dim = static_cast<Eigen::Index>(2 * n_modes);
  return {Matrix::Identity(dim, dim), "I"};
}

SymplecticOp two_mode_squeezer(double r, std::size_t i, std::size_t j, std::size_t n_modes) {
  check_pair(i, j, n_modes, "two_mode_squeezer");
  if (!(r >= 0.0) || !std::isfinite(r))
    throw std::invalid_argument("two_mode_squeezer: r must be finite and >= 0");
  SymplecticOp op = identity_op(n_modes);
  const double c = std::cosh(r);
  const double s = std::sinh(r);
  Matrix& m = op.matrix;
  m(x_index(i), x_index(i)) = c;
  m(x_index(i), x_index(j)) = -s;
  m(x_index(j), x_index(j)) = c;
  m(x_index(j), x_index(i)) = -s;
  m(y_index(i), y_index(i)) = c;
  m(y_index(i), y_index(j)) = s;
  m(y_index(j), y_index(j)) = c;
  m(y_index(j), y_index(i)) = s;
  op.description = label("TMS", {r}, {i, j});
  return op;
}

SymplecticOp beamsplitter(double t, double phase, std::size_t i, std::size_t j,
                          std::size_t n_modes) {
  check_pair(i, j, n_modes, "beamsplitter");
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("beamsplitter: t must lie in (0,1)");
  if (!std::isfinite(phase)) throw std::invalid_argument("beamsplitter: non-finite phase");
  SymplecticOp op = identity_op(n_modes);
  const double tau = std::sqrt(t);
  const double rho = std::sqrt(1.0 - t);
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  Matrix& m = op.matrix;
  const auto xi = x_index(i), yi = y_index(i), xj = x_index(j), yj = y_index(j);
  // b_i' = tau b_i + rho (c + i s) b_j
  m(xi, xi) = tau;
  m(xi, xj) = rho * c;
  m(xi, yj) = -rho * s;
  m(yi, yi) = tau;
  m(yi, xj) = rho * s;
  m(yi, yj) = rho * c;
  // b_j' = -rho (c - i s) b_i + tau b_j
  m(xj, xi) = -rho * c;
  m(xj, yi) = -rho * s;
  m(xj, xj) = tau;
  m(yj, xi) = rho * s;
  m(yj, yi) = -rho * c;
  m(yj, yj) = tau;
  op.description = label("BS", {t, phase}, {i, j});
  return op;
}

SymplecticOp phase_shift(double theta, std::size_t i, std::size_t n_modes) {
  check_mode(i, n_modes, "phase_shift");
  SymplecticOp op = identity_op(n_modes);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Matrix& m = op.matrix;
  m(x_index(i), x_index(i)) = c;
  m(x_index(i), y_index(i)) = -s;
  m(y_index(i), x_index(i)) = s;
  m(y_index(i), y_index(i)) = c;
  op.description = label("PS", {theta}, {i});
  return op;
}

SymplecticOp mode_swap(std::size_t i, std::size_t j, std::size_t n_modes) {
  check_pair(i, j, n_modes, "mode_swap");
  SymplecticOp op = identity_op(n_modes);
  Matrix& m = op.matrix;
  for (auto [a, b] : {std::pair{x_index(i), x_index(j)}, std::pair{y_index(i), y_index(j)}}) {
    m(a, a) = 0.0;
    m(b, b) = 0.0;
    m(a, b) = 1.0;
    m(b, a) = 1.0;
  }
  op.description = label("SWAP", {}, {i, j});
  return op;
}

GaussianState apply(const SymplecticOp& op, const GaussianState& state) {
  if (op.matrix.rows() != state.cov().rows() || op.matrix.cols() != state.cov().cols())
    throw std::invalid_argument("apply: operator dimension does not match state");
  Matrix cov = op.matrix * state.cov() * op.matrix.transpose();
  // Store exactly symmetric.
  cov = (0.5 * (cov + cov.transpose())).eval();
  return GaussianState(op.matrix * state.mean(), std::move(cov));
}

VarianceParts linear_form_variance(const GaussianState& state, const LinearForm& form,
                                   SignalVariances signal) {
  if (form.coeffs.size() != state.mean().size())
    throw std::invalid_argument("linear_form_variance: form length does not match state");
  if (!(signal.vx >= 0.0) || !(signal.vy >= 0.0))
    throw std::invalid_argument("linear_form_variance: signal variances must be >= 0");
  if (!form.coeffs.allFinite() || !std::isfinite(form.signal_coeffs[0]) ||
      !std::isfinite(form.signal_coeffs[1]))
    throw std::invalid_argument("linear_form_variance: non-finite coefficients");
  VarianceParts parts;
  parts.quantum = form.coeffs.dot(state.cov() * form.coeffs);
  parts.signal = form.signal_coeffs[0] * form.signal_coeffs[0] * signal.vx +
                 form.signal_coeffs[1] * form.signal_coeffs[1] * signal.vy;
  return parts;
}

}  // namespace ttpc
