#pragma once

// Gaussian-state engine over quadrature operators.
//
// Quadratures are interleaved per mode, (X_0, Y_0, X_1, Y_1, ...), and all
// second moments are in shot-noise units: the vacuum has unit variance in
// every quadrature. Mode indices are zero-based throughout.

#include <array>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace ttpc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr std::size_t x_index(std::size_t mode) { return 2 * mode; }
constexpr std::size_t y_index(std::size_t mode) { return 2 * mode + 1; }

/// Standard symplectic form over n modes, block diagonal with [[0,1],[-1,0]].
Matrix symplectic_form(std::size_t n_modes);

class GaussianState {
 public:
  /// Throws std::invalid_argument on dimension mismatch or an asymmetric cov.
  GaussianState(Vector mean, Matrix cov);

  std::size_t n_modes() const { return static_cast<std::size_t>(mean_.size()) / 2; }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }

  /// Smallest eigenvalue of cov + i*Omega; physical states have it >= 0.
  double uncertainty_margin() const;
  bool is_physical(double tol = 1e-9) const { return uncertainty_margin() >= -tol; }

 private:
  Vector mean_;
  Matrix cov_;
};

GaussianState vacuum_state(std::size_t n_modes);

/// Linear map on quadratures, x -> S x.
struct SymplecticOp {
  Matrix matrix;
  std::string description;

  std::size_t n_modes() const { return static_cast<std::size_t>(matrix.rows()) / 2; }

  /// max |S Omega S^T - Omega|
  double symplectic_defect() const;

  /// this applied after `first`.
  SymplecticOp after(const SymplecticOp& first) const;
  SymplecticOp inverse() const;
};

SymplecticOp identity_op(std::size_t n_modes);

/// Two-mode squeezer at deamplification:
///   X_i' = X_i cosh r - X_j sinh r,   Y_i' = Y_i cosh r + Y_j sinh r,
///   X_j' = X_j cosh r - X_i sinh r,   Y_j' = Y_j cosh r + Y_i sinh r.
/// Requires r >= 0 and i != j.
SymplecticOp two_mode_squeezer(double r, std::size_t i, std::size_t j, std::size_t n_modes);

/// Beamsplitter with power transmittance t for port i, mode operators
///   b_i' =  sqrt(t) b_i + sqrt(1-t) e^{i phase} b_j
///   b_j' = -sqrt(1-t) e^{-i phase} b_i + sqrt(t) b_j
/// with b = X + iY. Requires 0 < t < 1.
SymplecticOp beamsplitter(double t, double phase, std::size_t i, std::size_t j,
                          std::size_t n_modes);

/// b_i -> e^{i theta} b_i
SymplecticOp phase_shift(double theta, std::size_t i, std::size_t n_modes);

/// Exchanges the labels of modes i and j.
SymplecticOp mode_swap(std::size_t i, std::size_t j, std::size_t n_modes);

/// mean <- S mean, cov <- S cov S^T. Throws on dimension mismatch.
GaussianState apply(const SymplecticOp& op, const GaussianState& state);

/// Weighted sum of quadratures plus the classical signal (X_s, Y_s).
struct LinearForm {
  Vector coeffs;
  std::array<double, 2> signal_coeffs{0.0, 0.0};

  static LinearForm zero(std::size_t n_modes) { return {Vector::Zero(2 * n_modes), {0.0, 0.0}}; }
};

struct SignalVariances {
  double vx = 0.0;
  double vy = 0.0;
};

struct VarianceParts {
  double quantum = 0.0;
  double signal = 0.0;
  double total() const { return quantum + signal; }
};

/// c^T cov c plus the modulated-signal contribution.
VarianceParts linear_form_variance(const GaussianState& state, const LinearForm& form,
                                   SignalVariances signal = {});

}  // namespace ttpc
