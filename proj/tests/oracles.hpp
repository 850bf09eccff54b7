#pragma once

// Test-only reference computations. Nothing here calls into the library's
// state construction or spectra, so agreement is a genuine cross-check.

#include <array>
#include <cmath>
#include <functional>

namespace oracle {

using Row = std::array<double, 8>;   // weights on X01,Y01,X02,Y02,X03,Y03,X04,Y04
using Rows = std::array<Row, 8>;     // X_b1,Y_b1,...,X_b4,Y_b4

inline Row add(const Row& a, const Row& b, double wa, double wb) {
  Row out{};
  for (std::size_t i = 0; i < 8; ++i) out[i] = wa * a[i] + wb * b[i];
  return out;
}

/// Output quadratures written out by hand from the NOPA input-output
/// relations and the combining-beamsplitter relations.
inline Rows ttpc_rows(double r) {
  const double c = std::cosh(r), s = std::sinh(r);
  enum { X01, Y01, X02, Y02, X03, Y03, X04, Y04 };
  Row xa1{}, ya1{}, xa2{}, ya2{}, xa3{}, ya3{}, xa4{}, ya4{};
  xa1[X01] = c; xa1[X02] = -s;
  ya1[Y01] = c; ya1[Y02] = s;
  xa2[X02] = c; xa2[X01] = -s;
  ya2[Y02] = c; ya2[Y01] = s;
  xa3[X03] = c; xa3[X04] = -s;
  ya3[Y03] = c; ya3[Y04] = s;
  xa4[X04] = c; xa4[X03] = -s;
  ya4[Y04] = c; ya4[Y03] = s;
  const double h = 1.0 / std::sqrt(2.0);
  Rows b{};
  b[0] = xa1;
  b[1] = ya1;
  b[2] = add(xa2, ya3, h, -h);  // X_b2 = (X_a2 - Y_a3)/sqrt2
  b[3] = add(ya2, xa3, h, h);   // Y_b2 = (Y_a2 + X_a3)/sqrt2
  b[4] = xa4;
  b[5] = ya4;
  b[6] = add(xa2, ya3, h, h);   // X_b4 = (X_a2 + Y_a3)/sqrt2
  b[7] = add(ya2, xa3, h, -h);  // Y_b4 = (Y_a2 - X_a3)/sqrt2
  return b;
}

/// Variance of sum_k coeffs[k] * (output quadrature k) with vacuum seeds.
inline double variance(const Rows& rows, const std::array<double, 8>& coeffs) {
  Row total{};
  for (std::size_t k = 0; k < 8; ++k) total = add(total, rows[k], 1.0, coeffs[k]);
  double v = 0.0;
  for (double w : total) v += w * w;
  return v;
}

inline double covariance(const Rows& rows, std::size_t i, std::size_t j) {
  double v = 0.0;
  for (std::size_t k = 0; k < 8; ++k) v += rows[i][k] * rows[j][k];
  return v;
}

/// Golden-section search for the minimum of a unimodal f on [lo, hi].
inline double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                                 double tol = 1e-12) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Bisection root of f on [lo, hi] with a sign change.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-15) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid; flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Numerical minimizer: golden-section bracket, then bisection on the
/// central-difference derivative (golden section alone stalls near
/// sqrt(machine eps) on flat minima).
inline double argmin(const std::function<double(double)>& f, double lo, double hi) {
  const double coarse = golden_section_min(f, lo, hi, 1e-7);
  const double h = 1e-4;
  auto slope = [&](double g) { return (f(g + h) - f(g - h)) / (2.0 * h); };
  return bisect(slope, coarse - 1e-3, coarse + 1e-3, 1e-14);
}

}  // namespace oracle
