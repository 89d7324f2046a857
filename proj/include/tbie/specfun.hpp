#pragma once

// Integer-order cylinder functions of complex argument.
//
// Supported box: |n| <= 200, |z| <= 400, |Im z| <= 100. Inputs outside the box
// raise DomainError; results that overflow double raise RangeError; results
// that underflow are flushed to zero.
//
// Algorithms:
//   J_n        power series for |z| <= 1, Miller backward recurrence otherwise,
//              normalized with exp(-/+ i z) = J_0 + 2 sum (-/+ i)^k J_k.
//   Y_0, Y_1   Neumann series over the same Miller sequence.
//   H_0, H_1   J + iY except in the upper half plane (Im z >= 2) where J and iY
//              cancel: there the recessive Hankel function comes from the
//              asymptotic expansion (|z| >= 17) or the K_nu integral.
//   n >= 2     forward recurrence for Y and H.

#include <vector>

#include "tbie/common.hpp"

namespace tbie::specfun {

enum class CylKind { J, Y, H1 };

inline constexpr int kMaxOrder = 200;
inline constexpr double kMaxAbs = 400.0;
inline constexpr double kMaxImag = 100.0;

Complex bessel_j(int n, Complex z);
Complex bessel_y(int n, Complex z);
Complex hankel1(int n, Complex z);

/// C_n'(z) = C_{n-1}(z) - (n/z) C_n(z).
Complex cyl_deriv(CylKind kind, int n, Complex z);

/// J_0..J_nmax.
std::vector<Complex> bessel_j_orders(int nmax, Complex z);
/// H^(1)_0..H^(1)_nmax.
std::vector<Complex> hankel1_orders(int nmax, Complex z);
/// Y_0..Y_nmax.
std::vector<Complex> bessel_y_orders(int nmax, Complex z);

/// Orders 0 and 1 of J and H^(1), the only ones the layer-potential kernels need.
struct Cyl01 {
  Complex j0, j1, h0, h1;
};
Cyl01 cyl01(Complex z);

/// Value and derivative of one order, computed from a single order sweep.
struct CylPair {
  Complex value;
  Complex deriv;
};
CylPair cyl_with_deriv(CylKind kind, int n, Complex z);

// Identity checks. Each returns |lhs - rhs| divided by the sum of the term
// magnitudes, so a value near machine epsilon means the identity holds to
// working precision.

/// J_{n+1} C_n - J_n C_{n+1} = s 2i / (pi z) with the recessive Hankel function
/// C = H^(1) (s = 1) for Im z >= 0 and C = H^(2) (s = -1) below the real axis.
double wronskian_residual(int n, Complex z);

/// C_{n-1} + C_{n+1} = (2n / z) C_n.
double recurrence_residual(CylKind kind, int n, Complex z);

/// C_{-n} = (-1)^n C_n, measured against |C_n|.
double parity_residual(CylKind kind, int n, Complex z);

}  // namespace tbie::specfun
