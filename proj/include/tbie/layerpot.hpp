#pragma once

// Nystrom discretization of the Helmholtz boundary integral operators
//
//   S phi(x)     = int G(x-y) phi(y) ds(y)
//   D phi(x)     = int dG/dn(y) (x-y) phi(y) ds(y)
//   D* phi(x)    = int dG/dn(x) (x-y) phi(y) ds(y)
//   N phi(x)     = d/dn(x) int dG/dn(y) (x-y) phi(y) ds(y)
//
// with G(x) = (i/4) H^(1)_0(k|x|). The matrices carry no jump terms: the
// interior limit of the double layer is (D - 1/2), the interior limit of the
// normal derivative of S is (D* + 1/2).
//
// Weakly singular kernels are split as K(t,s) = K1(t,s) log(4 sin^2((t-s)/2))
// + K2(t,s) and integrated with the exact trigonometric weights for the log
// factor (Martensen-Kussmaul). Diagonal limits, with nu = (x2', -x1'):
//
//   S:      K1 = -1/(4 pi),  K2 = i/4 - gamma/(2 pi) - log(k |x'|/2)/(2 pi)
//   D, D*:  K1 = 0,          K2 = (x'' . nu) / (4 pi |x'|^2) = -kappa |x'| / (4 pi)
//
// N uses the Maue form N phi = d/ds S (dphi/ds) + k^2 n(x) . S (n phi), with
// d/ds done by periodic spectral differentiation.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tbie/common.hpp"
#include "tbie/geometry.hpp"

namespace tbie::layerpot {

enum class OperatorKind { S, D, Dstar, N };

const char* to_string(OperatorKind kind);

struct BoundaryOperatorMatrix {
  OperatorKind kind;
  Complex k;
  Eigen::MatrixXcd entries;
};

/// Which operators to build in one pass over the kernel.
struct OperatorMask {
  bool s = false;
  bool d = false;
  bool dstar = false;
  bool n = false;

  static OperatorMask all() { return {true, true, true, true}; }
};

/// Operators sharing one wavenumber; entries not requested stay empty (0x0).
struct OperatorSet {
  Complex k;
  Eigen::MatrixXcd s, d, dstar, n;
};

/// Throws DomainError when k is zero, non-finite, Im k < -50, or when k times
/// the curve diameter leaves the cylinder-function support box.
void check_wavenumber(Complex k, const geometry::CurveDiscretization& disc);

OperatorSet assemble_set(Complex k, const geometry::CurveDiscretization& disc, OperatorMask mask);

BoundaryOperatorMatrix assemble(OperatorKind kind, Complex k,
                                const geometry::CurveDiscretization& disc);

/// Quadrature weights R_m, m = 0..N-1, for int log(4 sin^2((t_i - s)/2)) f(s) ds
/// ~ sum_j R_{|i-j|} f(t_j).
std::vector<double> log_weights(int n);

/// Periodic spectral differentiation matrix on N equispaced nodes.
Eigen::MatrixXd spectral_derivative(int n);

enum class PotentialKind { S, D };

/// Plain trapezoid evaluation of the single/double layer potential off the
/// boundary. Targets closer than four mesh spacings raise NearFieldError.
std::vector<Complex> eval_potential(PotentialKind kind, Complex k,
                                    const geometry::CurveDiscretization& disc,
                                    const Eigen::VectorXcd& density, std::span<const Point2> targets);

/// Minimum admissible target distance for eval_potential.
double near_field_distance(const geometry::CurveDiscretization& disc);

}  // namespace tbie::layerpot
