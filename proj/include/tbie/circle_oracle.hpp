#pragma once

// Fourier-mode reduction of the BM and mixed systems for a circle of radius a.
// On the circle every layer operator is diagonal in e^{i n theta}; with
// c = i pi a / 2 the n-th mode of the BM system is
//
//   c diag(J_n(k0 a) + alpha k0 J_n'(k0 a), H_n(k1 a))
//     [  k0 H_n'(k0 a)    -eps0 H_n(k0 a) ]
//     [ -k1 J_n'(k1 a)     eps1 J_n(k1 a) ]
//
// and of the mixed system
//
//   [ c k0 H_n'(k0 a) f   -c eps0 H_n(k0 a) f   0                           ]
//   [ -1                   0                    c H_n(k1 a) J_n(k1 a)        ]
//   [ 0                   -1                    c (k1/eps1) H_n(k1 a) J_n'(k1 a) ]
//
// with f = J_n(k0 a) + alpha k0 J_n'(k0 a), alpha = i / k0. H_n is H^(1)_n.
// Its determinant factors as
//
//   det3 = c^2 [H_n(k1 a) f] [-(eps0/eps1) k1 H_n(k0 a) J_n'(k1 a) + k0 H_n'(k0 a) J_n(k1 a)].
//
// The quantities are even in n, so root lists carry n >= 0 only.

#include <vector>

#include <Eigen/Dense>

#include "tbie/common.hpp"
#include "tbie/eigen_result.hpp"
#include "tbie/geometry.hpp"
#include "tbie/layerpot.hpp"
#include "tbie/systems.hpp"

namespace tbie::circle_oracle {

using systems::TransmissionConfig;

/// Radius of the circle; throws DomainError for any other curve.
double circle_radius(const TransmissionConfig& config);

struct ModeMatrixBM {
  Eigen::Matrix2cd prefactor;  ///< diag(f, H_n(k1 a))
  Eigen::Matrix2cd core;
  Complex scale;               ///< i pi a / 2
  Eigen::Matrix2cd full() const { return scale * prefactor * core; }
};

ModeMatrixBM mode_matrix_bm(int n, Complex omega, const TransmissionConfig& config);

/// -eps0 k1 H_n(k0 a) J_n'(k1 a) + eps1 k0 H_n'(k0 a) J_n(k1 a).
Complex det_true(int n, Complex omega, const TransmissionConfig& config);

/// H_n(k1 a) (J_n(k0 a) + alpha k0 J_n'(k0 a)).
Complex det_fict(int n, Complex omega, const TransmissionConfig& config);

Eigen::Matrix3cd mode_matrix_mixed(int n, Complex omega, const TransmissionConfig& config);

/// Rule of Sarrus.
Complex sarrus(const Eigen::Matrix3cd& m);

/// c^2 det_fict (det_true / eps1), the factored form of det(mode_matrix_mixed).
Complex mixed_det_factored(int n, Complex omega, const TransmissionConfig& config);

/// The scalar functions whose zeros the root finder looks for. det_fict is
/// searched through its two factors separately.
enum class ModeFunction { True, FictHankel, FictBessel };

Complex evaluate(ModeFunction f, int n, Complex omega, const TransmissionConfig& config);

/// |f| divided by the sum of magnitudes of the terms forming f.
double relative_residual(ModeFunction f, int n, Complex omega, const TransmissionConfig& config);

/// Smallest relative residual over the two factors of det_fict.
double fict_relative_residual(int n, Complex omega, const TransmissionConfig& config);

struct FindOptions {
  int n_max = 30;
  /// Target grid-cell size for the winding scan.
  double cell = 0.05;
  int samples_per_edge = 4;
  int max_newton = 50;
  double dedupe_tol = 1e-9;
};

/// Zeros of det_true and det_fict for 0 <= n <= n_max inside region, sorted by
/// real part (then imaginary part, then n).
std::vector<EigenResult> find_eigen(const Rect& region, const TransmissionConfig& config,
                                    const FindOptions& options = {});

/// Smallest relative residual of det_true over 0 <= n <= n_max, and the same
/// for det_fict; the classification names the smaller one.
struct ClassifiedRoot {
  Classification classification = Classification::Unclassified;
  int n = 0;
  double true_residual = 1.0;
  double fict_residual = 1.0;
};

ClassifiedRoot classify(Complex omega, const TransmissionConfig& config, int n_max = 30);

/// Eigenvalue of the discretized operator (no jump terms) on e^{i n theta} for
/// a circle of radius a: S -> c H J, D and D* -> c k H J' - 1/2, N -> c k^2 H' J',
/// with c = i pi a / 2 and all functions at k a.
Complex operator_symbol(layerpot::OperatorKind kind, int n, Complex k, double a);

/// max over |n| <= n_max of ||M e_n - s_n e_n|| / (|s_n| ||e_n||), with the
/// symbols multiplied by symbol_scale (1 except in negative-control tests).
double symbol_error(const layerpot::BoundaryOperatorMatrix& m,
                    const geometry::CurveDiscretization& disc, int n_max,
                    double symbol_scale = 1.0);

/// Scattered (a_n) and interior (b_n) coefficients, n = -n_max..n_max, for a
/// plane wave exp(i k0 d.x) hitting the circle.
struct MieSolution {
  int n_max = 0;
  double omega = 0.0;
  double radius = 1.0;
  Complex k0, k1;
  double eps0 = 1.0;
  double eps1 = 1.0;
  double theta_d = 0.0;
  std::vector<Complex> a, b;

  Complex coeff_a(int n) const { return a[n + n_max]; }
  Complex coeff_b(int n) const { return b[n + n_max]; }
  /// Trace of the total field on the circle at angle theta.
  Complex trace_u(double theta) const;
  /// (1/eps0) du/dn from outside.
  Complex trace_q(double theta) const;
  /// Total field outside (|x| > a) or inside (|x| < a).
  Complex field(Point2 x) const;
  /// Normal derivative (1/eps) du/dr from the interior side, for checks.
  Complex interior_q(double theta) const;
};

/// Smallest admissible truncation, k0 a + 10 (k0 a)^(1/3) + 15.
int mie_min_order(double k0a);

MieSolution mie_transmission(const TransmissionConfig& config, double omega, Point2 direction,
                             int n_max);

}  // namespace tbie::circle_oracle
