#pragma once

// Block boundary integral systems for the transmission problem.
//
// Unknowns on Gamma: u (trace), q = (1/eps0) du/dn from outside, and for the
// mixed formulation an indirect density phi with u = S^{k1} phi inside.
//
//   BM     [ (D0 - 1/2) + a N0    -eps0 (S0 + a (D0* + 1/2)) ] [u]
//          [ -(D1 + 1/2)           eps1 S1                    ] [q]
//
//   Mixed  [ (D0 - 1/2) + a N0    -eps0 (S0 + a (D0* + 1/2))   0                  ] [u]
//          [ -I                    0                           S1                  ] [q]
//          [ 0                    -I                           (D1* + 1/2) / eps1  ] [phi]
//
// with a = i / k0 and subscripts 0/1 for k0 = w sqrt(eps0 mu0), k1 = w sqrt(eps1 mu1).
//
// With an incident wave the first row gets the right-hand side
// -(u_inc + a du_inc/dn); it is the limit of U_0 from inside the inclusion
// combined with its normal derivative. The other rows are homogeneous.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tbie/common.hpp"
#include "tbie/geometry.hpp"
#include "tbie/layerpot.hpp"

namespace tbie::systems {

struct TransmissionConfig {
  double eps0 = 1.0;
  double eps1 = 4.0;
  double mu0 = 1.0;
  double mu1 = 1.0;
  geometry::ClosedCurve curve = geometry::circle(1.0);

  Complex k0(Complex omega) const { return omega * std::sqrt(eps0 * mu0); }
  Complex k1(Complex omega) const { return omega * std::sqrt(eps1 * mu1); }
  /// Throws DomainError unless all material constants are positive and finite.
  void validate() const;
};

enum class Formulation { BM, Mixed };

const char* to_string(Formulation f);

struct BlockLayout {
  int n = 0;
  int u = 0;
  int q = 0;
  int phi = -1;  ///< -1 for BM
  int size() const { return phi < 0 ? 2 * n : 3 * n; }
};

struct BlockOperator {
  Formulation formulation;
  Complex omega;
  Eigen::MatrixXcd matrix;
  BlockLayout layout;
};

/// Layer operators at k0 (all four) and k1 (S, D, D*) for one frequency.
struct Kernels {
  Complex omega;
  layerpot::OperatorSet ext;
  layerpot::OperatorSet in;
};

Kernels assemble_kernels(const TransmissionConfig& config, const geometry::CurveDiscretization& disc,
                         Complex omega);

BlockOperator assemble_bm(const TransmissionConfig& config, const Kernels& kernels);
BlockOperator assemble_mixed(const TransmissionConfig& config, const Kernels& kernels);

BlockOperator assemble_bm(const TransmissionConfig& config, const geometry::CurveDiscretization& disc,
                          Complex omega);
BlockOperator assemble_mixed(const TransmissionConfig& config,
                             const geometry::CurveDiscretization& disc, Complex omega);

BlockOperator assemble(Formulation f, const TransmissionConfig& config, const Kernels& kernels);

/// LU with partial pivoting of a block operator. For the mixed formulation the
/// two identity rows are eliminated first and only the N x N reduced matrix
/// (A11 S1 + A12 T1), T1 = (D1* + 1/2)/eps1, is factorized; the result is the
/// same solution of the full 3N system.
class BlockSolver {
 public:
  BlockSolver(const TransmissionConfig& config, const Kernels& kernels, Formulation f);

  Formulation formulation() const { return formulation_; }
  int size() const { return layout_.size(); }
  const BlockLayout& layout() const { return layout_; }
  /// Reciprocal condition estimate of the factorized matrix.
  double rcond() const { return rcond_; }
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& rhs) const;

 private:
  Formulation formulation_;
  BlockLayout layout_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  Eigen::MatrixXcd a11_, a12_, s1_, t1_;
  double rcond_ = 0.0;
};

/// u_inc(x) = A exp(i k0 d.x).
struct PlaneWave {
  Complex k0;
  Point2 direction;
  Complex amplitude = 1.0;

  Complex value(Point2 x) const;
  /// i k0 (d.n) u_inc(x).
  Complex normal_derivative(Point2 x, Point2 normal) const;
};

/// Throws DomainError unless |direction| = 1 (to 1e-12).
PlaneWave incident_plane_wave(Complex k0, Point2 direction, Complex amplitude = 1.0);

struct IncidentTrace {
  Eigen::VectorXcd value;
  Eigen::VectorXcd normal_derivative;
};

/// Throws RangeError when |Im k0| * diameter > 200.
IncidentTrace incident_trace(const PlaneWave& wave, const geometry::CurveDiscretization& disc);

struct BoundarySolution {
  Formulation formulation;
  double omega = 0.0;
  PlaneWave incident;
  Eigen::VectorXcd u;
  Eigen::VectorXcd q;
  Eigen::VectorXcd phi;  ///< empty for BM
  /// ||A z - b|| / ||b|| of the full block system (0 for b = 0).
  double residual = 0.0;
  double rcond = 0.0;
};

/// Right-hand side of the block system for a given incident wave.
Eigen::VectorXcd scattering_rhs(const BlockLayout& layout, Complex k0, const IncidentTrace& trace);

/// Frequency must be real and positive. Throws SolverError when the block
/// matrix is singular to working precision.
BoundarySolution solve_scattering(const TransmissionConfig& config,
                                  const geometry::CurveDiscretization& disc, double omega,
                                  const PlaneWave& incident, Formulation formulation);

enum class FieldRegion { Exterior, Interior };

/// Exterior: U_0 = u_inc - eps0 S q + D u (total field). Interior: eps1 S q - D u
/// for BM, S phi for the mixed formulation.
std::vector<Complex> eval_field(const TransmissionConfig& config,
                                const geometry::CurveDiscretization& disc,
                                const BoundarySolution& solution, std::span<const Point2> targets,
                                FieldRegion region);

}  // namespace tbie::systems
