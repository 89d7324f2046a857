#include "tbie/systems.hpp"

#include <limits>

namespace tbie::systems {
namespace {

using geometry::CurveDiscretization;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr double kSingularRcond = 4.0 * std::numeric_limits<double>::epsilon();

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

MatrixXcd identity(int n) { return MatrixXcd::Identity(n, n); }

// First block row, shared by both formulations.
MatrixXcd row_a11(const Kernels& kr, Complex alpha) {
  const int n = static_cast<int>(kr.ext.d.rows());
  return kr.ext.d - 0.5 * identity(n) + alpha * kr.ext.n;
}

MatrixXcd row_a12(const TransmissionConfig& config, const Kernels& kr, Complex alpha) {
  const int n = static_cast<int>(kr.ext.s.rows());
  return -config.eps0 * (kr.ext.s + alpha * (kr.ext.dstar + 0.5 * identity(n)));
}

Complex coupling(const TransmissionConfig& config, Complex omega) {
  return kI / config.k0(omega);
}

void check_frequency(Complex omega) {
  if (omega == Complex(0.0, 0.0)) throw DomainError("frequency must be nonzero");
  if (!std::isfinite(omega.real()) || !std::isfinite(omega.imag())) {
    throw DomainError("frequency is not finite");
  }
}

}  // namespace

void TransmissionConfig::validate() const {
  if (!positive(eps0) || !positive(eps1) || !positive(mu0) || !positive(mu1)) {
    throw DomainError("material constants must be positive and finite");
  }
}

const char* to_string(Formulation f) { return f == Formulation::BM ? "bm" : "mixed"; }

Kernels assemble_kernels(const TransmissionConfig& config, const CurveDiscretization& disc,
                         Complex omega) {
  config.validate();
  check_frequency(omega);
  Kernels kr;
  kr.omega = omega;
  kr.ext = layerpot::assemble_set(config.k0(omega), disc, layerpot::OperatorMask::all());
  kr.in = layerpot::assemble_set(config.k1(omega), disc, {true, true, true, false});
  return kr;
}

BlockOperator assemble_bm(const TransmissionConfig& config, const Kernels& kr) {
  const int n = static_cast<int>(kr.ext.s.rows());
  const Complex alpha = coupling(config, kr.omega);
  BlockOperator op{Formulation::BM, kr.omega, MatrixXcd(2 * n, 2 * n), {n, 0, n, -1}};
  op.matrix.block(0, 0, n, n) = row_a11(kr, alpha);
  op.matrix.block(0, n, n, n) = row_a12(config, kr, alpha);
  op.matrix.block(n, 0, n, n) = -(kr.in.d + 0.5 * identity(n));
  op.matrix.block(n, n, n, n) = config.eps1 * kr.in.s;
  return op;
}

BlockOperator assemble_mixed(const TransmissionConfig& config, const Kernels& kr) {
  const int n = static_cast<int>(kr.ext.s.rows());
  const Complex alpha = coupling(config, kr.omega);
  BlockOperator op{Formulation::Mixed, kr.omega, MatrixXcd::Zero(3 * n, 3 * n), {n, 0, n, 2 * n}};
  op.matrix.block(0, 0, n, n) = row_a11(kr, alpha);
  op.matrix.block(0, n, n, n) = row_a12(config, kr, alpha);
  op.matrix.block(n, 0, n, n) = -identity(n);
  op.matrix.block(n, 2 * n, n, n) = kr.in.s;
  op.matrix.block(2 * n, n, n, n) = -identity(n);
  op.matrix.block(2 * n, 2 * n, n, n) = (kr.in.dstar + 0.5 * identity(n)) / config.eps1;
  return op;
}

BlockOperator assemble_bm(const TransmissionConfig& config, const CurveDiscretization& disc,
                          Complex omega) {
  return assemble_bm(config, assemble_kernels(config, disc, omega));
}

BlockOperator assemble_mixed(const TransmissionConfig& config, const CurveDiscretization& disc,
                             Complex omega) {
  return assemble_mixed(config, assemble_kernels(config, disc, omega));
}

BlockOperator assemble(Formulation f, const TransmissionConfig& config, const Kernels& kernels) {
  return f == Formulation::BM ? assemble_bm(config, kernels) : assemble_mixed(config, kernels);
}

BlockSolver::BlockSolver(const TransmissionConfig& config, const Kernels& kr, Formulation f)
    : formulation_(f) {
  const int n = static_cast<int>(kr.ext.s.rows());
  if (f == Formulation::BM) {
    const BlockOperator op = assemble_bm(config, kr);
    layout_ = op.layout;
    lu_.compute(op.matrix);
  } else {
    layout_ = {n, 0, n, 2 * n};
    const Complex alpha = coupling(config, kr.omega);
    a11_ = row_a11(kr, alpha);
    a12_ = row_a12(config, kr, alpha);
    s1_ = kr.in.s;
    t1_ = (kr.in.dstar + 0.5 * identity(n)) / config.eps1;
    lu_.compute(a11_ * s1_ + a12_ * t1_);
  }
  rcond_ = lu_.rcond();
  if (!(rcond_ >= kSingularRcond)) {
    throw SolverError("block matrix is singular to working precision", rcond_);
  }
}

MatrixXcd BlockSolver::solve(const MatrixXcd& rhs) const {
  if (rhs.rows() != size()) throw DomainError("BlockSolver::solve: rhs size mismatch");
  if (formulation_ == Formulation::BM) return lu_.solve(rhs);
  const int n = layout_.n;
  const auto b1 = rhs.topRows(n);
  const auto b2 = rhs.middleRows(n, n);
  const auto b3 = rhs.bottomRows(n);
  MatrixXcd out(3 * n, rhs.cols());
  const MatrixXcd phi = lu_.solve(b1 + a11_ * b2 + a12_ * b3);
  out.topRows(n) = s1_ * phi - b2;
  out.middleRows(n, n) = t1_ * phi - b3;
  out.bottomRows(n) = phi;
  return out;
}

Complex PlaneWave::value(Point2 x) const {
  return amplitude * std::exp(kI * k0 * dot(direction, x));
}

Complex PlaneWave::normal_derivative(Point2 x, Point2 normal) const {
  return kI * k0 * dot(direction, normal) * value(x);
}

PlaneWave incident_plane_wave(Complex k0, Point2 direction, Complex amplitude) {
  if (std::abs(norm(direction) - 1.0) > 1e-12) {
    throw DomainError("incident direction must be a unit vector");
  }
  return {k0, direction, amplitude};
}

IncidentTrace incident_trace(const PlaneWave& wave, const CurveDiscretization& disc) {
  if (std::abs(wave.k0.imag()) * 2.0 * disc.curve.max_radius() > 200.0) {
    throw RangeError("incident wave: |Im k0| * diameter > 200");
  }
  const int n = disc.size();
  IncidentTrace tr{VectorXcd(n), VectorXcd(n)};
  for (int j = 0; j < n; ++j) {
    tr.value[j] = wave.value(disc.points[j]);
    tr.normal_derivative[j] = wave.normal_derivative(disc.points[j], disc.normals[j]);
  }
  return tr;
}

VectorXcd scattering_rhs(const BlockLayout& layout, Complex k0, const IncidentTrace& trace) {
  VectorXcd b = VectorXcd::Zero(layout.size());
  const Complex alpha = kI / k0;
  b.segment(layout.u, layout.n) = -(trace.value + alpha * trace.normal_derivative);
  return b;
}

BoundarySolution solve_scattering(const TransmissionConfig& config, const CurveDiscretization& disc,
                                  double omega, const PlaneWave& incident,
                                  Formulation formulation) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw DomainError("solve_scattering: frequency must be real and positive");
  }
  const Kernels kr = assemble_kernels(config, disc, omega);
  const BlockSolver solver(config, kr, formulation);
  const BlockLayout& lay = solver.layout();
  const VectorXcd b = scattering_rhs(lay, config.k0(omega), incident_trace(incident, disc));
  const VectorXcd z = solver.solve(b);
  if (!z.allFinite()) throw SolverError("solve_scattering: non-finite solution", solver.rcond());

  BoundarySolution sol{formulation, omega, incident, z.segment(lay.u, lay.n),
                       z.segment(lay.q, lay.n), VectorXcd(), 0.0, solver.rcond()};
  if (lay.phi >= 0) sol.phi = z.segment(lay.phi, lay.n);
  const double bnorm = b.norm();
  if (bnorm > 0.0) {
    const BlockOperator op = assemble(formulation, config, kr);
    sol.residual = (op.matrix * z - b).norm() / bnorm;
  }
  return sol;
}

std::vector<Complex> eval_field(const TransmissionConfig& config, const CurveDiscretization& disc,
                                const BoundarySolution& sol, std::span<const Point2> targets,
                                FieldRegion region) {
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const bool inside = disc.curve.contains(targets[t]);
    if (inside != (region == FieldRegion::Interior)) {
      throw DomainError("eval_field: target " + std::to_string(t) + " is not in the requested region");
    }
  }
  using layerpot::PotentialKind;
  const Complex omega = sol.omega;
  std::vector<Complex> out(targets.size());
  if (region == FieldRegion::Exterior) {
    const Complex k0 = config.k0(omega);
    const auto s = layerpot::eval_potential(PotentialKind::S, k0, disc, sol.q, targets);
    const auto d = layerpot::eval_potential(PotentialKind::D, k0, disc, sol.u, targets);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      out[t] = sol.incident.value(targets[t]) - config.eps0 * s[t] + d[t];
    }
    return out;
  }
  const Complex k1 = config.k1(omega);
  if (sol.formulation == Formulation::Mixed) {
    return layerpot::eval_potential(PotentialKind::S, k1, disc, sol.phi, targets);
  }
  const auto s = layerpot::eval_potential(PotentialKind::S, k1, disc, sol.q, targets);
  const auto d = layerpot::eval_potential(PotentialKind::D, k1, disc, sol.u, targets);
  for (std::size_t t = 0; t < targets.size(); ++t) out[t] = config.eps1 * s[t] - d[t];
  return out;
}

}  // namespace tbie::systems
