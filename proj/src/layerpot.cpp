#include "tbie/layerpot.hpp"

#include <string>

#include "tbie/specfun.hpp"

namespace tbie::layerpot {
namespace {

using geometry::CurveDiscretization;

double diameter(const CurveDiscretization& disc) { return 2.0 * disc.curve.max_radius(); }

// Index difference reduced to (-n/2, n/2], so trig arguments stay small.
int wrapped(int d, int n) {
  d %= n;
  if (d > n / 2) d -= n;
  if (d <= -n / 2) d += n;
  return d;
}

}  // namespace

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::S: return "S";
    case OperatorKind::D: return "D";
    case OperatorKind::Dstar: return "Dstar";
    case OperatorKind::N: return "N";
  }
  return "?";
}

void check_wavenumber(Complex k, const CurveDiscretization& disc) {
  if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) {
    throw DomainError("wavenumber is not finite");
  }
  if (k == Complex(0.0, 0.0)) throw DomainError("wavenumber must be nonzero");
  if (k.imag() < -50.0) throw DomainError("wavenumber: Im k < -50");
  const double diam = diameter(disc);
  if (std::abs(k) * diam > specfun::kMaxAbs || std::abs(k.imag()) * diam > specfun::kMaxImag) {
    throw DomainError("wavenumber: k * diameter outside cylinder-function support");
  }
}

std::vector<double> log_weights(int n) {
  const int half = n / 2;
  std::vector<double> w(n);
  for (int m = 0; m < n; ++m) {
    double sum = 0.0;
    for (int l = 1; l < half; ++l) {
      const long phase = (static_cast<long>(l) * m) % n;
      sum += std::cos(2.0 * kPi * static_cast<double>(phase) / n) / l;
    }
    const double nyquist = (m % 2 == 0) ? 1.0 : -1.0;
    w[m] = -(4.0 * kPi / n) * sum - (4.0 * kPi / (static_cast<double>(n) * n)) * nyquist;
  }
  return w;
}

Eigen::MatrixXd spectral_derivative(int n) {
  Eigen::MatrixXd dt = Eigen::MatrixXd::Zero(n, n);
  const double h = 2.0 * kPi / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int d = wrapped(i - j, n);
      const double sgn = (d % 2 == 0) ? 1.0 : -1.0;
      dt(i, j) = 0.5 * sgn / std::tan(0.5 * d * h);
    }
  }
  return dt;
}

OperatorSet assemble_set(Complex k, const CurveDiscretization& disc, OperatorMask mask) {
  check_wavenumber(k, disc);
  const int n = disc.size();
  const double h = disc.step();
  const auto weights = log_weights(n);
  const bool need_single = mask.s || mask.n;
  const bool need_double = mask.d || mask.dstar;

  // Symmetric parametric kernels: smat for S (no speed factor), q for D / D*
  // (multiplied by the geometric factor w_ij afterwards).
  Eigen::MatrixXcd smat(need_single ? n : 0, need_single ? n : 0);
  Eigen::MatrixXcd q(need_double ? n : 0, need_double ? n : 0);

  const Complex diag_log_k = std::log(0.5 * k);
  for (int i = 0; i < n; ++i) {
    if (need_single) {
      const Complex m1 = -1.0 / (4.0 * kPi);
      const Complex m2 = 0.25 * kI - kEulerGamma / (2.0 * kPi) -
                         (diag_log_k + std::log(disc.speeds[i])) / (2.0 * kPi);
      smat(i, i) = weights[0] * m1 + h * m2;
    }
    if (need_double) q(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const Point2 diff = disc.points[i] - disc.points[j];
      const double r = norm(diff);
      const double half_angle = kPi * wrapped(i - j, n) / n;
      const double sn = std::sin(half_angle);
      const double logsin = std::log(4.0 * sn * sn);
      const double rw = weights[j - i];
      const auto c = specfun::cyl01(k * r);
      if (need_single) {
        const Complex m = 0.25 * kI * c.h0;
        const Complex m1 = -c.j0 / (4.0 * kPi);
        const Complex v = rw * m1 + h * (m - m1 * logsin);
        smat(i, j) = v;
        smat(j, i) = v;
      }
      if (need_double) {
        const Complex a = 0.25 * kI * k * c.h1 / r;
        const Complex a1 = -k * c.j1 / (4.0 * kPi * r);
        const Complex v = rw * a1 + h * (a - a1 * logsin);
        q(i, j) = v;
        q(j, i) = v;
      }
    }
  }

  OperatorSet out;
  out.k = k;
  std::vector<Point2> nu(n);
  for (int j = 0; j < n; ++j) nu[j] = Point2{disc.derivatives[j].y, -disc.derivatives[j].x};

  if (mask.s || mask.n) {
    out.s.resize(n, n);
    for (int j = 0; j < n; ++j) out.s.col(j) = smat.col(j) * disc.speeds[j];
  }
  if (mask.d) {
    out.d.resize(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        if (i == j) {
          const double sp = disc.speeds[i];
          out.d(i, i) = h * dot(disc.second_derivatives[i], nu[i]) / (4.0 * kPi * sp * sp);
        } else {
          out.d(i, j) = q(i, j) * dot(disc.points[i] - disc.points[j], nu[j]);
        }
      }
    }
  }
  if (mask.dstar) {
    out.dstar.resize(n, n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        if (i == j) {
          const double sp = disc.speeds[i];
          out.dstar(i, i) = h * dot(disc.second_derivatives[i], nu[i]) / (4.0 * kPi * sp * sp);
        } else {
          out.dstar(i, j) =
              q(i, j) * dot(disc.points[j] - disc.points[i], disc.normals[i]) * disc.speeds[j];
        }
      }
    }
  }
  if (mask.n) {
    const Eigen::MatrixXcd dt = spectral_derivative(n).cast<Complex>();
    Eigen::MatrixXcd tangential = dt * (smat * dt);
    for (int i = 0; i < n; ++i) tangential.row(i) /= disc.speeds[i];
    out.n = std::move(tangential);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        out.n(i, j) += k * k * out.s(i, j) * dot(disc.normals[i], disc.normals[j]);
      }
    }
    if (!mask.s) out.s.resize(0, 0);
  }
  return out;
}

BoundaryOperatorMatrix assemble(OperatorKind kind, Complex k, const CurveDiscretization& disc) {
  OperatorMask mask;
  switch (kind) {
    case OperatorKind::S: mask.s = true; break;
    case OperatorKind::D: mask.d = true; break;
    case OperatorKind::Dstar: mask.dstar = true; break;
    case OperatorKind::N: mask.n = true; break;
  }
  OperatorSet set = assemble_set(k, disc, mask);
  switch (kind) {
    case OperatorKind::S: return {kind, k, std::move(set.s)};
    case OperatorKind::D: return {kind, k, std::move(set.d)};
    case OperatorKind::Dstar: return {kind, k, std::move(set.dstar)};
    case OperatorKind::N: return {kind, k, std::move(set.n)};
  }
  throw DomainError("unknown operator kind");
}

double near_field_distance(const CurveDiscretization& disc) { return 4.0 * disc.mesh_spacing(); }

std::vector<Complex> eval_potential(PotentialKind kind, Complex k, const CurveDiscretization& disc,
                                    const Eigen::VectorXcd& density,
                                    std::span<const Point2> targets) {
  check_wavenumber(k, disc);
  const int n = disc.size();
  if (density.size() != n) throw DomainError("eval_potential: density size mismatch");
  const double min_dist = near_field_distance(disc);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (disc.distance_to_nodes(targets[t]) <= min_dist) {
      throw NearFieldError("eval_potential: target " + std::to_string(t) +
                           " is inside the near-boundary band");
    }
  }
  const double h = disc.step();
  std::vector<Complex> out(targets.size(), Complex(0.0, 0.0));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    Complex acc{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
      if (density[j] == Complex(0.0, 0.0)) continue;
      const Point2 diff = targets[t] - disc.points[j];
      const double r = norm(diff);
      const auto c = specfun::cyl01(k * r);
      if (kind == PotentialKind::S) {
        acc += 0.25 * kI * c.h0 * density[j] * disc.speeds[j];
      } else {
        const Point2 nu{disc.derivatives[j].y, -disc.derivatives[j].x};
        acc += 0.25 * kI * k * c.h1 * (dot(diff, nu) / r) * density[j];
      }
    }
    out[t] = h * acc;
  }
  return out;
}

}  // namespace tbie::layerpot
