#include "tbie/circle_oracle.hpp"

#include <algorithm>
#include <array>

#include "tbie/specfun.hpp"

namespace tbie::circle_oracle {
namespace {

using specfun::CylKind;

struct ModeValues {
  Complex j0, dj0, h0, dh0;  // at k0 a
  Complex j1, dj1, h1, dh1;  // at k1 a
};

ModeValues mode_values(int n, Complex omega, const TransmissionConfig& config) {
  if (omega == Complex(0.0, 0.0)) throw DomainError("circle oracle: frequency must be nonzero");
  const double a = circle_radius(config);
  const Complex z0 = config.k0(omega) * a;
  const Complex z1 = config.k1(omega) * a;
  // Each returned product pairs two functions of order n, so (-1)^n cancels;
  // using |n| makes evenness exact.
  n = std::abs(n);
  const auto j0 = specfun::cyl_with_deriv(CylKind::J, n, z0);
  const auto h0 = specfun::cyl_with_deriv(CylKind::H1, n, z0);
  const auto j1 = specfun::cyl_with_deriv(CylKind::J, n, z1);
  const auto h1 = specfun::cyl_with_deriv(CylKind::H1, n, z1);
  return {j0.value, j0.deriv, h0.value, h0.deriv, j1.value, j1.deriv, h1.value, h1.deriv};
}

Complex scale_of(const TransmissionConfig& config) { return 0.5 * kI * kPi * circle_radius(config); }

// All-order values at one frequency for the grid scan: index [fn][n].
using GridValue = std::array<std::vector<Complex>, 3>;

GridValue grid_value(Complex omega, const TransmissionConfig& config, int n_max) {
  const double a = config.curve.radius();
  const Complex k0 = config.k0(omega);
  const Complex k1 = config.k1(omega);
  const Complex z0 = k0 * a;
  const Complex z1 = k1 * a;
  const auto j0 = specfun::bessel_j_orders(n_max + 1, z0);
  const auto h0 = specfun::hankel1_orders(n_max + 1, z0);
  const auto j1 = specfun::bessel_j_orders(n_max + 1, z1);
  const auto h1 = specfun::hankel1_orders(n_max + 1, z1);
  auto deriv = [](const std::vector<Complex>& c, int n, Complex z) {
    return n == 0 ? -c[1] : c[n - 1] - (static_cast<double>(n) / z) * c[n];
  };
  GridValue g;
  for (auto& v : g) v.resize(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    g[0][n] = -config.eps0 * k1 * h0[n] * deriv(j1, n, z1) +
              config.eps1 * k0 * deriv(h0, n, z0) * j1[n];
    g[1][n] = h1[n];
    g[2][n] = j0[n] + kI * deriv(j0, n, z0);
  }
  return g;
}

constexpr std::array<ModeFunction, 3> kFunctions = {ModeFunction::True, ModeFunction::FictHankel,
                                                    ModeFunction::FictBessel};

// Phase increment from fa to fb along a segment, bisecting until every step
// turns by less than pi/3.
double phase_step(ModeFunction f, int n, const TransmissionConfig& config, Complex za, Complex zb,
                  Complex fa, Complex fb, int depth) {
  const double d = std::arg(fb / fa);
  if (std::abs(d) < kPi / 3.0 || depth >= 24) return d;
  const Complex zm = 0.5 * (za + zb);
  const Complex fm = evaluate(f, n, zm, config);
  return phase_step(f, n, config, za, zm, fa, fm, depth + 1) +
         phase_step(f, n, config, zm, zb, fm, fb, depth + 1);
}

struct NewtonResult {
  Complex root;
  bool converged;
};

NewtonResult newton(ModeFunction f, int n, Complex start, const TransmissionConfig& config,
                    int max_iter) {
  Complex z = start;
  for (int it = 0; it < max_iter; ++it) {
    const double scale = std::max(1.0, std::abs(z));
    const double h = 1e-7 * scale;
    const Complex fz = evaluate(f, n, z, config);
    if (fz == Complex(0.0, 0.0)) return {z, true};
    const Complex df = (evaluate(f, n, z + h, config) - evaluate(f, n, z - h, config)) / (2.0 * h);
    if (df == Complex(0.0, 0.0) || !std::isfinite(std::abs(df))) return {z, false};
    const Complex step = fz / df;
    z -= step;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || z == Complex(0.0, 0.0)) {
      return {start, false};
    }
    if (std::abs(step) <= 1e-15 * scale) return {z, true};
  }
  // One more look: accept if the last correction was already at rounding level.
  const double scale = std::max(1.0, std::abs(z));
  const Complex fz = evaluate(f, n, z, config);
  const Complex df =
      (evaluate(f, n, z + 1e-7 * scale, config) - evaluate(f, n, z - 1e-7 * scale, config)) /
      (2e-7 * scale);
  return {z, std::abs(fz / df) <= 1e-13 * scale};
}

Classification class_of(ModeFunction f) {
  return f == ModeFunction::True ? Classification::True : Classification::Fictitious;
}

}  // namespace

double circle_radius(const TransmissionConfig& config) {
  if (config.curve.kind() != geometry::CurveKind::Circle) {
    throw DomainError("circle oracle requires a circular inclusion");
  }
  return config.curve.radius();
}

ModeMatrixBM mode_matrix_bm(int n, Complex omega, const TransmissionConfig& config) {
  const ModeValues v = mode_values(n, omega, config);
  const Complex k0 = config.k0(omega);
  const Complex k1 = config.k1(omega);
  const Complex alpha = kI / k0;
  ModeMatrixBM m;
  m.scale = scale_of(config);
  m.prefactor << v.j0 + alpha * k0 * v.dj0, 0.0, 0.0, v.h1;
  m.core << k0 * v.dh0, -config.eps0 * v.h0, -k1 * v.dj1, config.eps1 * v.j1;
  return m;
}

Complex det_true(int n, Complex omega, const TransmissionConfig& config) {
  const ModeValues v = mode_values(n, omega, config);
  return -config.eps0 * config.k1(omega) * v.h0 * v.dj1 +
         config.eps1 * config.k0(omega) * v.dh0 * v.j1;
}

Complex det_fict(int n, Complex omega, const TransmissionConfig& config) {
  const ModeValues v = mode_values(n, omega, config);
  const Complex k0 = config.k0(omega);
  return v.h1 * (v.j0 + (kI / k0) * k0 * v.dj0);
}

Eigen::Matrix3cd mode_matrix_mixed(int n, Complex omega, const TransmissionConfig& config) {
  const ModeValues v = mode_values(n, omega, config);
  const Complex k0 = config.k0(omega);
  const Complex k1 = config.k1(omega);
  const Complex c = scale_of(config);
  const Complex f = v.j0 + (kI / k0) * k0 * v.dj0;
  Eigen::Matrix3cd m;
  m << c * k0 * v.dh0 * f, -c * config.eps0 * v.h0 * f, 0.0,
       -1.0, 0.0, c * v.h1 * v.j1,
       0.0, -1.0, c * (k1 / config.eps1) * v.h1 * v.dj1;
  return m;
}

Complex sarrus(const Eigen::Matrix3cd& m) {
  return m(0, 0) * m(1, 1) * m(2, 2) + m(0, 1) * m(1, 2) * m(2, 0) + m(0, 2) * m(1, 0) * m(2, 1) -
         m(0, 2) * m(1, 1) * m(2, 0) - m(0, 0) * m(1, 2) * m(2, 1) - m(0, 1) * m(1, 0) * m(2, 2);
}

Complex mixed_det_factored(int n, Complex omega, const TransmissionConfig& config) {
  const ModeValues v = mode_values(n, omega, config);
  const Complex k0 = config.k0(omega);
  const Complex k1 = config.k1(omega);
  const Complex c = scale_of(config);
  const Complex fict = v.h1 * (v.j0 + (kI / k0) * k0 * v.dj0);
  const Complex core = -(config.eps0 / config.eps1) * k1 * v.h0 * v.dj1 + k0 * v.dh0 * v.j1;
  return c * c * fict * core;
}

Complex evaluate(ModeFunction f, int n, Complex omega, const TransmissionConfig& config) {
  switch (f) {
    case ModeFunction::True: return det_true(n, omega, config);
    case ModeFunction::FictHankel: {
      const double a = circle_radius(config);
      return specfun::hankel1(n, config.k1(omega) * a);
    }
    case ModeFunction::FictBessel: {
      const double a = circle_radius(config);
      const auto j = specfun::cyl_with_deriv(CylKind::J, n, config.k0(omega) * a);
      return j.value + kI * j.deriv;
    }
  }
  throw DomainError("unknown mode function");
}

double relative_residual(ModeFunction f, int n, Complex omega, const TransmissionConfig& config) {
  const ModeValues v = mode_values(n, omega, config);
  switch (f) {
    case ModeFunction::True: {
      const Complex t1 = -config.eps0 * config.k1(omega) * v.h0 * v.dj1;
      const Complex t2 = config.eps1 * config.k0(omega) * v.dh0 * v.j1;
      return std::abs(t1 + t2) / (std::abs(t1) + std::abs(t2));
    }
    case ModeFunction::FictHankel:
      // H = J + iY; the natural scale is the size of the two real-axis parts.
      return std::abs(v.h1) / (std::abs(v.j1) + std::abs((v.h1 - v.j1) / kI));
    case ModeFunction::FictBessel:
      return std::abs(v.j0 + kI * v.dj0) / (std::abs(v.j0) + std::abs(v.dj0));
  }
  return 1.0;
}

double fict_relative_residual(int n, Complex omega, const TransmissionConfig& config) {
  return std::min(relative_residual(ModeFunction::FictHankel, n, omega, config),
                  relative_residual(ModeFunction::FictBessel, n, omega, config));
}

std::vector<EigenResult> find_eigen(const Rect& region, const TransmissionConfig& config,
                                    const FindOptions& opt) {
  circle_radius(config);
  config.validate();
  if (!(region.re_max > region.re_min) || !(region.im_max > region.im_min)) {
    throw DomainError("find_eigen: empty region");
  }
  if (region.contains_zero()) {
    throw DomainError("find_eigen: region must avoid omega = 0");
  }
  if (opt.n_max < 0 || opt.samples_per_edge < 1 || !(opt.cell > 0.0)) {
    throw DomainError("find_eigen: invalid options");
  }
  const double width = region.re_max - region.re_min;
  const double height = region.im_max - region.im_min;
  const int nx = std::max(1, static_cast<int>(std::ceil(width / opt.cell - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(height / opt.cell - 1e-9)));
  const int s = opt.samples_per_edge;
  const int px = nx * s + 1;
  const int py = ny * s + 1;
  auto point = [&](int i, int j) {
    return Complex(region.re_min + width * i / (px - 1), region.im_min + height * j / (py - 1));
  };

  // Values on the grid lines only.
  std::vector<GridValue> values(static_cast<std::size_t>(px) * py);
  for (int j = 0; j < py; ++j) {
    for (int i = 0; i < px; ++i) {
      if (i % s != 0 && j % s != 0) continue;
      values[static_cast<std::size_t>(j) * px + i] = grid_value(point(i, j), config, opt.n_max);
    }
  }
  auto at = [&](int i, int j) -> const GridValue& {
    return values[static_cast<std::size_t>(j) * px + i];
  };

  std::vector<EigenResult> found;
  auto add_root = [&](ModeFunction f, int n, Complex z, bool converged) {
    if (!region.contains(z)) return false;
    for (const auto& r : found) {
      if (r.index == n && r.classification == class_of(f) && std::abs(r.lambda - z) <= opt.dedupe_tol) {
        return true;
      }
    }
    const double res = f == ModeFunction::True ? relative_residual(f, n, z, config)
                                               : fict_relative_residual(n, z, config);
    found.push_back({z, n, class_of(f), res, converged, n == 0 ? 1 : 2});
    return true;
  };

  for (int cy = 0; cy < ny; ++cy) {
    for (int cx = 0; cx < nx; ++cx) {
      // Counterclockwise lattice path around the cell.
      std::vector<std::pair<int, int>> path;
      for (int t = 0; t < s; ++t) path.emplace_back(cx * s + t, cy * s);
      for (int t = 0; t < s; ++t) path.emplace_back((cx + 1) * s, cy * s + t);
      for (int t = 0; t < s; ++t) path.emplace_back((cx + 1) * s - t, (cy + 1) * s);
      for (int t = 0; t < s; ++t) path.emplace_back(cx * s, (cy + 1) * s - t);
      for (std::size_t fi = 0; fi < kFunctions.size(); ++fi) {
        const ModeFunction f = kFunctions[fi];
        for (int n = 0; n <= opt.n_max; ++n) {
          double total = 0.0;
          for (std::size_t p = 0; p < path.size(); ++p) {
            const auto [ia, ja] = path[p];
            const auto [ib, jb] = path[(p + 1) % path.size()];
            total += phase_step(f, n, config, point(ia, ja), point(ib, jb), at(ia, ja)[fi][n],
                                at(ib, jb)[fi][n], 0);
          }
          const int winding = static_cast<int>(std::lround(total / (2.0 * kPi)));
          if (winding <= 0) continue;
          const Complex lo = point(cx * s, cy * s);
          const Complex hi = point((cx + 1) * s, (cy + 1) * s);
          const Complex mid = 0.5 * (lo + hi);
          const Complex half = 0.5 * (hi - lo);
          std::vector<Complex> starts = {mid};
          for (double ax : {-0.5, 0.5}) {
            for (double ay : {-0.5, 0.5}) {
              starts.push_back(mid + Complex(ax * half.real(), ay * half.imag()));
            }
          }
          int inside = 0;
          for (const Complex z0 : starts) {
            const NewtonResult r = newton(f, n, z0, config, opt.max_newton);
            const bool in_cell = r.root.real() >= lo.real() - 1e-9 && r.root.real() <= hi.real() + 1e-9 &&
                                 r.root.imag() >= lo.imag() - 1e-9 && r.root.imag() <= hi.imag() + 1e-9;
            if (r.converged && in_cell) {
              add_root(f, n, r.root, true);
              ++inside;
            }
            if (inside >= winding && z0 == mid) break;
          }
          if (inside == 0) {
            // Report the unrefined guess so the miss is visible.
            const NewtonResult r = newton(f, n, mid, config, opt.max_newton);
            add_root(f, n, r.converged ? r.root : mid, false);
          }
        }
      }
    }
  }
  std::sort(found.begin(), found.end(), [](const EigenResult& x, const EigenResult& y) {
    if (x.lambda.real() != y.lambda.real()) return x.lambda.real() < y.lambda.real();
    if (x.lambda.imag() != y.lambda.imag()) return x.lambda.imag() < y.lambda.imag();
    return x.index < y.index;
  });
  return found;
}

ClassifiedRoot classify(Complex omega, const TransmissionConfig& config, int n_max) {
  ClassifiedRoot out;
  for (int n = 0; n <= n_max; ++n) {
    const double rt = relative_residual(ModeFunction::True, n, omega, config);
    const double rf = fict_relative_residual(n, omega, config);
    if (rt < out.true_residual) {
      out.true_residual = rt;
      if (rt <= out.fict_residual) out.n = n;
    }
    if (rf < out.fict_residual) {
      out.fict_residual = rf;
      if (rf < out.true_residual) out.n = n;
    }
  }
  out.classification =
      out.true_residual <= out.fict_residual ? Classification::True : Classification::Fictitious;
  return out;
}

Complex operator_symbol(layerpot::OperatorKind kind, int n, Complex k, double a) {
  const Complex z = k * a;
  const Complex c = 0.5 * kI * kPi * a;
  const auto j = specfun::cyl_with_deriv(CylKind::J, n, z);
  const auto h = specfun::cyl_with_deriv(CylKind::H1, n, z);
  switch (kind) {
    case layerpot::OperatorKind::S: return c * h.value * j.value;
    case layerpot::OperatorKind::D:
    case layerpot::OperatorKind::Dstar: return c * k * h.value * j.deriv - 0.5;
    case layerpot::OperatorKind::N: return c * k * k * h.deriv * j.deriv;
  }
  throw DomainError("unknown operator kind");
}

double symbol_error(const layerpot::BoundaryOperatorMatrix& m,
                    const geometry::CurveDiscretization& disc, int n_max, double symbol_scale) {
  if (disc.curve.kind() != geometry::CurveKind::Circle) {
    throw DomainError("symbol_error requires a circular inclusion");
  }
  if (n_max < 0 || 2 * n_max >= disc.n) throw DomainError("symbol_error: n_max too large for N");
  const double a = disc.curve.radius();
  double err = 0.0;
  Eigen::VectorXcd e(disc.n);
  for (int n = -n_max; n <= n_max; ++n) {
    for (int j = 0; j < disc.n; ++j) e[j] = std::exp(kI * static_cast<double>(n) * disc.t[j]);
    const Complex s = symbol_scale * operator_symbol(m.kind, n, m.k, a);
    err = std::max(err, (m.entries * e - s * e).norm() / (std::abs(s) * e.norm()));
  }
  return err;
}

int mie_min_order(double k0a) {
  return static_cast<int>(std::ceil(k0a + 10.0 * std::cbrt(k0a) + 15.0));
}

MieSolution mie_transmission(const TransmissionConfig& config, double omega, Point2 direction,
                             int n_max) {
  const double a = circle_radius(config);
  config.validate();
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw DomainError("mie_transmission: frequency must be real and positive");
  }
  if (std::abs(norm(direction) - 1.0) > 1e-12) throw DomainError("mie_transmission: direction");
  const Complex k0 = config.k0(omega);
  const Complex k1 = config.k1(omega);
  if (n_max < mie_min_order(k0.real() * a)) {
    throw DomainError("mie_transmission: truncation order too small");
  }
  MieSolution sol;
  sol.n_max = n_max;
  sol.omega = omega;
  sol.radius = a;
  sol.k0 = k0;
  sol.k1 = k1;
  sol.eps0 = config.eps0;
  sol.eps1 = config.eps1;
  sol.theta_d = std::atan2(direction.y, direction.x);
  sol.a.resize(2 * n_max + 1);
  sol.b.resize(2 * n_max + 1);
  for (int n = -n_max; n <= n_max; ++n) {
    const auto j0 = specfun::cyl_with_deriv(CylKind::J, n, k0 * a);
    const auto h0 = specfun::cyl_with_deriv(CylKind::H1, n, k0 * a);
    const auto j1 = specfun::cyl_with_deriv(CylKind::J, n, k1 * a);
    const Complex inc = std::pow(kI, n) * std::exp(-kI * static_cast<double>(n) * sol.theta_d);
    const Complex m11 = h0.value;
    const Complex m12 = -j1.value;
    const Complex m21 = (k0 / config.eps0) * h0.deriv;
    const Complex m22 = -(k1 / config.eps1) * j1.deriv;
    const Complex r1 = -inc * j0.value;
    const Complex r2 = -(k0 / config.eps0) * inc * j0.deriv;
    const Complex det = m11 * m22 - m12 * m21;
    const double size = std::abs(m11 * m22) + std::abs(m12 * m21);
    if (!(std::abs(det) > 1e-14 * size)) throw SolverError("mie_transmission: singular mode", 0.0);
    sol.a[n + n_max] = (r1 * m22 - m12 * r2) / det;
    sol.b[n + n_max] = (m11 * r2 - r1 * m21) / det;
  }
  return sol;
}

namespace {

// Sum over n of coefficient(n) e^{i n theta} with a parity-extended order table.
template <class Coef>
Complex mode_sum(int n_max, double theta, Coef coef) {
  Complex acc{0.0, 0.0};
  for (int n = -n_max; n <= n_max; ++n) acc += coef(n) * std::exp(kI * static_cast<double>(n) * theta);
  return acc;
}

Complex order_value(const std::vector<Complex>& table, int n) {
  const int m = std::abs(n);
  return (n < 0 && (m % 2 == 1)) ? -table[m] : table[m];
}

Complex order_deriv(const std::vector<Complex>& table, int n, Complex z) {
  return order_value(table, n - 1) - (static_cast<double>(n) / z) * order_value(table, n);
}

}  // namespace

Complex MieSolution::trace_u(double theta) const {
  const Complex z0 = k0 * radius;
  const auto j = specfun::bessel_j_orders(n_max, z0);
  const auto h = specfun::hankel1_orders(n_max, z0);
  return mode_sum(n_max, theta, [&](int n) {
    const Complex inc = std::pow(kI, n) * std::exp(-kI * static_cast<double>(n) * theta_d);
    return inc * order_value(j, n) + coeff_a(n) * order_value(h, n);
  });
}

Complex MieSolution::trace_q(double theta) const {
  const Complex z0 = k0 * radius;
  const auto j = specfun::bessel_j_orders(n_max + 1, z0);
  const auto h = specfun::hankel1_orders(n_max + 1, z0);
  return (k0 / eps0) * mode_sum(n_max, theta, [&](int n) {
           const Complex inc = std::pow(kI, n) * std::exp(-kI * static_cast<double>(n) * theta_d);
           return inc * order_deriv(j, n, z0) + coeff_a(n) * order_deriv(h, n, z0);
         });
}

Complex MieSolution::interior_q(double theta) const {
  const Complex z1 = k1 * radius;
  const auto j = specfun::bessel_j_orders(n_max + 1, z1);
  return (k1 / eps1) *
         mode_sum(n_max, theta, [&](int n) { return coeff_b(n) * order_deriv(j, n, z1); });
}

Complex MieSolution::field(Point2 x) const {
  const double r = norm(x);
  const double theta = std::atan2(x.y, x.x);
  if (r < radius) {
    const auto j = specfun::bessel_j_orders(n_max, k1 * r);
    return mode_sum(n_max, theta, [&](int n) { return coeff_b(n) * order_value(j, n); });
  }
  const auto j = specfun::bessel_j_orders(n_max, k0 * r);
  const auto h = specfun::hankel1_orders(n_max, k0 * r);
  return mode_sum(n_max, theta, [&](int n) {
    const Complex inc = std::pow(kI, n) * std::exp(-kI * static_cast<double>(n) * theta_d);
    return inc * order_value(j, n) + coeff_a(n) * order_value(h, n);
  });
}

}  // namespace tbie::circle_oracle
