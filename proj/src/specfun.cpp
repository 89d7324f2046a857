#include "tbie/specfun.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>

namespace tbie::specfun {
namespace {

// Upper-half-plane threshold above which H^(1) = J + iY loses more than
// e^(2*2) ~ 55 ulps to cancellation.
constexpr double kRecessiveImag = 2.0;
constexpr double kAsymptoticAbs = 17.0;
constexpr double kSeriesAbs = 1.0;
constexpr double kRescale = 1e250;

Complex canonical(Complex z) {
  // -0.0 imaginary parts would select the lower side of the log branch cut.
  return {z.real(), z.imag() == 0.0 ? 0.0 : z.imag()};
}

void check_box(int n, Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw DomainError("cylinder function: non-finite argument");
  }
  if (std::abs(n) > kMaxOrder) {
    throw DomainError("cylinder function: |n| = " + std::to_string(std::abs(n)) +
                      " exceeds " + std::to_string(kMaxOrder));
  }
  if (std::abs(z) > kMaxAbs || std::abs(z.imag()) > kMaxImag) {
    throw DomainError("cylinder function: argument outside support box");
  }
}

void check_nonzero(Complex z) {
  if (z == Complex(0.0, 0.0)) {
    throw SingularityError("Y_n / H_n evaluated at z = 0");
  }
}

double parity_sign(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

Complex finite_or_throw(Complex v, const char* what) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw RangeError(std::string(what) + ": result overflows double precision");
  }
  return v;
}

// J_k(z), k = 0..kmax, by the ascending series. Intended for |z| <= 1.
std::vector<Complex> j_series(int kmax, Complex z) {
  std::vector<Complex> out(kmax + 1);
  const Complex half = 0.5 * z;
  const Complex q = -0.25 * z * z;
  Complex pref{1.0, 0.0};
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) pref *= half / static_cast<double>(k);
    Complex term{1.0, 0.0};
    Complex sum{1.0, 0.0};
    for (int m = 1; m < 200; ++m) {
      term *= q / (static_cast<double>(m) * static_cast<double>(m + k));
      sum += term;
      if (std::abs(term.real()) + std::abs(term.imag()) <=
          1e-17 * (std::abs(sum.real()) + std::abs(sum.imag()))) {
        break;
      }
    }
    out[k] = pref * sum;
  }
  return out;
}

// Coefficient of J_j in S1 = sum_{m>=1} (-1)^m (J_{2m-1} - J_{2m+1}) / m (j odd).
double s1_coefficient(int j) {
  const double sgn = (((j + 1) / 2) % 2 == 0) ? 1.0 : -1.0;
  double c = 2.0 / (j + 1);
  if (j >= 3) c += 2.0 / (j - 1);
  return sgn * c;
}

struct Sequence {
  std::vector<Complex> j;  // J_0..J_nmax
  Complex s0;              // sum_{m>=1} (-1)^m J_{2m} / m
  Complex s1;              // see s1_coefficient
};

Sequence neumann_sums_from(std::vector<Complex> j, int nmax) {
  Sequence out;
  out.s0 = 0.0;
  out.s1 = 0.0;
  for (int k = static_cast<int>(j.size()) - 1; k >= 1; --k) {
    if (k % 2 == 0) {
      const int m = k / 2;
      out.s0 += ((m % 2 == 0) ? 1.0 : -1.0) * j[k] / static_cast<double>(m);
    } else {
      out.s1 += s1_coefficient(k) * j[k];
    }
  }
  j.resize(nmax + 1);
  out.j = std::move(j);
  return out;
}

// Miller backward recurrence. The normalization exp(u z) = J_0 + 2 sum u^k J_k
// with u = -i (Im z >= 0) or u = +i (Im z < 0) keeps every term of the sum the
// same size as the result, so no cancellation for large |Im z|.
Sequence miller(int nmax, Complex z) {
  const double az = std::abs(z);
  const int start = std::max(nmax, static_cast<int>(std::ceil(az))) + 20 +
                    static_cast<int>(std::ceil(10.0 * std::cbrt(az)));
  const bool upper = z.imag() >= 0.0;
  const std::array<Complex, 4> upow =
      upper ? std::array<Complex, 4>{Complex(1, 0), Complex(0, -1), Complex(-1, 0), Complex(0, 1)}
            : std::array<Complex, 4>{Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};

  std::vector<Complex> j(nmax + 1, Complex(0.0, 0.0));
  const Complex inv_z = 1.0 / z;
  Complex fkp1{0.0, 0.0};
  Complex fk{1e-30, 0.0};
  Complex norm{0.0, 0.0};
  Complex s0{0.0, 0.0};
  Complex s1{0.0, 0.0};

  for (int k = start; k >= 1; --k) {
    if (k <= nmax) j[k] = fk;
    norm += 2.0 * upow[k % 4] * fk;
    if (k % 2 == 0) {
      const int m = k / 2;
      s0 += ((m % 2 == 0) ? 1.0 : -1.0) * fk / static_cast<double>(m);
    } else {
      s1 += s1_coefficient(k) * fk;
    }
    const Complex fkm1 = (2.0 * k) * inv_z * fk - fkp1;
    fkp1 = fk;
    fk = fkm1;
    if (std::abs(fk.real()) + std::abs(fk.imag()) > kRescale) {
      const double s = 1.0 / kRescale;
      fk *= s;
      fkp1 *= s;
      norm *= s;
      s0 *= s;
      s1 *= s;
      for (int m = std::max(k - 1, 0); m <= nmax; ++m) j[m] *= s;
    }
  }
  j[0] = fk;
  norm += fk;

  const Complex target = std::exp((upper ? Complex(0, -1) : Complex(0, 1)) * z);
  const Complex scale = target / norm;
  for (auto& v : j) v *= scale;
  return {std::move(j), s0 * scale, s1 * scale};
}

Sequence j_sequence(int nmax, Complex z, bool with_neumann) {
  if (std::abs(z) <= kSeriesAbs) {
    // J_18(1) ~ 6e-22: later terms do not reach the Neumann sums.
    const int kmax = with_neumann ? std::max(nmax, 18) : nmax;
    return neumann_sums_from(j_series(kmax, z), nmax);
  }
  return miller(std::max(nmax, 1), z);
}

// Neumann series for Y_0, Y_1 given the J sequence.
std::array<Complex, 2> y01_from(const Sequence& seq, Complex z) {
  const Complex log_term = std::log(0.5 * z) + kEulerGamma;
  const Complex j0 = seq.j[0];
  const Complex j1 = seq.j[1];
  const Complex y0 = (2.0 / kPi) * log_term * j0 - (4.0 / kPi) * seq.s0;
  const Complex y1 = (2.0 / kPi) * (log_term * j1 - j0 / z) + (2.0 / kPi) * seq.s1;
  return {y0, y1};
}

Complex hankel_asymptotic(int nu, Complex z) {
  const double mu = 4.0 * nu * nu;
  const Complex iz = kI / z;
  Complex term{1.0, 0.0};
  Complex sum{1.0, 0.0};
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= iz * ((mu - odd * odd) / (8.0 * k));
    const double mag = std::abs(term);
    if (mag > prev) break;
    sum += term;
    if (mag <= 1e-17 * std::abs(sum)) break;
    prev = mag;
  }
  const Complex phase = z - (0.5 * nu + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * z)) * std::exp(kI * phase) * sum;
}

// K_nu(w) = int_0^inf exp(-w cosh t) cosh(nu t) dt for Re w > 0, by the
// trapezoid rule, which converges geometrically for this analytic integrand.
Complex bessel_k_integral(int nu, Complex w) {
  const double strip = 0.5 * kPi - std::abs(std::arg(w));
  const double h = 2.0 * kPi * 0.75 * strip / 50.0;
  const double rew = w.real();
  const double tmax = std::acosh(1.0 + 45.0 / rew);
  Complex sum = 0.5 * std::exp(-w);
  for (int j = 1;; ++j) {
    const double t = j * h;
    if (t > tmax) break;
    sum += std::exp(-w * std::cosh(t)) * std::cosh(nu * t);
  }
  return h * sum;
}

std::array<Complex, 2> recessive_h01(Complex z) {
  if (std::abs(z) >= kAsymptoticAbs) {
    return {hankel_asymptotic(0, z), hankel_asymptotic(1, z)};
  }
  const Complex w = -kI * z;
  return {(2.0 / (kPi * kI)) * bessel_k_integral(0, w), -(2.0 / kPi) * bessel_k_integral(1, w)};
}

enum class Route { Neumann, RecessiveUpper, RecessiveLower };

// Orders 0 and 1 never recur, so Neumann is safe for them anywhere below the
// upper-half threshold. Higher orders recur on the recessive Hankel function,
// which is the growing solution in n.
Route route_for(Complex z, int nmax) {
  if (z.imag() >= kRecessiveImag) return Route::RecessiveUpper;
  if (nmax >= 2 && z.imag() <= -kRecessiveImag) return Route::RecessiveLower;
  return Route::Neumann;
}

void forward_recurrence(std::vector<Complex>& c, Complex z, const char* what) {
  const Complex inv_z = 1.0 / z;
  for (std::size_t n = 1; n + 1 < c.size(); ++n) {
    c[n + 1] = (2.0 * static_cast<double>(n)) * inv_z * c[n] - c[n - 1];
    finite_or_throw(c[n + 1], what);
  }
}

struct AllOrders {
  std::vector<Complex> j, y, h;
};

// J, Y and H^(1) for orders 0..nmax, z != 0, z canonical and inside the box.
AllOrders all_orders(int nmax, Complex z) {
  const int top = std::max(nmax, 1);
  const Route route = route_for(z, nmax);
  Sequence seq = j_sequence(top, z, route == Route::Neumann);
  AllOrders out;
  out.j = seq.j;
  out.y.assign(top + 1, Complex(0.0, 0.0));
  out.h.assign(top + 1, Complex(0.0, 0.0));
  switch (route) {
    case Route::RecessiveUpper: {
      const auto h01 = recessive_h01(z);
      out.h[0] = h01[0];
      out.h[1] = h01[1];
      forward_recurrence(out.h, z, "hankel1");
      for (int n = 0; n <= top; ++n) out.y[n] = -kI * (out.h[n] - out.j[n]);
      break;
    }
    case Route::RecessiveLower: {
      // H^(2)_n(z) = conj(H^(1)_n(conj z)) is recessive here.
      const Complex zc = std::conj(z);
      std::vector<Complex> g(top + 1);
      const auto h01 = recessive_h01(zc);
      g[0] = h01[0];
      g[1] = h01[1];
      forward_recurrence(g, zc, "hankel1");
      for (int n = 0; n <= top; ++n) {
        const Complex h2 = std::conj(g[n]);
        out.y[n] = -kI * (out.j[n] - h2);
        out.h[n] = 2.0 * out.j[n] - h2;
        finite_or_throw(out.h[n], "hankel1");
      }
      break;
    }
    case Route::Neumann: {
      const auto y01 = y01_from(seq, z);
      out.y[0] = y01[0];
      out.y[1] = y01[1];
      forward_recurrence(out.y, z, "bessel_y");
      for (int n = 0; n <= top; ++n) out.h[n] = out.j[n] + kI * out.y[n];
      break;
    }
  }
  return out;
}

Complex signed_order(const std::vector<Complex>& c, int n) {
  const int m = std::abs(n);
  return n < 0 ? parity_sign(m) * c[m] : c[m];
}

// The *_impl functions take a canonical in-box z and allow one order past the
// box so derivatives at |n| = kMaxOrder are defined.
std::vector<Complex> j_orders_impl(int nmax, Complex z) {
  if (z == Complex(0.0, 0.0)) {
    std::vector<Complex> out(nmax + 1, Complex(0.0, 0.0));
    out[0] = 1.0;
    return out;
  }
  Sequence seq = j_sequence(nmax, z, false);
  seq.j.resize(nmax + 1);
  for (auto& v : seq.j) {
    finite_or_throw(v, "bessel_j");
    if (std::abs(v) < std::numeric_limits<double>::min()) v = 0.0;
  }
  return seq.j;
}

std::vector<Complex> h_orders_impl(int nmax, Complex z) {
  check_nonzero(z);
  auto all = all_orders(nmax, z);
  all.h.resize(nmax + 1);
  return all.h;
}

std::vector<Complex> y_orders_impl(int nmax, Complex z) {
  check_nonzero(z);
  auto all = all_orders(nmax, z);
  all.y.resize(nmax + 1);
  return all.y;
}

std::vector<Complex> family(CylKind kind, int nmax, Complex z) {
  if (kind == CylKind::J) return j_orders_impl(nmax, z);
  if (kind == CylKind::Y) return y_orders_impl(nmax, z);
  return h_orders_impl(nmax, z);
}

Complex checked_canonical(int nmax, Complex z, const char* what) {
  if (nmax < 0) throw DomainError(std::string(what) + ": negative order count");
  check_box(nmax, z);
  return canonical(z);
}

}  // namespace

std::vector<Complex> bessel_j_orders(int nmax, Complex z) {
  return j_orders_impl(nmax, checked_canonical(nmax, z, "bessel_j_orders"));
}

std::vector<Complex> hankel1_orders(int nmax, Complex z) {
  return h_orders_impl(nmax, checked_canonical(nmax, z, "hankel1_orders"));
}

std::vector<Complex> bessel_y_orders(int nmax, Complex z) {
  return y_orders_impl(nmax, checked_canonical(nmax, z, "bessel_y_orders"));
}

Complex bessel_j(int n, Complex z) { return signed_order(bessel_j_orders(std::abs(n), z), n); }

Complex bessel_y(int n, Complex z) { return signed_order(bessel_y_orders(std::abs(n), z), n); }

Complex hankel1(int n, Complex z) { return signed_order(hankel1_orders(std::abs(n), z), n); }

CylPair cyl_with_deriv(CylKind kind, int n, Complex z) {
  z = checked_canonical(std::abs(n), z, "cyl_deriv");
  if (kind == CylKind::J && z == Complex(0.0, 0.0)) {
    const double value = (n == 0) ? 1.0 : 0.0;
    double deriv = 0.0;
    if (n == 1) deriv = 0.5;
    if (n == -1) deriv = -0.5;
    return {value, deriv};
  }
  const int m = std::abs(n);
  const auto c = family(kind, m + 1, z);
  const Complex value = signed_order(c, n);
  const Complex prev = signed_order(c, n - 1);
  return {value, prev - (static_cast<double>(n) / z) * value};
}

Complex cyl_deriv(CylKind kind, int n, Complex z) { return cyl_with_deriv(kind, n, z).deriv; }

Cyl01 cyl01(Complex z) {
  check_box(1, z);
  z = canonical(z);
  check_nonzero(z);
  if (route_for(z, 1) != Route::Neumann) {
    const auto all = all_orders(1, z);
    return {all.j[0], all.j[1], all.h[0], all.h[1]};
  }
  const Sequence seq = j_sequence(1, z, true);
  const auto y01 = y01_from(seq, z);
  return {seq.j[0], seq.j[1], seq.j[0] + kI * y01[0], seq.j[1] + kI * y01[1]};
}

namespace {

Complex cyl(CylKind kind, int n, Complex z) {
  switch (kind) {
    case CylKind::J: return bessel_j(n, z);
    case CylKind::Y: return bessel_y(n, z);
    case CylKind::H1: return hankel1(n, z);
  }
  return 0.0;
}

}  // namespace

double wronskian_residual(int n, Complex z) {
  const bool upper = z.imag() >= 0.0;
  // H^(2)_n(z) = conj(H^(1)_n(conj z)) for integer n.
  auto recessive = [&](int m) {
    return upper ? hankel1(m, z) : std::conj(hankel1(m, std::conj(z)));
  };
  const Complex t1 = bessel_j(n + 1, z) * recessive(n);
  const Complex t2 = bessel_j(n, z) * recessive(n + 1);
  const Complex w = (upper ? 2.0 : -2.0) * kI / (kPi * z);
  return std::abs(t1 - t2 - w) / (std::abs(t1) + std::abs(t2));
}

double recurrence_residual(CylKind kind, int n, Complex z) {
  const Complex lo = cyl(kind, n - 1, z);
  const Complex mid = (2.0 * n / z) * cyl(kind, n, z);
  const Complex hi = cyl(kind, n + 1, z);
  return std::abs(lo + hi - mid) / (std::abs(lo) + std::abs(hi) + std::abs(mid));
}

double parity_residual(CylKind kind, int n, Complex z) {
  const Complex pos = cyl(kind, n, z);
  const Complex neg = cyl(kind, -n, z);
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return std::abs(neg - sign * pos) / std::abs(pos);
}

}  // namespace tbie::specfun
