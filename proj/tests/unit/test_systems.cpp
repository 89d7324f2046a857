#include <doctest.h>

#include "tbie/circle_oracle.hpp"
#include "tbie/specfun.hpp"
#include "tbie/systems.hpp"

using namespace tbie;
using systems::Formulation;

namespace {

systems::TransmissionConfig star_config() {
  systems::TransmissionConfig c;
  c.curve = geometry::star(1.0, 0.3, 5);
  return c;
}

// Far-field pattern of the scattered field -eps0 S q + D u in direction x_hat.
Complex far_field(const systems::TransmissionConfig& c, const geometry::CurveDiscretization& d,
                  const systems::BoundarySolution& s, Point2 xh) {
  const Complex k = c.k0(s.omega);
  const Complex gamma = 0.25 * kI * std::sqrt(2.0 / (kPi * k)) * std::exp(-0.25 * kI * kPi);
  Complex acc = 0.0;
  for (int j = 0; j < d.n; ++j) {
    const Complex e = std::exp(-kI * k * dot(xh, d.points[j]));
    acc += (-c.eps0 * s.q[j] - kI * k * dot(xh, d.normals[j]) * s.u[j]) * e * d.speeds[j];
  }
  return gamma * d.step() * acc;
}

}  // namespace

TEST_CASE("block structure of the mixed system") {
  systems::TransmissionConfig c;
  const auto d = geometry::sample(c.curve, 32);
  const auto op = systems::assemble_mixed(c, d, Complex(1.3, -0.2));
  const int n = d.n;
  REQUIRE(op.matrix.rows() == 3 * n);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  CHECK(op.matrix.block(n, 0, n, n) == -I);
  CHECK(op.matrix.block(2 * n, n, n, n) == -I);
  CHECK(op.matrix.block(0, 2 * n, n, n).isZero(0.0));
  CHECK(op.matrix.block(n, n, n, n).isZero(0.0));
  CHECK(op.matrix.block(2 * n, 0, n, n).isZero(0.0));
  // The first block row is shared with the BM system.
  const auto bm = systems::assemble_bm(c, d, Complex(1.3, -0.2));
  CHECK(op.matrix.block(0, 0, n, 2 * n) == bm.matrix.block(0, 0, n, 2 * n));
}

TEST_CASE("block operators act on Fourier modes like the mode matrices") {
  systems::TransmissionConfig c;
  c.curve = geometry::circle(0.8);
  const auto d = geometry::sample(c.curve, 128);
  const Complex w(1.7, -0.3);
  const auto bm = systems::assemble_bm(c, d, w);
  const auto mixed = systems::assemble_mixed(c, d, w);
  for (int n : {0, 3, -5, 12}) {
    Eigen::VectorXcd e(d.n);
    for (int j = 0; j < d.n; ++j) e[j] = std::exp(kI * double(n) * d.t[j]);
    const Eigen::Matrix2cd m2 = circle_oracle::mode_matrix_bm(n, w, c).full();
    const Eigen::Matrix3cd m3 = circle_oracle::mode_matrix_mixed(n, w, c);
    for (int col = 0; col < 2; ++col) {
      Eigen::VectorXcd x = Eigen::VectorXcd::Zero(2 * d.n);
      x.segment(col * d.n, d.n) = e;
      const Eigen::VectorXcd y = bm.matrix * x;
      for (int row = 0; row < 2; ++row) {
        CHECK((y.segment(row * d.n, d.n) - m2(row, col) * e).norm() <= 1e-9 * e.norm() * (1 + std::abs(m2(row, col))));
      }
    }
    for (int col = 0; col < 3; ++col) {
      Eigen::VectorXcd x = Eigen::VectorXcd::Zero(3 * d.n);
      x.segment(col * d.n, d.n) = e;
      const Eigen::VectorXcd y = mixed.matrix * x;
      for (int row = 0; row < 3; ++row) {
        CHECK((y.segment(row * d.n, d.n) - m3(row, col) * e).norm() <= 1e-9 * e.norm() * (1 + std::abs(m3(row, col))));
      }
    }
  }
}

TEST_CASE("plane-wave expansion of the incident trace") {
  // Jacobi-Anger: exp(i k r cos(theta - theta_d)) = sum i^n J_n(k r) e^{i n (theta - theta_d)}.
  const auto d = geometry::sample(geometry::circle(1.0), 64);
  const double th = 0.4;
  const auto wave = systems::incident_plane_wave(2.0, {std::cos(th), std::sin(th)});
  const auto tr = systems::incident_trace(wave, d);
  for (int j = 0; j < d.n; ++j) {
    Complex sum = 0.0, dsum = 0.0;
    for (int n = -40; n <= 40; ++n) {
      const auto jn = specfun::cyl_with_deriv(specfun::CylKind::J, n, 2.0);
      const Complex e = std::pow(kI, n) * std::exp(kI * double(n) * (d.t[j] - th));
      sum += e * jn.value;
      dsum += 2.0 * e * jn.deriv;
    }
    CHECK(std::abs(tr.value[j] - sum) < 1e-13);
    CHECK(std::abs(tr.normal_derivative[j] - dsum) < 1e-12);
  }
  CHECK_THROWS_AS(systems::incident_plane_wave(2.0, {1.0, 0.1}), DomainError);
}

TEST_CASE("circle scattering matches the Mie series") {
  systems::TransmissionConfig c;
  const auto d = geometry::sample(c.curve, 128);
  const double w = 2.0;
  const Point2 dir{0.6, 0.8};
  const auto wave = systems::incident_plane_wave(c.k0(w), dir);
  const auto mie = circle_oracle::mie_transmission(c, w, dir, circle_oracle::mie_min_order(2.0));
  // Interface conditions of the oracle itself.
  for (double th : {0.0, 1.0, 2.5}) {
    CHECK(std::abs(mie.trace_q(th) - mie.interior_q(th)) < 1e-13);
    const Point2 out{1.0000001 * std::cos(th), 1.0000001 * std::sin(th)};
    CHECK(std::abs(mie.field(out) - mie.trace_u(th)) < 1e-6);
  }
  for (Formulation f : {Formulation::BM, Formulation::Mixed}) {
    const auto s = systems::solve_scattering(c, d, w, wave, f);
    CHECK(s.residual < 1e-12);
    double eu = 0, eq = 0;
    for (int j = 0; j < d.n; ++j) {
      eu = std::max(eu, std::abs(s.u[j] - mie.trace_u(d.t[j])));
      eq = std::max(eq, std::abs(s.q[j] - mie.trace_q(d.t[j])));
    }
    CHECK(eu < 1e-10);
    CHECK(eq < 1e-10);
    const std::vector<Point2> ext = {{1.5, 0.2}, {-2.0, 1.0}};
    const std::vector<Point2> in = {{0.1, -0.3}, {-0.5, 0.4}};
    const auto fe = systems::eval_field(c, d, s, ext, systems::FieldRegion::Exterior);
    const auto fi = systems::eval_field(c, d, s, in, systems::FieldRegion::Interior);
    for (int t = 0; t < 2; ++t) {
      CHECK(std::abs(fe[t] - mie.field(ext[t])) < 1e-10);
      CHECK(std::abs(fi[t] - mie.field(in[t])) < 1e-10);
    }
    CHECK_THROWS_AS(systems::eval_field(c, d, s, in, systems::FieldRegion::Exterior), DomainError);
  }
}

TEST_CASE("BM and mixed formulations agree on a star") {
  const auto c = star_config();
  const auto d = geometry::sample(c.curve, 192);
  const auto wave = systems::incident_plane_wave(c.k0(1.5), {1.0, 0.0});
  const auto bm = systems::solve_scattering(c, d, 1.5, wave, Formulation::BM);
  const auto mx = systems::solve_scattering(c, d, 1.5, wave, Formulation::Mixed);
  CHECK((bm.u - mx.u).norm() <= 1e-10 * bm.u.norm());
  CHECK((bm.q - mx.q).norm() <= 1e-10 * bm.q.norm());
  // The mixed interior density reproduces the trace: u = S1 phi.
  const auto s1 = layerpot::assemble(layerpot::OperatorKind::S, c.k1(1.5), d);
  CHECK((s1.entries * mx.phi - mx.u).norm() <= 1e-10 * mx.u.norm());
  const std::vector<Point2> in = {{0.2, 0.1}};
  const auto a = systems::eval_field(c, d, bm, in, systems::FieldRegion::Interior);
  const auto b = systems::eval_field(c, d, mx, in, systems::FieldRegion::Interior);
  CHECK(std::abs(a[0] - b[0]) <= 1e-9 * std::abs(a[0]));
}

TEST_CASE("transparent inclusion scatters nothing") {
  systems::TransmissionConfig c = star_config();
  c.eps1 = 1.0;
  const auto d = geometry::sample(c.curve, 192);
  const auto wave = systems::incident_plane_wave(c.k0(2.0), {0.0, 1.0});
  const auto tr = systems::incident_trace(wave, d);
  for (Formulation f : {Formulation::BM, Formulation::Mixed}) {
    const auto s = systems::solve_scattering(c, d, 2.0, wave, f);
    CHECK((s.u - tr.value).norm() <= 1e-10 * tr.value.norm());
    CHECK((s.q - tr.normal_derivative).norm() <= 1e-10 * tr.normal_derivative.norm());
    const std::vector<Point2> ext = {{2.0, 2.0}};
    const auto fe = systems::eval_field(c, d, s, ext, systems::FieldRegion::Exterior);
    CHECK(std::abs(fe[0] - wave.value(ext[0])) < 1e-10);
  }
}

TEST_CASE("optical theorem for a lossless inclusion") {
  for (const auto& c : {systems::TransmissionConfig{}, star_config()}) {
    const auto d = geometry::sample(c.curve, 192);
    const double w = 1.8;
    const Point2 dir{std::cos(0.3), std::sin(0.3)};
    const auto wave = systems::incident_plane_wave(c.k0(w), dir);
    const auto s = systems::solve_scattering(c, d, w, wave, Formulation::Mixed);
    const int m = 256;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      const double th = 2.0 * kPi * i / m;
      total += std::norm(far_field(c, d, s, {std::cos(th), std::sin(th)}));
    }
    total *= 2.0 * kPi / m;
    const double k = c.k0(w).real();
    const double forward =
        -std::sqrt(8.0 * kPi / k) * std::real(std::exp(0.25 * kI * kPi) * far_field(c, d, s, dir));
    CHECK(total > 1e-3);
    CHECK(std::abs(total - forward) <= 1e-10 * total);
  }
}

TEST_CASE("Mie coefficients conserve energy mode by mode") {
  systems::TransmissionConfig c;
  const auto mie = circle_oracle::mie_transmission(c, 2.5, {1.0, 0.0}, 40);
  for (int n = -40; n <= 40; ++n) {
    const Complex cn = mie.coeff_a(n) / std::pow(kI, n);
    CHECK(std::abs(std::norm(cn) + cn.real()) < 1e-14);
  }
  CHECK_THROWS_AS(circle_oracle::mie_transmission(c, 2.5, {1.0, 0.0}, 5), DomainError);
}

TEST_CASE("solver preconditions") {
  systems::TransmissionConfig c;
  const auto d = geometry::sample(c.curve, 32);
  const auto wave = systems::incident_plane_wave(2.0, {1.0, 0.0});
  CHECK_THROWS_AS(systems::solve_scattering(c, d, -1.0, wave, Formulation::BM), DomainError);
  c.eps1 = -4.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  const auto big = systems::incident_plane_wave(Complex(1.0, -150.0), {1.0, 0.0});
  CHECK_THROWS_AS(systems::incident_trace(big, d), RangeError);
}
