#include <doctest.h>

#include <random>

#include "tbie/circle_oracle.hpp"

using namespace tbie;
using circle_oracle::ModeFunction;

namespace {

struct Sampler {
  std::mt19937_64 rng{5};
  double operator()(double lo, double hi) { return lo + (hi - lo) * (rng() >> 11) * 0x1.0p-53; }
};

}  // namespace

TEST_CASE("mixed determinant factors into fictitious and true parts") {
  Sampler u;
  for (double eps1 : {4.0, 2.25, 9.0}) {
    systems::TransmissionConfig c;
    c.eps1 = eps1;
    c.curve = geometry::circle(u(0.5, 1.5));
    double err = 0.0;
    for (int i = 0; i < 100; ++i) {
      const int n = static_cast<int>(std::floor(u(-15.0, 16.0)));
      const Complex w(u(0.3, 5.0), u(-1.0, 0.2));
      const Complex direct = circle_oracle::sarrus(circle_oracle::mode_matrix_mixed(n, w, c));
      const Complex fact = circle_oracle::mixed_det_factored(n, w, c);
      err = std::max(err, std::abs(direct - fact) / std::abs(fact));
      // Independent check of the Sarrus rule.
      const Complex lu = circle_oracle::mode_matrix_mixed(n, w, c).determinant();
      CHECK(std::abs(lu - fact) <= 1e-11 * std::abs(fact));
    }
    CAPTURE(eps1);
    CHECK(err <= 1e-12);
  }
}

TEST_CASE("BM mode determinant") {
  systems::TransmissionConfig c;
  for (int n : {0, 2, -7}) {
    const Complex w(1.4, -0.35);
    const auto m = circle_oracle::mode_matrix_bm(n, w, c);
    const Complex core = m.core.determinant();
    CHECK(std::abs(core - circle_oracle::det_true(n, w, c)) <= 1e-13 * std::abs(core));
    const Complex full = m.full().determinant();
    const Complex expect = m.scale * m.scale * circle_oracle::det_fict(n, w, c) * core;
    CHECK(std::abs(full - expect) <= 1e-12 * std::abs(expect));
  }
}

TEST_CASE("oracle quantities are even in n") {
  systems::TransmissionConfig c;
  for (int n : {1, 4, 13}) {
    const Complex w(2.1, -0.6);
    CHECK(circle_oracle::det_true(-n, w, c) == circle_oracle::det_true(n, w, c));
    CHECK(circle_oracle::det_fict(-n, w, c) == circle_oracle::det_fict(n, w, c));
    CHECK(std::abs(circle_oracle::mixed_det_factored(-n, w, c) -
                   circle_oracle::mixed_det_factored(n, w, c)) <=
          1e-14 * std::abs(circle_oracle::mixed_det_factored(n, w, c)));
  }
}

TEST_CASE("roots in the reference window") {
  systems::TransmissionConfig c;
  const Rect window{0.5, 3.0, -1.0, 0.0};
  const auto roots = circle_oracle::find_eigen(window, c);
  CHECK(roots.size() == 9);
  int n_true = 0;
  for (const auto& r : roots) {
    CAPTURE(r.lambda);
    CHECK(r.converged);
    CHECK(window.contains(r.lambda));
    CHECK(r.lambda.imag() < 0.0);
    CHECK(r.residual <= 1e-13);
    CHECK(r.multiplicity == (r.index == 0 ? 1 : 2));
    const auto cls = circle_oracle::classify(r.lambda, c);
    CHECK(cls.classification == r.classification);
    CHECK(cls.n == r.index);
    n_true += r.classification == Classification::True;
  }
  CHECK(n_true == 7);
  for (std::size_t i = 1; i < roots.size(); ++i) {
    CHECK(roots[i - 1].lambda.real() <= roots[i].lambda.real());
  }
}

TEST_CASE("each root zeroes exactly the function it is classified by") {
  systems::TransmissionConfig c;
  const auto roots = circle_oracle::find_eigen({0.5, 3.0, -1.0, 0.0}, c);
  for (const auto& r : roots) {
    const double rt = circle_oracle::relative_residual(ModeFunction::True, r.index, r.lambda, c);
    const double rf = circle_oracle::fict_relative_residual(r.index, r.lambda, c);
    if (r.classification == Classification::True) {
      CHECK(rt <= 1e-13);
      CHECK(rf > 1e-3);
    } else {
      CHECK(rf <= 1e-13);
      CHECK(rt > 1e-3);
    }
  }
}

TEST_CASE("transparent inclusion has no true eigenvalues") {
  systems::TransmissionConfig c;
  c.eps1 = 1.0;
  const auto roots = circle_oracle::find_eigen({0.5, 3.0, -1.0, 0.0}, c);
  for (const auto& r : roots) CHECK(r.classification == Classification::Fictitious);
  // det_true becomes k times a Wronskian and never vanishes.
  CHECK(std::abs(circle_oracle::det_true(2, Complex(1.0, -0.5), c)) > 0.1);
}

TEST_CASE("preconditions") {
  systems::TransmissionConfig c;
  CHECK_THROWS_AS(circle_oracle::find_eigen({-1.0, 1.0, -1.0, 0.0}, c), DomainError);
  CHECK_THROWS_AS(circle_oracle::find_eigen({1.0, 0.5, -1.0, 0.0}, c), DomainError);
  c.curve = geometry::star();
  CHECK_THROWS_AS(circle_oracle::find_eigen({0.5, 3.0, -1.0, 0.0}, c), DomainError);
  CHECK_THROWS_AS(circle_oracle::det_true(0, 1.0, c), DomainError);
}
